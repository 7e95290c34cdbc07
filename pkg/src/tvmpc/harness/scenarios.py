"""Built-in scenarios, all starting from the nominal gait parameters."""
from __future__ import annotations

from dataclasses import replace

from ..sim import Disturbance
from .config import ScenarioConfig

PUSH_TIME = 2.2
PUSH_DURATION = 0.01
NOISE_BOUND = 0.02


def _diagonal() -> ScenarioConfig:
    return ScenarioConfig(name="diagonal")


def builtin_scenarios() -> dict:
    base = _diagonal()
    noisy = dict(noise_bound=NOISE_BOUND, noise_sigma=NOISE_BOUND / 2.0)
    out = {
        "diagonal": base,
        "stairs": replace(base, name="stairs", stair_rise=0.1, delta_z_c=0.1),
        "noise_walk": replace(base, name="noise_walk", **noisy),
    }
    for tag, off in (("p01", 0.1), ("m01", -0.1), ("p02", 0.2), ("m02", -0.2)):
        out[f"height_{tag}"] = replace(base, name=f"height_{tag}", height_offset=off)
    for tag, f in (("p50", 50.0), ("m50", -50.0), ("p75", 75.0), ("m75", -75.0)):
        push = Disturbance((f, f), PUSH_TIME, PUSH_DURATION)
        out[f"push_{tag}"] = replace(base, name=f"push_{tag}", disturbances=(push,), **noisy)
    return out

