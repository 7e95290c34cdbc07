"""Simulated plant: one jerk-driven point mass per horizontal axis.

Pushes are modelled as a horizontal force acting for a short window. Over a
sample the force adds ``F/m`` times the overlap of the window with the sample
to the velocity, and the matching double integral to the position; the
commanded acceleration state is left untouched.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import AxisState, transition_matrices


@dataclass(frozen=True)
class Disturbance:
    force: tuple  # (F_x, F_y) [N]
    start: float
    duration: float

    def __post_init__(self):
        if not self.duration > 0.0:
            raise ValueError("disturbance duration must be positive")
        object.__setattr__(self, "force", tuple(float(f) for f in self.force))
        if len(self.force) != 2:
            raise ValueError("force needs an x and a y component")

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True)
class NoiseSpec:
    bound: float = 0.0
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.bound < 0.0 or self.sigma < 0.0:
            raise ValueError("noise bound and sigma must be non-negative")


@dataclass
class PlantState:
    """True horizontal COM state of the simulated robot."""

    axes: list
    mass: float = 100.0
    t: float = 0.0

    def __post_init__(self):
        if not self.mass > 0.0:
            raise ValueError("mass must be positive")
        self.axes = [a if isinstance(a, AxisState) else AxisState.from_array(a) for a in self.axes]


def external_acceleration(disturbances, t: float, mass: float) -> np.ndarray:
    """Sum of ``F/m`` over the disturbances active at time ``t``."""
    acc = np.zeros(2)
    for d in disturbances:
        if d.start <= t < d.end:
            acc += np.array(d.force) / mass
    return acc


def total_acceleration(p: PlantState, disturbances=()) -> np.ndarray:
    """Commanded acceleration plus the push acceleration at ``p.t``."""
    return np.array([a.acc for a in p.axes]) + external_acceleration(disturbances, p.t, p.mass)


def _push_increments(d: Disturbance, t0: float, T: float, mass: float):
    """Velocity and position increments from ``d`` over [t0, t0 + T)."""
    a = max(d.start, t0)
    b = min(d.end, t0 + T)
    if b <= a:
        return np.zeros(2), np.zeros(2)
    acc = np.array(d.force) / mass
    dv = acc * (b - a)
    # position picks up the velocity gained, integrated to the end of the sample
    dp = acc * ((t0 + T - a) ** 2 - (t0 + T - b) ** 2) / 2.0
    return dv, dp


def plant_step(p: PlantState, jerk, disturbances=(), T: float = 0.02) -> PlantState:
    if not T > 0.0:
        raise ValueError("T must be positive")
    A, B = transition_matrices(T)
    dv = np.zeros(2)
    dp = np.zeros(2)
    for d in disturbances:
        v, q = _push_increments(d, p.t, T, p.mass)
        dv += v
        dp += q
    axes = []
    for k in range(2):
        x = A @ p.axes[k].as_array() + B * float(jerk[k])
        x[0] += dp[k]
        x[1] += dv[k]
        axes.append(AxisState.from_array(x))
    return PlantState(axes, p.mass, p.t + T)


def noise_sample(n: NoiseSpec, cycle: int, size: int = 2) -> np.ndarray:
    """Truncated Gaussian draws for one cycle, reproducible per (seed, cycle)."""
    if n.sigma == 0.0 or n.bound == 0.0:
        return np.zeros(size)
    rng = np.random.default_rng((n.seed, cycle))
    return np.clip(rng.normal(0.0, n.sigma, size), -n.bound, n.bound)


def measure(p: PlantState, omega: float, n: NoiseSpec = NoiseSpec(), cycle: int = 0) -> np.ndarray:
    """Noisy ZMP of each axis, computed with natural frequency ``omega``."""
    zmp = np.array([a.pos - a.acc / omega**2 for a in p.axes])
    return zmp + noise_sample(n, cycle)
