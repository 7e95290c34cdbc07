"""Scenario configuration and its flat ``key = value`` text format."""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from ..sim import Disturbance, NoiseSpec


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to run one closed-loop walking scenario (SI units)."""

    name: str = "custom"
    step_width: float = 0.1
    step_length: float = 0.2
    t_ss: float = 1.5
    t_ds: float = 0.5
    foot_length: float = 0.075
    z_c0: float = 1.0
    a_ss: float = 0.0135
    a_ds: float = 0.00135
    delta_z_c: float = 0.0
    step_T: float = 0.02
    n_p: int = 50
    n_c: int = 2
    n_steps: int = 5
    stair_rise: float = 0.0
    lateral_advance: float = 0.1
    noise_bound: float = 0.0
    noise_sigma: float = 0.0
    disturbances: tuple = ()
    height_offset: float = 0.0
    seed: int = 0
    mass: float = 100.0
    jerk_max: float = 1.5
    jerk_rate_max: float = 0.1
    hold_rate_scale: float = 3.0
    rho: float = 1e-6
    compliance_margin: float = 0.02
    dcm_deadband: float = 0.025
    adjust_steps: bool = True
    # the plant has no process noise apart from pushes, so the filter trusts the model
    kf_q: tuple = (1e-12, 1e-10, 1e-8)
    kf_r: float = 1e-4

    def __post_init__(self):
        if self.n_steps < 1:
            raise ConfigError("n_steps must be at least 1")
        if abs(self.delta_z_c - self.stair_rise) > 1e-12:
            raise ConfigError(
                f"delta_z_c ({self.delta_z_c}) must equal stair_rise ({self.stair_rise}): "
                "the COM climbs exactly one stair per step"
            )
        for d in self.disturbances:
            if not isinstance(d, Disturbance):
                raise ConfigError(f"not a Disturbance: {d!r}")
        object.__setattr__(self, "disturbances", tuple(self.disturbances))
        q = tuple(float(v) for v in self.kf_q)
        if len(q) != 3 or min(q) < 0.0:
            raise ConfigError("kf_q needs three non-negative variances")
        object.__setattr__(self, "kf_q", q)
        if not self.kf_r > 0.0:
            raise ConfigError("kf_r must be positive")
        NoiseSpec(self.noise_bound, self.noise_sigma, self.seed)  # validates

    @property
    def noise(self) -> NoiseSpec:
        return NoiseSpec(self.noise_bound, self.noise_sigma, self.seed)

    @property
    def period(self) -> float:
        return self.t_ss + self.t_ds

    @property
    def duration(self) -> float:
        """Initial stance, the walking steps and one settling period."""
        return (self.n_steps + 2) * self.period

    @property
    def n_cycles(self) -> int:
        return int(round(self.duration / self.step_T))


_FIELDS = {f.name: f for f in fields(ScenarioConfig)}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_disturbance(text: str) -> Disturbance:
    """``"Fx, Fy, start, duration"`` -> :class:`Disturbance`."""
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 4:
        raise ConfigError(f"disturbance needs 'Fx, Fy, start, duration', got {text!r}")
    fx, fy, start, dur = (float(p) for p in parts)
    try:
        return Disturbance((fx, fy), start, dur)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _convert(key: str, text: str):
    f = _FIELDS[key]
    kind = f.type if isinstance(f.type, str) else f.type.__name__
    try:
        if kind == "bool":
            return _parse_bool(text)
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "tuple":
            return tuple(float(p) for p in text.replace(",", " ").split())
        return text.strip()
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc


def apply_overrides(cfg: ScenarioConfig, pairs) -> ScenarioConfig:
    """Apply ``(key, value_text)`` pairs.

    ``disturbance`` entries accumulate; ``disturbance = none`` clears the list.
    ``base`` is not accepted here (see :func:`load_config`).
    """
    changes = {}
    pushes = list(cfg.disturbances)
    touched_push = False
    for key, text in pairs:
        key = key.strip()
        if key == "disturbance":
            if not touched_push:
                pushes = []
                touched_push = True
            if text.strip().lower() != "none":
                pushes.append(parse_disturbance(text))
            continue
        if key not in _FIELDS or key == "disturbances":
            raise ConfigError(f"unknown config key {key!r}")
        changes[key] = _convert(key, text)
    if touched_push:
        changes["disturbances"] = tuple(pushes)
    if "stair_rise" in changes and "delta_z_c" not in changes:
        changes["delta_z_c"] = changes["stair_rise"]
    try:
        return replace(cfg, **changes)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def split_pair(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise ConfigError(f"expected key=value, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def parse_config_text(text: str, builtins=None) -> ScenarioConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    A ``base = <scenario>`` line starts from that built-in scenario instead of
    the defaults.
    """
    pairs = []
    base = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            key, value = split_pair(line)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
        if key == "base":
            base = value
        else:
            pairs.append((key, value))
    cfg = ScenarioConfig()
    if base is not None:
        builtins = builtins or {}
        if base not in builtins:
            raise ConfigError(f"unknown base scenario {base!r}")
        cfg = builtins[base]
    return apply_overrides(cfg, pairs)


def load_config(path, builtins=None) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    cfg = parse_config_text(text, builtins)
    if cfg.name == "custom":
        cfg = replace(cfg, name=path.stem)
    return cfg


def format_config(cfg: ScenarioConfig) -> str:
    """Inverse of :func:`parse_config_text` for a config without ``base``."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name == "disturbances":
            if not value:
                lines.append("disturbance = none")
            for d in value:
                lines.append(f"disturbance = {d.force[0]!r}, {d.force[1]!r}, {d.start!r}, {d.duration!r}")
            continue
        if isinstance(value, tuple):
            lines.append(f"{f.name} = " + ", ".join(repr(v) for v in value))
        elif isinstance(value, str):
            lines.append(f"{f.name} = {value}")
        else:
            lines.append(f"{f.name} = {value!r}")
    return "\n".join(lines) + "\n"
