"""Closed-loop driver: plant, noisy ZMP measurement, Kalman filter and planner.

Each cycle: measure -> filter update -> control step -> plant step ->
filter predict -> advance the gait clock.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..estimator import KfState, kf_predict, kf_update
from ..model import AxisState, discretize
from ..planner.gait import GaitTiming, ScheduleExhausted, VerticalParams, diagonal_schedule
from ..planner.horizon import InputLimits, sample_phase
from ..planner.mpc import MpcSettings, Tvmpc
from ..planner.stepping import StepAdjustPolicy
from ..prediction import HorizonDims
from ..sim import PlantState, measure, plant_step
from .config import ScenarioConfig

VIOLATION_TOL = 1e-8
# DCM this far from every contact foot counts as a fall and ends the run
FALL_DISTANCE = 1.0
AXES = ("x", "y")

COLUMNS = (
    "t", "step", "phase",
    *[f"{k}_{a}" for a in AXES for k in (
        "zmp_ref", "zmp_true", "zmp_meas", "zmp_lo", "zmp_hi",
        "pos", "vel", "acc", "dcm", "jerk",
    )],
    "z_ref", "qp_status", "slack",
    "support_x", "support_y", "landing_x", "landing_y", "adjusted",
)


@dataclass
class Trace:
    columns: tuple = COLUMNS
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def __len__(self):
        return len(self.rows)


@dataclass
class Metrics:
    max_track_err: tuple = (0.0, 0.0)
    violations: int = 0
    slack_cycles: int = 0
    max_dcm_offset: float = 0.0
    completed: bool = False
    abort_row: int | None = None
    abort_reason: str = ""

    def __post_init__(self):
        if self.violations < 0 or self.slack_cycles < 0:
            raise ValueError("counts must be non-negative")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return format(v, ".9g")
    return str(v)


def trace_to_csv(trace: Trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(trace.columns)
    for r in trace.rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def emit_csv(trace: Trace, path) -> Path:
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(trace_to_csv(trace))
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc
    return path


def build_controller(cfg: ScenarioConfig) -> Tvmpc:
    sched = diagonal_schedule(cfg.n_steps, cfg.step_length, cfg.step_width, cfg.foot_length,
                              lateral_advance=cfg.lateral_advance, rise=cfg.stair_rise)
    timing = GaitTiming(cfg.t_ss, cfg.t_ds)
    vertical = VerticalParams(cfg.z_c0, cfg.a_ss, cfg.a_ds, cfg.delta_z_c)
    limits = InputLimits(-cfg.jerk_max, cfg.jerk_max, -cfg.jerk_rate_max, cfg.jerk_rate_max)
    settings = MpcSettings(
        dims=HorizonDims(cfg.n_p, cfg.n_c),
        step_T=cfg.step_T,
        rho=cfg.rho,
        limits=limits,
        hold_rate_scale=cfg.hold_rate_scale,
        adjust_steps=cfg.adjust_steps,
    )
    policy = StepAdjustPolicy(compliance_margin=cfg.compliance_margin, dcm_deadband=cfg.dcm_deadband)
    return Tvmpc(sched, timing, vertical, policy, settings)


def _nearest_support(sched, ph) -> np.ndarray:
    """Centers of the feet currently in contact."""
    i = ph.step_index
    n = sched.n_steps
    if i < 0:
        return np.array([sched.support(-1).xy, sched.support(0).xy])
    if i >= n:
        return np.array([sched.support(n - 1).xy, sched.support(n).xy])
    if ph.in_ds:
        return np.array([sched.support(i).xy, sched.support(i + 1).xy])
    return np.array([sched.support(i).xy])


def run_scenario(cfg: ScenarioConfig, max_cycles: int | None = None) -> tuple[Trace, Metrics]:
    ctl = build_controller(cfg)
    sched = ctl.schedule
    T = cfg.step_T
    start = sched.anchor(-1)
    plant = PlantState([AxisState(float(start[0])), AxisState(float(start[1]))], cfg.mass)
    kfs = [KfState(x_hat=a, Q=np.diag(cfg.kf_q), R=cfg.kf_r) for a in plant.axes]
    trace = Trace()
    m = Metrics()
    err = np.zeros(2)
    n_cycles = cfg.n_cycles if max_cycles is None else min(cfg.n_cycles, max_cycles)

    for k in range(n_cycles):
        t = k * T
        try:
            ph = ctl.phase()
            truth = sample_phase(ctl.clock, sched, ctl.timing, ctl.vertical,
                                 ctl.settings.gravity, cfg.height_offset)
            y = measure(plant, ph.omega, cfg.noise, k)
            kfs = [kf_update(kfs[a], y[a], ph.omega) for a in range(2)]
            out = ctl.control_step([s.x_hat for s in kfs])
        except (ScheduleExhausted, ArithmeticError, ValueError) as exc:
            m.abort_row, m.abort_reason = k, f"{type(exc).__name__}: {exc}"
            return trace, m

        zmp_true = np.array([a.pos - a.acc / truth.omega**2 for a in plant.axes])
        dcm = np.array([a.pos + a.vel / truth.omega for a in plant.axes])
        excess = np.maximum(ph.zmp_lo - zmp_true, zmp_true - ph.zmp_hi)
        if excess.max() > VIOLATION_TOL:
            m.violations += 1
        if out.slack_used:
            m.slack_cycles += 1
        err = np.maximum(err, np.abs(zmp_true - ph.zmp_ref))
        m.max_track_err = (float(err[0]), float(err[1]))
        feet = _nearest_support(sched, ph)
        offset = float(np.min(np.linalg.norm(feet - dcm, axis=1)))
        m.max_dcm_offset = max(m.max_dcm_offset, offset)

        landing = out.landing if out.landing is not None else np.full(2, np.nan)
        support = sched.anchor(ph.step_index)
        label = "ds" if ph.in_ds else "ss"
        row = [t, ph.step_index, label if ph.walking else "stand"]
        for a in range(2):
            s = plant.axes[a]
            row += [ph.zmp_ref[a], zmp_true[a], y[a], ph.zmp_lo[a], ph.zmp_hi[a],
                    s.pos, s.vel, s.acc, dcm[a], out.jerk[a]]
        row += [ph.z, out.status.value, max(ax.slack for ax in out.axes),
                support[0], support[1], landing[0], landing[1], bool(out.adjusted)]
        trace.rows.append(tuple(row))

        plant = plant_step(plant, out.jerk, cfg.disturbances, T)
        model = discretize(T, ph.omega)
        kfs = [kf_predict(kfs[a], out.jerk[a], model) for a in range(2)]
        ctl.advance()
        if not all(np.all(np.isfinite(a.as_array())) for a in plant.axes):
            m.abort_row, m.abort_reason = k, "non-finite plant state"
            return trace, m
        if offset > FALL_DISTANCE:
            m.abort_row, m.abort_reason = k, f"fell: DCM {offset:.3f} m from the nearest contact foot"
            return trace, m

    m.completed = True
    return trace, m
