"""Preview of references, dynamics and ZMP bounds over the prediction horizon."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..model import PendulumParams, natural_frequency, GRAVITY
from ..prediction import HorizonDims
from .gait import GaitSchedule, GaitTiming, VerticalParams, vertical_reference, zmp_reference


@dataclass(frozen=True)
class InputLimits:
    """Jerk bounds and per-cycle jerk increment bounds [m/s^3]."""

    u_min: float = -1.5
    u_max: float = 1.5
    du_min: float = -0.1
    du_max: float = 0.1

    def __post_init__(self):
        if not (self.u_min < self.u_max and self.du_min < self.du_max):
            raise ValueError("input limits must satisfy min < max")


@dataclass(frozen=True)
class GaitClock:
    """Integer sample counter within the current step.

    Counting samples instead of accumulating seconds keeps the SS/DS
    switches on exact sample boundaries.
    """

    step_index: int
    tick: int
    ticks_ss: int
    ticks_ds: int
    step_T: float

    @classmethod
    def start(cls, timing: GaitTiming, step_T: float, step_index: int = -1) -> "GaitClock":
        n_ss = round(timing.Tss / step_T)
        n_ds = round(timing.Tds / step_T)
        if abs(n_ss * step_T - timing.Tss) > 1e-9 or abs(n_ds * step_T - timing.Tds) > 1e-9:
            raise ValueError("Tss and Tds must be whole multiples of the sample time")
        return cls(step_index, 0, n_ss, n_ds, step_T)

    @property
    def ticks_per_step(self) -> int:
        return self.ticks_ss + self.ticks_ds

    @property
    def t(self) -> float:
        return self.tick * self.step_T

    @property
    def in_ds(self) -> bool:
        return self.tick >= self.ticks_ss

    def advanced(self, n: int = 1) -> "GaitClock":
        total = self.tick + n
        steps, tick = divmod(total, self.ticks_per_step)
        return replace(self, step_index=self.step_index + steps, tick=tick)


@dataclass(frozen=True)
class PhaseSample:
    """Everything the planner needs about one time instant."""

    step_index: int
    t: float
    in_ds: bool
    walking: bool
    zmp_ref: np.ndarray
    zmp_lo: np.ndarray
    zmp_hi: np.ndarray
    z: float
    z_vel: float
    z_acc: float
    support_z: float
    omega: float


@dataclass
class HorizonPlan:
    """References and bounds for one axis over samples k+1 .. k+Np."""

    zmp_ref: np.ndarray
    omega: np.ndarray
    zmp_lo: np.ndarray
    zmp_hi: np.ndarray
    limits: InputLimits

    @property
    def u_min(self):
        return self.limits.u_min

    @property
    def u_max(self):
        return self.limits.u_max

    @property
    def du_min(self):
        return self.limits.du_min

    @property
    def du_max(self):
        return self.limits.du_max


def sample_phase(clock: GaitClock, sched: GaitSchedule, timing: GaitTiming,
                 vp: VerticalParams, gravity: float = GRAVITY,
                 height_offset: float = 0.0) -> PhaseSample:
    """Evaluate the gait references at ``clock``.

    While walking, the ZMP follows the piecewise reference between anchors
    and the COM height follows the sinusoidal vertical plan; the support
    height used for the pendulum length moves with the ZMP from one surface
    to the next during double support. Standing periods hold a fixed height.
    ``height_offset`` adds to the COM height (used to model a height error).
    """
    i, t, ds = clock.step_index, clock.t, clock.in_ds
    walking = sched.is_walking(i)
    a0 = sched.anchor(i)
    if i < 0:
        step = sched.anchor(0) - a0
    elif walking:
        step = sched.anchor(i + 1) - a0
    else:
        step = np.zeros(2)
    zmp = zmp_reference(t, timing, a0, step)
    lo, hi = sched.bounds(i, ds)

    h0 = sched.surface_z(i)
    if walking:
        h1 = sched.surface_z(i + 1)
        z, zd, zdd = vertical_reference(t, timing, replace(vp, delta_z_c=h1 - h0), h0)
        frac = (t - timing.Tss) / timing.Tds if ds else 0.0
        support_z = h0 + frac * (h1 - h0)
    else:
        z, zd, zdd = h0 + vp.z_c0, 0.0, 0.0
        support_z = h0
    z += height_offset
    omega = natural_frequency(PendulumParams(z - support_z, zdd, gravity))
    return PhaseSample(i, t, ds, walking, zmp, lo, hi, z, zd, zdd, support_z, omega)


def build_horizon(clock: GaitClock, sched: GaitSchedule, timing: GaitTiming,
                  vp: VerticalParams, dims: HorizonDims,
                  limits: InputLimits = InputLimits(),
                  gravity: float = GRAVITY) -> tuple[HorizonPlan, HorizonPlan]:
    """Per-axis horizon plans (x, y) for samples k+1 .. k+Np.

    Raises :class:`~tvmpc.planner.gait.ScheduleExhausted` when the horizon
    runs past a schedule without a final standing period.
    """
    Np = dims.Np
    ref = np.zeros((Np, 2))
    lo = np.zeros((Np, 2))
    hi = np.zeros((Np, 2))
    om = np.zeros(Np)
    for j in range(Np):
        ph = sample_phase(clock.advanced(j + 1), sched, timing, vp, gravity)
        ref[j], lo[j], hi[j], om[j] = ph.zmp_ref, ph.zmp_lo, ph.zmp_hi, ph.omega
    return tuple(
        HorizonPlan(ref[:, a].copy(), om.copy(), lo[:, a].copy(), hi[:, a].copy(), limits)
        for a in range(2)
    )
