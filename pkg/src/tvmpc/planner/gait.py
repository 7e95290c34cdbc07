"""Gait timing, footstep schedule and the ZMP / vertical COM references.

Step ``i`` is single support (SS) on footstep ``s_i`` for ``Tss`` seconds,
followed by double support (DS) for ``Tds`` seconds while the ZMP moves to the
next anchor. The schedule stores the contact sequence
``[s_-1, s_0, s_1, ..., s_N]``: the first two entries are the feet the robot
stands on at start, the rest are landings. Step ``-1`` is the initial
standing period (ZMP at the midpoint of the starting feet, then shifting onto
``s_0``); steps at or past ``N`` are the final standing period at the midpoint
of the last two feet.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

SUPPORT_FRACTION = 0.9


class ScheduleExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class GaitTiming:
    Tss: float
    Tds: float
    t: float = 0.0

    def __post_init__(self):
        if not (self.Tss > 0.0 and self.Tds > 0.0):
            raise ValueError("Tss and Tds must be positive")

    @property
    def period(self) -> float:
        return self.Tss + self.Tds

    def in_ds(self, t: float | None = None) -> bool:
        t = self.t if t is None else t
        return t >= self.Tss


@dataclass(frozen=True)
class VerticalParams:
    z_c0: float
    A_ss: float = 0.0
    A_ds: float = 0.0
    delta_z_c: float = 0.0

    def __post_init__(self):
        if self.z_c0 <= abs(self.A_ss) + abs(self.A_ds) + abs(self.delta_z_c):
            raise ValueError("z_c0 must exceed |A_ss| + |A_ds| + |delta_z_c|")


@dataclass
class Footstep:
    x: float
    y: float
    z: float = 0.0

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])


def zmp_reference(t, timing: GaitTiming, f_i, step_length):
    """Piecewise ZMP reference within one step.

    Holds ``f_i`` during single support and ramps linearly to
    ``f_i + step_length`` during double support. Works element-wise, so both
    axes can be passed at once.
    """
    f_i = np.asarray(f_i, dtype=float)
    step_length = np.asarray(step_length, dtype=float)
    if t < timing.Tss:
        return f_i + 0.0 * step_length
    return f_i + (t - timing.Tss) / timing.Tds * step_length


def vertical_reference(t: float, timing: GaitTiming, vp: VerticalParams,
                       support_z: float = 0.0) -> tuple[float, float, float]:
    """COM height, vertical velocity and acceleration at phase time ``t``.

    Sinusoidal bump of amplitude ``A_ss`` over single support; over double
    support a bump of amplitude ``A_ds`` plus a linear climb of ``delta_z_c``.
    Heights are offset by the support surface the step started from.
    """
    base = support_z + vp.z_c0
    if t < timing.Tss:
        w = math.pi / timing.Tss
        return (
            base + vp.A_ss * math.sin(w * t),
            vp.A_ss * w * math.cos(w * t),
            -vp.A_ss * w * w * math.sin(w * t),
        )
    tau = t - timing.Tss
    w = math.pi / timing.Tds
    rate = vp.delta_z_c / timing.Tds
    return (
        base + vp.A_ds * math.sin(w * tau) + rate * tau,
        vp.A_ds * w * math.cos(w * tau) + rate,
        -vp.A_ds * w * w * math.sin(w * tau),
    )


@dataclass
class GaitSchedule:
    """Footstep contact sequence plus nominal gait geometry.

    ``step_index`` is the step currently being executed (``-1`` while the
    robot is still in its initial stance). ``final_stand`` appends an
    indefinite standing period after the last landing; without it, asking
    for a step past the end raises :class:`ScheduleExhausted`.
    """

    footsteps: list
    step_length: float
    step_width: float
    foot_length: float
    step_index: int = -1
    final_stand: bool = True
    nominal: list = field(default=None, repr=False)

    def __post_init__(self):
        if self.foot_length <= 0.0:
            raise ValueError("foot_length must be positive")
        if len(self.footsteps) < 2:
            raise ValueError("need at least the two initial footsteps")
        if self.nominal is None:
            self.nominal = [replace(f) for f in self.footsteps]

    @property
    def n_steps(self) -> int:
        return len(self.footsteps) - 2

    def support(self, i: int) -> Footstep:
        """Stance foot of step ``i`` (``-1`` is the first starting foot)."""
        return self.footsteps[i + 1]

    def _check(self, i: int):
        if i >= self.n_steps and not self.final_stand:
            raise ScheduleExhausted(
                f"step {i} requested but the schedule holds {self.n_steps} steps "
                f"(short by {i - self.n_steps + 1})"
            )

    def is_walking(self, i: int) -> bool:
        return 0 <= i < self.n_steps

    def anchor(self, i: int) -> np.ndarray:
        """ZMP target held during single support of step ``i``."""
        self._check(i)
        if i < 0:
            return 0.5 * (self.support(-1).xy + self.support(0).xy)
        if i >= self.n_steps:
            n = self.n_steps
            return 0.5 * (self.support(n - 1).xy + self.support(n).xy)
        return self.support(i).xy

    def surface_z(self, i: int) -> float:
        self._check(i)
        i = min(max(i, 0), self.n_steps)
        return self.support(i).z

    def landing_offset(self, i: int) -> np.ndarray:
        """Current vector from stance foot of step ``i`` to the next landing."""
        return self.support(i + 1).xy - self.support(i).xy

    def nominal_offset(self, i: int) -> np.ndarray:
        return self.nominal[i + 2].xy - self.nominal[i + 1].xy

    def shift_landing(self, i: int, new_offset) -> np.ndarray:
        """Move the landing of step ``i`` so it sits ``new_offset`` from the stance foot.

        Every later footstep moves by the same amount, so the remaining plan
        keeps its relative geometry. Returns the applied shift.
        """
        delta = np.asarray(new_offset, dtype=float) - self.landing_offset(i)
        if np.any(delta != 0.0):
            for f in self.footsteps[i + 2:]:
                f.x += float(delta[0])
                f.y += float(delta[1])
        return delta

    def half_box(self) -> float:
        return SUPPORT_FRACTION * self.foot_length / 2.0

    def bounds(self, i: int, in_ds: bool) -> tuple[np.ndarray, np.ndarray]:
        """Per-axis ZMP interval allowed during step ``i``.

        Single support: the stance foot's box shrunk to 90%. Double support
        and the standing periods: the interval hull of both feet's boxes.
        """
        self._check(i)
        h = self.half_box()
        n = self.n_steps
        if i < 0:
            feet = (self.support(-1), self.support(0))
        elif i >= n:
            feet = (self.support(n - 1), self.support(n))
        elif in_ds:
            feet = (self.support(i), self.support(i + 1))
        else:
            c = self.support(i).xy
            return c - h, c + h
        a, b = feet[0].xy, feet[1].xy
        return np.minimum(a, b) - h, np.maximum(a, b) + h

    def extend(self, count: int):
        """Append ``count`` steps repeating the last stride.

        The new foot lands on the same side as the second-to-last one, moved
        by the stride the last foot made.
        """
        if len(self.footsteps) < 3:
            raise ValueError("need at least one landing to repeat a stride")
        for _ in range(count):
            a, b, c = self.footsteps[-3:]
            new = Footstep(b.x + c.x - a.x, b.y + c.y - a.y, b.z + c.z - a.z)
            self.footsteps.append(new)
            self.nominal.append(replace(new))


def diagonal_schedule(n_steps: int, step_length: float, step_width: float,
                      foot_length: float, lateral_advance: float | None = None,
                      rise: float = 0.0) -> GaitSchedule:
    """Footsteps for a diagonal walk (optionally climbing stairs).

    Each landing advances ``step_length`` in x and alternates sides of a
    centerline that moves ``lateral_advance`` (default ``step_width``) per
    step. The robot starts on two feet at x = 0, ``step_width`` apart, with
    the right foot as the first stance foot. Landing ``k`` sits on the
    ``k``-th stair when ``rise`` is non-zero.
    """
    if n_steps < 1:
        raise ValueError("need at least one step")
    adv = step_width if lateral_advance is None else lateral_advance
    half = step_width / 2.0
    feet = [Footstep(0.0, half, 0.0), Footstep(0.0, -half, 0.0)]
    for k in range(1, n_steps + 1):
        side = 1.0 if k % 2 == 1 else -1.0
        feet.append(Footstep(k * step_length, k * adv + side * half, k * rise))
    return GaitSchedule(feet, step_length, step_width, foot_length)
