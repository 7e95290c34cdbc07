"""DCM-based adjustment of the pending step length."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class StepAdjustPolicy:
    """Dead-band and reachable limits for step adjustment.

    ``reach_x`` / ``reach_y`` bound the landing offset relative to the stance
    foot. ``keep_out_y`` is the minimum lateral clearance toward the stance
    foot: a landing on the left of the stance foot must be at least that far
    left of it, and the same on the right.

    ``dcm_deadband`` is the part of a DCM deviation that the controller is
    expected to absorb by moving the ZMP inside the stance foot; only the
    excess is extrapolated into a step change.
    """

    compliance_margin: float = 0.02
    reach_x: tuple = (-0.4, 0.4)
    reach_y: tuple = (-0.3, 0.3)
    keep_out_y: float = 0.05
    dcm_deadband: float = 0.025

    def __post_init__(self):
        if self.compliance_margin < 0.0:
            raise ValueError("compliance_margin must be non-negative")
        if self.dcm_deadband < 0.0:
            raise ValueError("dcm_deadband must be non-negative")
        for lo, hi in (self.reach_x, self.reach_y):
            if not lo < hi:
                raise ValueError("reachable box is empty")

    def reach(self, axis: int) -> tuple:
        return self.reach_x if axis == 0 else self.reach_y


def extrapolated_step(dcm: float, f_i: float, t: float, period: float,
                      omega: float) -> float:
    """Offset from ``f_i`` the DCM reaches at the end of the step.

    Assumes the ZMP stays at ``f_i`` for the remaining ``period - t`` seconds,
    during which the DCM diverges as ``exp(omega * remaining)``.
    """
    if not omega > 0.0:
        raise ValueError("omega must be positive")
    return (dcm - f_i) * math.exp(omega * (period - t))


def deadband(value: float, width: float) -> float:
    """Shrink ``value`` toward zero by ``width``, stopping at zero."""
    return math.copysign(max(abs(value) - width, 0.0), value)


def adjust_step(dcm: float, f_i: float, t: float, timing, omega: float,
                policy: StepAdjustPolicy, nominal: float, axis: int = 0) -> float:
    """Return the step length to use for the pending landing along ``axis``.

    Keeps ``nominal`` while the extrapolated DCM offset stays within the
    compliance margin of it; otherwise the extrapolated offset, saturated
    to the reachable box.
    """
    raw = extrapolated_step(dcm, f_i, t, timing.Tss + timing.Tds, omega)
    if abs(raw - nominal) <= policy.compliance_margin:
        return nominal
    lo, hi = policy.reach(axis)
    value = min(max(raw, lo), hi)
    if axis == 1 and policy.keep_out_y > 0.0 and nominal != 0.0:
        # stay on the swing foot's side of the stance foot
        if nominal > 0.0:
            value = max(value, policy.keep_out_y)
        else:
            value = min(value, -policy.keep_out_y)
    return value
