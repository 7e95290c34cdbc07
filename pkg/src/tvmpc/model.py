"""Linear inverted pendulum relations for one horizontal axis.

The COM of each horizontal axis is a triple integrator driven by jerk:

    X(k+1) = A X(k) + B u(k),   X = [pos, vel, acc],   u = jerk

and the measured output is the ZMP, ``p = pos - acc / omega**2``, with the
natural frequency ``omega = sqrt((g + zdd) / h)`` set by the COM height ``h``
above the support surface and the vertical COM acceleration ``zdd``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

GRAVITY = 9.81  # [m] / [s]^2


class ModelDomainError(ValueError):
    """Raised when pendulum parameters give no real natural frequency."""


@dataclass(frozen=True)
class AxisState:
    """COM position, velocity and acceleration along one axis."""

    pos: float = 0.0
    vel: float = 0.0
    acc: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.pos, self.vel, self.acc)):
            raise ValueError(f"non-finite axis state {self!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.pos, self.vel, self.acc])

    @classmethod
    def from_array(cls, x) -> "AxisState":
        x = np.asarray(x, dtype=float).reshape(3)
        return cls(float(x[0]), float(x[1]), float(x[2]))


@dataclass(frozen=True)
class PendulumParams:
    """Inputs to the natural frequency.

    Attributes:
        com_height_rel: COM height above the current support surface [m].
        com_vert_acc: vertical COM acceleration [m/s^2].
        gravity: gravitational acceleration [m/s^2].
    """

    com_height_rel: float
    com_vert_acc: float = 0.0
    gravity: float = GRAVITY


@dataclass(frozen=True)
class JerkCommand:
    jerk: float

    def __post_init__(self):
        if not math.isfinite(self.jerk):
            raise ValueError("jerk command must be finite")


def natural_frequency(params: PendulumParams) -> float:
    """Return omega = sqrt((g + zdd) / h) in rad/s."""
    h = params.com_height_rel
    num = params.gravity + params.com_vert_acc
    if not (math.isfinite(h) and h > 0.0):
        raise ModelDomainError(f"com_height_rel must be positive, got {h}")
    if not (math.isfinite(num) and num > 0.0):
        raise ModelDomainError(
            f"gravity + com_vert_acc must be positive, got "
            f"gravity={params.gravity}, com_vert_acc={params.com_vert_acc}"
        )
    return math.sqrt(num / h)


@dataclass(frozen=True)
class DiscreteModel:
    """Zero-order-hold discretization of the jerk-driven triple integrator.

    ``omega`` only enters through the output row ``C = [1, 0, -1/omega**2]``,
    so that ``C @ X`` is the ZMP.
    """

    step_T: float
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    omega: float

    @property
    def C(self) -> np.ndarray:
        return np.array([1.0, 0.0, -1.0 / self.omega**2])

    def step(self, x, u: float) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float) + self.B * u

    def output(self, x) -> float:
        return float(self.C @ np.asarray(x, dtype=float))


def transition_matrices(step_T: float) -> tuple[np.ndarray, np.ndarray]:
    T = step_T
    A = np.array([
        [1.0, T, T**2 / 2.0],
        [0.0, 1.0, T],
        [0.0, 0.0, 1.0],
    ])
    B = np.array([T**3 / 6.0, T**2 / 2.0, T])
    return A, B


def discretize(step_T: float, omega: float) -> DiscreteModel:
    if not step_T > 0.0:
        raise ValueError(f"step_T must be positive, got {step_T}")
    if not omega > 0.0:
        raise ValueError(f"omega must be positive, got {omega}")
    A, B = transition_matrices(step_T)
    return DiscreteModel(step_T=step_T, A=A, B=B, omega=float(omega))


def zmp_of_state(s: AxisState, omega: float) -> float:
    """ZMP implied by the COM state: pos - acc / omega**2."""
    return s.pos - s.acc / omega**2


def dcm_of_state(s: AxisState, omega: float) -> float:
    """Divergent component of motion: pos + vel / omega."""
    return s.pos + s.vel / omega
