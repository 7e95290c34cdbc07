"""Kalman filter for one horizontal axis, fusing noisy ZMP measurements."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .model import AxisState, DiscreteModel

DEFAULT_Q = np.diag([1e-8, 1e-6, 1e-4])
DEFAULT_R = 1e-4  # (0.01 m)^2


class EstimatorError(ArithmeticError):
    pass


def _symmetric(M):
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class KfState:
    x_hat: AxisState
    P: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    Q: np.ndarray = field(default_factory=lambda: DEFAULT_Q.copy())
    R: float = DEFAULT_R

    def __post_init__(self):
        for name in ("P", "Q"):
            M = np.asarray(getattr(self, name), dtype=float)
            if M.shape != (3, 3):
                raise ValueError(f"{name} must be 3x3")
            if not np.allclose(M, M.T, atol=1e-12, rtol=0.0):
                raise ValueError(f"{name} must be symmetric")
            if np.linalg.eigvalsh(M).min() < -1e-12:
                raise ValueError(f"{name} must be positive semidefinite")
            object.__setattr__(self, name, M)
        if not self.R > 0.0:
            raise ValueError("R must be positive")


def kf_predict(s: KfState, u: float, model: DiscreteModel) -> KfState:
    """Time update: x <- A x + B u, P <- A P A' + Q."""
    x = model.step(s.x_hat.as_array(), u)
    P = _symmetric(model.A @ s.P @ model.A.T + s.Q)
    return replace(s, x_hat=AxisState.from_array(x), P=P)


def kf_update(s: KfState, y_meas: float, omega_k: float) -> KfState:
    """Measurement update with the ZMP row C = [1, 0, -1/omega**2]."""
    C = np.array([1.0, 0.0, -1.0 / omega_k**2])
    x = s.x_hat.as_array()
    S = float(C @ s.P @ C + s.R)
    if not (np.isfinite(S) and S > 0.0):
        raise EstimatorError(f"innovation covariance is not positive: {S}")
    K = s.P @ C / S
    x = x + K * (y_meas - C @ x)
    # Joseph form keeps P positive semidefinite
    IKC = np.eye(3) - np.outer(K, C)
    P = _symmetric(IKC @ s.P @ IKC.T + s.R * np.outer(K, K))
    return replace(s, x_hat=AxisState.from_array(x), P=P)
