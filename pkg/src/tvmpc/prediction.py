"""Condensed output prediction over the MPC horizon.

Two builders are provided:

* :func:`build_lti` returns ``(F, Phi)`` with ``Y = F x(k) + Phi U`` for a
  single time-invariant model, where ``U`` holds absolute jerk inputs.
* :func:`build_tv` returns ``(Sx, Su1, Su)`` with
  ``Y = Sx x(0) + Su1 u(-1) + Su dU`` for a sequence of per-sample models,
  where ``dU`` are input increments. This is the form the controller uses.

In both cases the last free input is held for samples past the control
horizon ``Nc``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import DiscreteModel


@dataclass(frozen=True)
class HorizonDims:
    Np: int
    Nc: int

    def __post_init__(self):
        if not (1 <= self.Nc <= self.Np):
            raise ValueError(f"need 1 <= Nc <= Np, got Np={self.Np}, Nc={self.Nc}")


@dataclass(frozen=True)
class LtiPrediction:
    F: np.ndarray
    Phi: np.ndarray

    def predict(self, x0, U) -> np.ndarray:
        return self.F @ np.asarray(x0, dtype=float) + self.Phi @ np.asarray(U, dtype=float)


@dataclass(frozen=True)
class TvPrediction:
    Sx: np.ndarray
    Su1: np.ndarray
    Su: np.ndarray

    def predict(self, x0, u_prev: float, dU) -> np.ndarray:
        return (
            self.Sx @ np.asarray(x0, dtype=float)
            + self.Su1 * u_prev
            + self.Su @ np.asarray(dU, dtype=float)
        )


def build_lti(model: DiscreteModel, dims: HorizonDims) -> LtiPrediction:
    Np, Nc = dims.Np, dims.Nc
    A, B, C = model.A, model.B, model.C
    F = np.zeros((Np, 3))
    markov = np.zeros(Np)  # C A^i B
    Ak = np.eye(3)
    for i in range(Np):
        markov[i] = C @ Ak @ B
        Ak = A @ Ak
        F[i] = C @ Ak
    Phi = np.zeros((Np, Nc))
    for i in range(Np):
        for j in range(min(i + 1, Nc)):
            Phi[i, j] = markov[i - j]
        if i >= Nc:
            # last input is held: it also drives samples Nc..i
            Phi[i, Nc - 1] += markov[: i - Nc + 1].sum()
    return LtiPrediction(F=F, Phi=Phi)


def build_tv(models: Sequence[DiscreteModel], dims: HorizonDims) -> TvPrediction:
    """Condensed prediction for x(j+1) = A_j x(j) + B_j u(j), y(j+1) = C_j x(j+1).

    ``models[j]`` propagates the state from sample j to j+1 and its output
    row is applied to the state it produces. ``u(j) = u(-1) + sum(dU[:j+1])``
    with increments past ``Nc`` fixed at zero.
    """
    Np, Nc = dims.Np, dims.Nc
    if len(models) != Np:
        raise ValueError(f"expected {Np} per-sample models, got {len(models)}")

    Sx = np.zeros((Np, 3))
    Su1 = np.zeros(Np)
    Su = np.zeros((Np, Nc))
    Phi_x = np.eye(3)
    G1 = np.zeros(3)
    G = np.zeros((3, Nc))
    for j, m in enumerate(models):
        Phi_x = m.A @ Phi_x
        G1 = m.A @ G1 + m.B
        G = m.A @ G
        G[:, : min(j + 1, Nc)] += m.B[:, None]
        C = m.C
        Sx[j] = C @ Phi_x
        Su1[j] = C @ G1
        Su[j] = C @ G
    return TvPrediction(Sx=Sx, Su1=Su1, Su=Su)
