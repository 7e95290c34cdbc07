"""Dense strictly convex QP solver.

Solves

    minimize    1/2 z' H z + g' z
    subject to  Aineq z <= bineq

with the dual active-set method of Goldfarb and Idnani. The method starts at
the unconstrained minimizer and adds violated constraints one at a time while
keeping dual feasibility, so it needs no feasible initial point and reports
infeasibility when a violated constraint cannot be satisfied. Problems here are
tiny (a handful of variables, about a hundred rows), so the active-set
projections are recomputed from scratch instead of being updated.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

FEAS_TOL = 1e-8
KKT_TOL = 1e-8
DEP_TOL = 1e-18  # squared sine of the angle to the active span


class QpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITER = "max_iter"


@dataclass
class QpProblem:
    H: np.ndarray
    g: np.ndarray
    Aineq: np.ndarray = None
    bineq: np.ndarray = None

    def __post_init__(self):
        self.H = np.atleast_2d(np.asarray(self.H, dtype=float))
        self.g = np.atleast_1d(np.asarray(self.g, dtype=float))
        n = self.g.size
        if self.Aineq is None:
            self.Aineq = np.zeros((0, n))
            self.bineq = np.zeros(0)
        self.Aineq = np.asarray(self.Aineq, dtype=float).reshape(-1, n)
        self.bineq = np.atleast_1d(np.asarray(self.bineq, dtype=float))
        if self.H.shape != (n, n):
            raise ValueError(f"H has shape {self.H.shape}, expected {(n, n)}")
        if self.bineq.size != self.Aineq.shape[0]:
            raise ValueError("Aineq and bineq row counts differ")
        for name in ("H", "g", "Aineq", "bineq"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")

    @property
    def n(self) -> int:
        return self.g.size

    @property
    def m(self) -> int:
        return self.bineq.size

    def objective(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ self.H @ z + self.g @ z)


@dataclass
class QpSolution:
    z: np.ndarray
    status: QpStatus
    active_set: list = field(default_factory=list)
    multipliers: np.ndarray = None
    kkt_residual: float = np.inf
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is QpStatus.OPTIMAL


def kkt_residual(p: QpProblem, z, lam) -> float:
    """Largest violation among stationarity, feasibility and complementarity.

    ``lam`` holds one multiplier per inequality row (zero when inactive).
    """
    z = np.asarray(z, dtype=float)
    lam = np.asarray(lam, dtype=float)
    slack = p.Aineq @ z - p.bineq
    parts = [np.max(np.abs(p.H @ z + p.g + p.Aineq.T @ lam), initial=0.0)]
    if p.m:
        parts += [
            np.max(np.maximum(slack, 0.0)),
            np.max(np.maximum(-lam, 0.0)),
            np.max(np.abs(lam * slack)),
        ]
    return float(max(parts))


def solve(p: QpProblem, max_iter: int = 200) -> QpSolution:
    H, g = p.H, p.g
    n, m = p.n, p.m
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError as exc:
        raise ValueError("H must be symmetric positive definite") from exc
    Linv = np.linalg.solve(L, np.eye(n))

    # In w = L' z the Hessian is the identity. Rows become  Nt_j' w >= c_j
    # with unit-norm Nt_j (Nt = -Linv Aineq' / scale).
    Nt = -(Linv @ p.Aineq.T).T
    norms = np.linalg.norm(Nt, axis=1)
    norms[norms == 0.0] = 1.0
    Nt /= norms[:, None]
    c = -(p.bineq / norms)

    w = -Linv @ g
    active: list[int] = []
    u = np.zeros(0)
    status = QpStatus.MAX_ITER
    it = 0
    while it < max_iter:
        it += 1
        s = Nt @ w - c
        if m == 0 or s.min() >= -FEAS_TOL * 1e-2:
            status = QpStatus.OPTIMAL
            break
        q = int(np.argmin(s))
        nq = Nt[q]
        u_plus = np.append(u, 0.0)
        while True:
            if active:
                Q, R = np.linalg.qr(Nt[active].T)
                proj = Q.T @ nq
                step = nq - Q @ proj
                r = np.linalg.solve(R, proj)
            else:
                step = nq.copy()
                r = np.zeros(0)

            t1, k_drop = np.inf, -1
            with np.errstate(over="ignore"):  # tiny positive r_i only give huge ratios
                for i, ri in enumerate(r):
                    if ri > 0.0 and u_plus[i] / ri < t1:
                        t1, k_drop = u_plus[i] / ri, i

            curv = float(step @ step)
            dependent = len(active) >= n or curv <= DEP_TOL
            t2 = np.inf if dependent else -(float(nq @ w) - c[q]) / curv

            t = min(t1, t2)
            if not np.isfinite(t):
                return _finish(p, Linv.T @ w, active, u, QpStatus.INFEASIBLE, it, norms)

            u_plus[:-1] -= t * r
            u_plus[-1] += t
            if np.isfinite(t2):
                w = w + t * step
            if t2 <= t1:
                active.append(q)
                u = u_plus
                break
            del active[k_drop]
            u_plus = np.delete(u_plus, k_drop)
    return _finish(p, Linv.T @ w, active, u, status, it, norms)


def _finish(p, z, active, u, status, it, norms) -> QpSolution:
    lam = np.zeros(p.m)
    for idx, ui in zip(active, u):
        lam[idx] = max(ui, 0.0) / norms[idx]
    res = kkt_residual(p, z, lam)
    if status is QpStatus.OPTIMAL and res > KKT_TOL:
        z, lam = _refine(p, z, active, lam)
        res = kkt_residual(p, z, lam)
    return QpSolution(
        z=z,
        status=status,
        active_set=sorted(active),
        multipliers=lam,
        kkt_residual=res,
        iterations=it,
    )


def _refine(p: QpProblem, z, active, lam):
    """Re-solve the equality-constrained KKT system on the final active set."""
    n = p.n
    Aa = p.Aineq[active]
    k = len(active)
    K = np.zeros((n + k, n + k))
    K[:n, :n] = p.H
    K[:n, n:] = Aa.T
    K[n:, :n] = Aa
    rhs = np.concatenate([-p.g, p.bineq[active]])
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    lam = lam.copy()
    lam[active] = sol[n:]
    return sol[:n], lam
