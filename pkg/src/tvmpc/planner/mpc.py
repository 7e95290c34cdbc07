"""Receding-horizon controller: QP assembly and the per-cycle control step."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..model import AxisState, GRAVITY, dcm_of_state, discretize
from ..prediction import HorizonDims, TvPrediction, build_tv
from ..qp import QpProblem, QpSolution, QpStatus, solve
from .gait import GaitSchedule, GaitTiming, VerticalParams
from .horizon import GaitClock, HorizonPlan, InputLimits, build_horizon, sample_phase
from .stepping import StepAdjustPolicy, adjust_step, deadband

SLACK_WEIGHT = 1e6


def assemble_qp(pred: TvPrediction, plan: HorizonPlan, x_hat: AxisState,
                u_prev: float, rho: float = 1e-6,
                hold_rate_scale: float = 1.0) -> QpProblem:
    """Tracking QP in the jerk increments over the control horizon.

    Cost: sum of squared ZMP tracking errors plus ``rho * |dU|^2``.
    Rows, in order: ZMP upper bounds (Np), ZMP lower bounds (Np), cumulative
    jerk upper / lower bounds (Nc each), increment upper / lower bounds
    (Nc each).

    The first increment is the one applied this cycle and gets the plain
    per-cycle rate bound. Later increments set a jerk level that is then held
    for the rest of the horizon, while the real loop can keep ramping toward
    it every cycle; ``hold_rate_scale`` widens their bound accordingly
    (1 gives every move the same bound).
    """
    Su = pred.Su
    Np, Nc = Su.shape
    free = pred.Sx @ x_hat.as_array() + pred.Su1 * u_prev
    H = 2.0 * (Su.T @ Su + rho * np.eye(Nc))
    H = 0.5 * (H + H.T)
    g = 2.0 * Su.T @ (free - plan.zmp_ref)

    scale = np.full(Nc, float(hold_rate_scale))
    scale[0] = 1.0
    cum = np.tril(np.ones((Nc, Nc)))
    eye = np.eye(Nc)
    A = np.vstack([Su, -Su, cum, -cum, eye, -eye])
    b = np.concatenate([
        plan.zmp_hi - free,
        free - plan.zmp_lo,
        np.full(Nc, plan.u_max - u_prev),
        np.full(Nc, u_prev - plan.u_min),
        scale * plan.du_max,
        -scale * plan.du_min,
    ])
    return QpProblem(H, g, A, b)


def soften_zmp_rows(p: QpProblem, Np: int, weight: float = SLACK_WEIGHT) -> QpProblem:
    """Relax the 2*Np ZMP rows of ``p`` with one slack per horizon sample.

    Slack ``s_i >= 0`` widens both bounds of sample ``i`` and costs
    ``weight * (s_i**2 + s_i)``. The decision vector becomes ``[dU, s]``.
    """
    n = p.n
    H = np.zeros((n + Np, n + Np))
    H[:n, :n] = p.H
    H[n:, n:] = 2.0 * weight * np.eye(Np)
    g = np.concatenate([p.g, np.full(Np, weight)])
    A = np.hstack([p.Aineq, np.zeros((p.m, Np))])
    A[:Np, n:] = -np.eye(Np)
    A[Np:2 * Np, n:] = -np.eye(Np)
    A = np.vstack([A, np.hstack([np.zeros((Np, n)), -np.eye(Np)])])
    b = np.concatenate([p.bineq, np.zeros(Np)])
    return QpProblem(H, g, A, b)


def solve_axis(p: QpProblem, Np: int, slack_weight: float = SLACK_WEIGHT,
               max_iter: int = 200) -> tuple[QpSolution, float]:
    """Solve with hard ZMP rows, falling back to softened rows if infeasible.

    Returns the solution restricted to the jerk increments and the largest
    slack used (0 when the hard problem was solved).
    """
    sol = solve(p, max_iter)
    if sol.status is not QpStatus.INFEASIBLE:
        return sol, 0.0
    soft = solve(soften_zmp_rows(p, Np, slack_weight), max_iter)
    if soft.status is QpStatus.INFEASIBLE:
        return sol, 0.0
    n = p.n
    trimmed = QpSolution(
        z=soft.z[:n],
        status=soft.status,
        active_set=[i for i in soft.active_set if i < p.m],
        multipliers=soft.multipliers[: p.m],
        kkt_residual=soft.kkt_residual,
        iterations=soft.iterations,
    )
    return trimmed, float(np.max(soft.z[n:]))


@dataclass
class AxisOutput:
    jerk: float
    planned: AxisState
    dcm: float
    status: QpStatus
    slack: float
    predicted_zmp: np.ndarray = field(repr=False)
    plan: HorizonPlan = field(repr=False)


@dataclass
class ControlOutput:
    axes: tuple
    omega: float
    landing: np.ndarray
    adjusted: bool
    phase: object = field(repr=False)

    @property
    def jerk(self) -> np.ndarray:
        return np.array([a.jerk for a in self.axes])

    @property
    def dcm(self) -> np.ndarray:
        return np.array([a.dcm for a in self.axes])

    @property
    def status(self) -> QpStatus:
        worst = [a.status for a in self.axes]
        for s in (QpStatus.INFEASIBLE, QpStatus.MAX_ITER):
            if s in worst:
                return s
        return QpStatus.OPTIMAL

    @property
    def slack_used(self) -> bool:
        return any(a.slack > 0.0 for a in self.axes)


@dataclass
class MpcSettings:
    dims: HorizonDims = field(default_factory=lambda: HorizonDims(50, 2))
    step_T: float = 0.02
    rho: float = 1e-6
    limits: InputLimits = field(default_factory=InputLimits)
    hold_rate_scale: float = 3.0
    slack_weight: float = SLACK_WEIGHT
    max_iter: int = 200
    gravity: float = GRAVITY
    adjust_steps: bool = True


class Tvmpc:
    """Time-varying MPC walking planner for both horizontal axes.

    The instance owns the gait clock, the (mutable) footstep schedule and the
    last applied jerk. Call :meth:`control_step` once per cycle with the
    current state estimates, then :meth:`advance`.

    Step adjustment compares the estimated DCM with the DCM of an internal
    undisturbed copy of the model driven by the same jerk commands. The copy
    is re-synchronized to the estimate at the start of every step, so in
    nominal walking the deviation is only the estimation error picked up
    during the current step, and the ZMP feedback is assumed to absorb
    deviations up to the policy's dead-band.
    """

    def __init__(self, schedule: GaitSchedule, timing: GaitTiming,
                 vertical: VerticalParams, policy: StepAdjustPolicy = StepAdjustPolicy(),
                 settings: MpcSettings | None = None):
        self.schedule = schedule
        self.timing = timing
        self.vertical = vertical
        self.policy = policy
        self.settings = settings or MpcSettings()
        self.clock = GaitClock.start(timing, self.settings.step_T, schedule.step_index)
        self.u_prev = np.zeros(2)
        self._ref = None
        self._ref_step = None

    def phase(self, clock: GaitClock | None = None):
        return sample_phase(clock or self.clock, self.schedule, self.timing,
                            self.vertical, self.settings.gravity)

    def advance(self):
        self.clock = self.clock.advanced(1)
        self.schedule.step_index = self.clock.step_index

    def _sync_reference(self, estimates, ph):
        if self._ref is None or self._ref_step != ph.step_index:
            self._ref = [e.as_array() for e in estimates]
            self._ref_step = ph.step_index

    def dcm_deviation(self, estimates, omega: float) -> np.ndarray:
        """Estimated DCM minus the DCM of the undisturbed internal model."""
        return np.array([
            dcm_of_state(estimates[a], omega)
            - dcm_of_state(AxisState.from_array(self._ref[a]), omega)
            for a in range(2)
        ])

    def _adjust(self, estimates, ph) -> bool:
        """Update the pending landing; return True if it sits off nominal."""
        i = ph.step_index
        sched = self.schedule
        if not (self.settings.adjust_steps and ph.walking and not ph.in_ds):
            return False
        f_i = sched.support(i).xy
        nominal = sched.nominal_offset(i)
        dev = self.dcm_deviation(estimates, ph.omega)
        dev = np.array([deadband(d, self.policy.dcm_deadband) for d in dev])
        rem = self.timing.period - ph.t
        offset = np.empty(2)
        for a in range(2):
            # DCM that would end the step exactly on the nominal landing, plus the deviation
            zeta = f_i[a] + nominal[a] * np.exp(-ph.omega * rem) + dev[a]
            offset[a] = adjust_step(zeta, f_i[a], ph.t, self.timing, ph.omega,
                                    self.policy, nominal[a], axis=a)
        sched.shift_landing(i, offset)
        return bool(np.any(offset != nominal))

    def control_step(self, estimates) -> ControlOutput:
        s = self.settings
        ph = self.phase()
        self._sync_reference(estimates, ph)
        adjusted = self._adjust(estimates, ph)
        plans = build_horizon(self.clock, self.schedule, self.timing, self.vertical,
                              s.dims, s.limits, s.gravity)
        models = [discretize(s.step_T, w) for w in plans[0].omega]
        pred = build_tv(models, s.dims)
        here = discretize(s.step_T, ph.omega)

        axes = []
        for a in range(2):
            x_hat = estimates[a]
            p = assemble_qp(pred, plans[a], x_hat, self.u_prev[a], s.rho, s.hold_rate_scale)
            sol, slack = solve_axis(p, s.dims.Np, s.slack_weight, s.max_iter)
            dU = sol.z if sol.status is not QpStatus.INFEASIBLE else np.zeros(s.dims.Nc)
            du = min(max(float(dU[0]), s.limits.du_min), s.limits.du_max)
            jerk = min(max(self.u_prev[a] + du, s.limits.u_min), s.limits.u_max)
            x_next = here.step(x_hat.as_array(), jerk)
            self._ref[a] = here.step(self._ref[a], jerk)
            axes.append(AxisOutput(
                jerk=jerk,
                planned=AxisState.from_array(x_next),
                dcm=dcm_of_state(x_hat, ph.omega),
                status=sol.status,
                slack=slack,
                predicted_zmp=pred.predict(x_hat.as_array(), self.u_prev[a], dU),
                plan=plans[a],
            ))
            self.u_prev[a] = jerk
        landing = self.schedule.support(ph.step_index + 1).xy if ph.walking else None
        return ControlOutput(tuple(axes), ph.omega, landing, adjusted, ph)
