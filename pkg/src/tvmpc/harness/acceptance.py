"""Acceptance checks shared by the ``verify`` command and the test-suite.

Each check returns a :class:`CriterionResult`; none of them raises on a
failed criterion, so a full table can always be printed.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from ..model import discretize
from ..planner.gait import diagonal_schedule
from ..prediction import HorizonDims, build_tv
from ..qp import QpProblem, QpStatus, solve
from .config import ScenarioConfig
from .runner import Trace, run_scenario, trace_to_csv
from .scenarios import PUSH_TIME, builtin_scenarios

NOISE_SEEDS = 20
DCM_NOISE_LIMIT = 0.25
DCM_RETURN_LIMIT = 0.1
DETECT_WINDOW = 0.2


@dataclass
class CriterionResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<22s} {self.seconds:6.1f}s  {self.detail}"


def _timed(name, fn):
    t0 = time.perf_counter()
    passed, detail = fn()
    return CriterionResult(name, bool(passed), detail, time.perf_counter() - t0)


# --- prediction -------------------------------------------------------------

def rollout(models, x0, u_prev, dU) -> np.ndarray:
    """Sequential simulation with held increments past the control horizon."""
    x = np.asarray(x0, dtype=float)
    u = float(u_prev)
    out = []
    for j, m in enumerate(models):
        if j < len(dU):
            u += dU[j]
        x = m.A @ x + m.B * u
        out.append(float(m.C @ x))
    return np.array(out)


def check_prediction(n: int = 1000, seed: int = 1) -> CriterionResult:
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n):
            Np = int(rng.integers(1, 11))
            Nc = int(rng.integers(1, Np + 1))
            models = [discretize(0.02, w) for w in rng.uniform(2.5, 4.0, Np)]
            pred = build_tv(models, HorizonDims(Np, Nc))
            x0 = rng.normal(size=3)
            u1 = rng.normal()
            dU = rng.normal(size=Nc)
            err = np.max(np.abs(pred.predict(x0, u1, dU) - rollout(models, x0, u1, dU)))
            worst = max(worst, float(err))
        return worst <= 1e-10, f"{n} instances, max |error| {worst:.2e} (limit 1e-10)"
    res = _timed("prediction_oracle", run)
    if res.seconds >= 5.0:
        res.passed = False
        res.detail += f"; too slow ({res.seconds:.1f}s >= 5s)"
    return res


# --- qp ---------------------------------------------------------------------

def random_box_qp(rng, n: int):
    """SPD Hessian with eigenvalues in [0.5, 5] and a random box."""
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    H = Q @ np.diag(rng.uniform(0.5, 5.0, n)) @ Q.T
    H = 0.5 * (H + H.T)
    g = rng.normal(scale=3.0, size=n)
    lo = rng.uniform(-1.0, 0.0, n)
    hi = lo + rng.uniform(0.1, 2.0, n)
    return H, g, lo, hi


def projected_gradient(H, g, lo, hi, tol: float = 1e-14, max_iter: int = 200000) -> np.ndarray:
    """Reference minimizer of a box QP by accelerated projected gradient."""
    step = 1.0 / np.linalg.eigvalsh(H).max()
    z = np.clip(np.zeros_like(g), lo, hi)
    y, t = z.copy(), 1.0
    for _ in range(max_iter):
        z_new = np.clip(y - step * (H @ y + g), lo, hi)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = z_new + (t - 1.0) / t_new * (z_new - z)
        if np.max(np.abs(z_new - z)) < tol:
            return z_new
        z, t = z_new, t_new
    return z


def check_qp(n: int = 200, seed: int = 2) -> CriterionResult:
    def run():
        rng = np.random.default_rng(seed)
        worst_kkt = worst_gap = 0.0
        bad = 0
        for _ in range(n):
            dim = int(rng.integers(1, 7))
            H, g, lo, hi = random_box_qp(rng, dim)
            I = np.eye(dim)
            sol = solve(QpProblem(H, g, np.vstack([I, -I]), np.concatenate([hi, -lo])))
            if sol.status is not QpStatus.OPTIMAL:
                bad += 1
                continue
            ref = projected_gradient(H, g, lo, hi)
            worst_kkt = max(worst_kkt, sol.kkt_residual)
            worst_gap = max(worst_gap, float(np.max(np.abs(sol.z - ref))))
        ok = bad == 0 and worst_kkt <= 1e-8 and worst_gap <= 1e-6
        return ok, (f"{n} problems, non-optimal {bad}, max KKT {worst_kkt:.1e} (limit 1e-8), "
                    f"max |z - z_ref| {worst_gap:.1e} (limit 1e-6)")
    res = _timed("qp_oracle", run)
    if res.seconds >= 10.0:
        res.passed = False
        res.detail += f"; too slow ({res.seconds:.1f}s >= 10s)"
    return res


# --- closed-loop helpers ----------------------------------------------------

def _walk_summary(m) -> str:
    s = "completed" if m.completed else f"aborted at row {m.abort_row} ({m.abort_reason})"
    return f"{s}, {m.violations} ZMP violations"


def jerk_limits_ok(trace: Trace, cfg: ScenarioConfig, tol: float = 1e-12) -> tuple[bool, float, float]:
    worst_u = worst_du = 0.0
    for ax in ("x", "y"):
        j = trace.column(f"jerk_{ax}")
        if not len(j):
            continue
        worst_u = max(worst_u, float(np.max(np.abs(j))))
        worst_du = max(worst_du, float(np.max(np.abs(np.diff(np.concatenate([[0.0], j]))))))
    ok = worst_u <= cfg.jerk_max + tol and worst_du <= cfg.jerk_rate_max + tol
    return ok, worst_u, worst_du


def ss_box_ok(trace: Trace, cfg: ScenarioConfig) -> bool:
    """Single-support rows use the 90% foot box around the stance foot."""
    half = 0.9 * cfg.foot_length / 2.0
    ss = np.array([r[2] == "ss" for r in trace.rows])
    walking = (trace.column("step") >= 0) & (trace.column("step") < cfg.n_steps)
    rows = ss & walking
    for ax in ("x", "y"):
        lo, hi = trace.column(f"zmp_lo_{ax}")[rows], trace.column(f"zmp_hi_{ax}")[rows]
        centre = trace.column(f"support_{ax}")[rows]
        if not (np.allclose(hi - centre, half, atol=1e-12) and np.allclose(centre - lo, half, atol=1e-12)):
            return False
    return True


def check_diagonal(cfg: ScenarioConfig | None = None) -> CriterionResult:
    cfg = cfg or builtin_scenarios()["diagonal"]

    def run():
        trace, m = run_scenario(cfg)
        steps_done = int(trace.column("step").max()) + 1 if len(trace) else 0
        lim_ok, u, du = jerk_limits_ok(trace, cfg)
        box = ss_box_ok(trace, cfg)
        ok = m.completed and steps_done >= cfg.n_steps and m.violations == 0 and lim_ok and box
        return ok, (f"{_walk_summary(m)}, steps {min(steps_done, cfg.n_steps)}/{cfg.n_steps}, "
                    f"max |jerk| {u:.3f}, max |rate| {du:.3f}, SS box {'ok' if box else 'wrong'}")
    res = _timed("diagonal_walk", run)
    if res.seconds >= 30.0:
        res.passed = False
        res.detail += f"; too slow ({res.seconds:.1f}s >= 30s)"
    return res


# --- stairs -----------------------------------------------------------------

def analytic_height(t: float, cfg: ScenarioConfig) -> float:
    """COM height plan written out directly from the gait timing."""
    period = cfg.t_ss + cfg.t_ds
    k = int(math.floor(t / period + 1e-9))
    tau = t - k * period
    if tau < 0.0:
        tau = 0.0
    i = k - 1  # step being executed; -1 is the initial stance
    if i < 0:
        return cfg.z_c0
    if i >= cfg.n_steps:
        return cfg.z_c0 + cfg.n_steps * cfg.stair_rise
    base = cfg.z_c0 + i * cfg.stair_rise
    if tau < cfg.t_ss:
        return base + cfg.a_ss * math.sin(math.pi * tau / cfg.t_ss)
    s = tau - cfg.t_ss
    return base + cfg.a_ds * math.sin(math.pi * s / cfg.t_ds) + cfg.delta_z_c * s / cfg.t_ds


def check_stairs(cfg: ScenarioConfig | None = None) -> CriterionResult:
    cfg = cfg or builtin_scenarios()["stairs"]

    def run():
        trace, m = run_scenario(cfg)
        t = trace.column("t")
        z = trace.column("z_ref")
        oracle = np.array([analytic_height(tk, cfg) for tk in t])
        gap = float(np.max(np.abs(z - oracle))) if len(t) else math.inf
        ok = m.completed and gap <= 1e-12 and m.violations == 0
        return ok, f"{_walk_summary(m)}, max |z_ref - analytic| {gap:.1e} (limit 1e-12)"
    res = _timed("stair_climb", run)
    if res.seconds >= 30.0:
        res.passed = False
        res.detail += f"; too slow ({res.seconds:.1f}s >= 30s)"
    return res


# --- noise ------------------------------------------------------------------

def check_noise(seeds: int = NOISE_SEEDS, cfg: ScenarioConfig | None = None) -> CriterionResult:
    cfg = cfg or builtin_scenarios()["noise_walk"]

    def run():
        fails, viol, worst_dcm = 0, 0, 0.0
        for s in range(seeds):
            _, m = run_scenario(replace(cfg, seed=s))
            fails += not m.completed
            viol += m.violations
            worst_dcm = max(worst_dcm, m.max_dcm_offset)
        ok = fails == 0 and viol == 0 and worst_dcm <= DCM_NOISE_LIMIT
        return ok, (f"{seeds} seeds, {seeds - fails} completed, {viol} ZMP violations in total, "
                    f"max DCM offset {worst_dcm:.3f} m (limit {DCM_NOISE_LIMIT})")
    return _timed("noise_robustness", run)


# --- height error -----------------------------------------------------------

HEIGHT_RUNS = ("height_p01", "height_m01", "height_p02", "height_m02")


def check_height() -> CriterionResult:
    sc = builtin_scenarios()

    def run():
        parts, ok = [], True
        for name in HEIGHT_RUNS:
            _, m = run_scenario(sc[name])
            ex, ey = m.max_track_err
            run_ok = m.completed and m.violations == 0 and ey > ex
            ok &= run_ok
            parts.append(f"{name}: {'done' if m.completed else 'aborted'}, {m.violations} viol, "
                         f"peak |zmp - ref| x {ex:.4f} y {ey:.4f}")
        return ok, "; ".join(parts)
    return _timed("height_error", run)


# --- push -------------------------------------------------------------------

PUSH_RUNS = ("push_p50", "push_m50", "push_p75", "push_m75")


def nominal_landings(cfg: ScenarioConfig) -> list:
    sched = diagonal_schedule(cfg.n_steps, cfg.step_length, cfg.step_width, cfg.foot_length,
                              lateral_advance=cfg.lateral_advance, rise=cfg.stair_rise)
    return [f.xy for f in sched.footsteps]


def push_response(trace: Trace, cfg: ScenarioConfig, impact: float = PUSH_TIME) -> dict:
    """Detection delay, landing shift and DCM return after a push."""
    t = trace.column("t")
    steps = trace.column("step").astype(int)
    land = np.column_stack([trace.column("landing_x"), trace.column("landing_y")])
    feet = nominal_landings(cfg)
    force = np.array(cfg.disturbances[0].force)
    out = {"detected": None, "shift": np.zeros(2), "final_offset": math.inf}
    margin = cfg.compliance_margin
    for k in np.where((t >= impact) & (t <= impact + DETECT_WINDOW + 1e-9))[0]:
        i = steps[k]
        if not (0 <= i < cfg.n_steps) or np.any(np.isnan(land[k])):
            continue
        shift = land[k] - feet[i + 2]
        signed = shift * np.sign(force)
        if np.any(np.abs(shift) > margin) and np.all(signed[np.abs(shift) > margin] > 0.0):
            out["detected"], out["shift"] = float(t[k] - impact), shift
            break
    period = cfg.t_ss + cfg.t_ds
    dcm = np.column_stack([trace.column("dcm_x"), trace.column("dcm_y")])
    centre = np.column_stack([trace.column("support_x"), trace.column("support_y")])
    # the DCM is judged where the second step after the impact ends
    window = np.where((t > impact) & (t <= impact + 2 * period + 1e-9))[0]
    if len(window):
        k = window[-1]
        out["final_offset"] = float(np.linalg.norm(dcm[k] - centre[k]))
    return out


def check_push() -> CriterionResult:
    sc = builtin_scenarios()

    def run():
        parts, ok = [], True
        for name in PUSH_RUNS:
            cfg = sc[name]
            trace, m = run_scenario(cfg)
            r = push_response(trace, cfg)
            returned = r["final_offset"] <= DCM_RETURN_LIMIT
            run_ok = m.completed and r["detected"] is not None and returned
            ok &= run_ok
            det = "no adjustment" if r["detected"] is None else f"adjusted after {r['detected']:.2f}s"
            parts.append(f"{name}: {'done' if m.completed else 'aborted'}, {det}, "
                         f"DCM offset two steps later {r['final_offset']:.3f} m")
        return ok, "; ".join(parts)
    return _timed("push_recovery", run)


# --- determinism ------------------------------------------------------------

def check_determinism(name: str = "push_m75", seed: int = 7) -> CriterionResult:
    cfg = replace(builtin_scenarios()[name], seed=seed)

    def run():
        a = trace_to_csv(run_scenario(cfg)[0]).encode()
        b = trace_to_csv(run_scenario(cfg)[0]).encode()
        return a == b, f"{name} seed {seed}: {len(a)} bytes, {'identical' if a == b else 'different'}"
    return _timed("determinism", run)


CRITERIA = {
    "prediction_oracle": check_prediction,
    "qp_oracle": check_qp,
    "diagonal_walk": check_diagonal,
    "stair_climb": check_stairs,
    "noise_robustness": check_noise,
    "height_error": check_height,
    "push_recovery": check_push,
    "determinism": check_determinism,
}


def run_all(names=None) -> list:
    names = list(CRITERIA) if names is None else list(names)
    return [CRITERIA[n]() for n in names]


def format_table(results) -> str:
    lines = [r.line() for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} criteria passed")
    return "\n".join(lines)
