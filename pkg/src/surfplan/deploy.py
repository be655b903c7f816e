"""Deployment planning: the outer successive-approximation loop.

Each start draws a random phase iterate, then alternates between building
the convex surrogate subproblem around the current iterate and solving it
(with the surface-mode indicators integral).  The loop's iterate is the
raw solver phase vector; only after the loop does it get normalized to
unit modulus and split into per-surface profiles.  All reported rates are
recomputed from the normalized plan by the exact evaluator, never taken
from the solver's internal objective.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .channel import ChannelSet
from .cones import nonneg
from .conic import INFEASIBLE, OPTIMAL, UNBOUNDED, ConicProblem, solve_conic
from .mip import solve_mi_conic
from .radio import Allocation, PlanScore, SurfacePlan, evaluate_plan, snr
from .subproblem import MIN_OMEGA, PhaseIterate, build_subproblem

_ZERO_PHASE_TOL = 1e-9     # |z| below this keeps phase 0 by convention
_IMPROVE_TOL = 1e-9        # accepted steps may not decrease beyond this
_SHARED_DEV_TOL = 1e-4     # cross-user spread allowed on static profiles


@dataclass
class DeployConfig:
    """Knobs of the planning loop.

    ``budget`` caps how many surfaces may run reconfigurable.  The solver
    fields trade accuracy for wall-clock; defaults are the tight settings
    used by the shipped tests.  ``first_iter_max_iter`` optionally caps the
    opening subproblem: built around a random draw that no mode assignment
    can reproduce, it can sit in a stiff penalty regime where full
    convergence is slow and pointless — its solution only seeds the next
    expansion point, so a truncated relaxation solve is enough.
    """

    budget: int
    max_iters: int = 8
    omega: float = 100.0
    tau_min: float | None = None
    num_starts: int = 3
    seed: int = 0
    objective_tol: float = 1e-4
    slack_tol: float = 1e-6
    solver_tol: float = 1e-6
    solver_max_iter: int = 100_000
    first_iter_max_iter: int | None = None
    mip_gap: float = 1e-7
    node_limit: int = 50_000
    exhaustive_mip: bool = False
    measure_time: bool = False

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError("budget must be nonnegative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.omega < MIN_OMEGA:
            raise ValueError(f"omega must be at least {MIN_OMEGA}")
        if self.num_starts < 1:
            raise ValueError("num_starts must be at least 1")
        for name in ("objective_tol", "slack_tol", "solver_tol", "mip_gap"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass
class StartReport:
    """Everything one start produced, in iteration order."""

    start: int
    objective_trace: list = field(default_factory=list)
    slack_trace: list = field(default_factory=list)
    iteration_seconds: list = field(default_factory=list)
    status: str = ""
    solver_status: str = ""
    min_rate_bps: float = 0.0
    gamma: np.ndarray | None = None
    tau: np.ndarray | None = None
    alpha: np.ndarray | None = None
    wallclock_s: float = 0.0

    @property
    def iteration_count(self) -> int:
        return len(self.objective_trace)

    @property
    def final_objective(self) -> float:
        return self.objective_trace[-1] if self.objective_trace else float("nan")

    @property
    def max_slack(self) -> float:
        return self.slack_trace[-1] if self.slack_trace else float("nan")


@dataclass
class SolveReport:
    """All starts of one deployment run plus which one won."""

    budget: int
    starts: list
    best_start: int
    marginal_gain: float | None = None

    @property
    def best(self) -> StartReport:
        return self.starts[self.best_start]

    @property
    def min_rate_bps(self) -> float:
        return self.best.min_rate_bps

    @property
    def objective_trace(self) -> list:
        return self.best.objective_trace

    @property
    def slack_trace(self) -> list:
        return self.best.slack_trace

    @property
    def total_seconds(self) -> float:
        return float(sum(s.wallclock_s for s in self.starts))


def random_phase_iterate(channels: ChannelSet, seed) -> PhaseIterate:
    """Unit-modulus starting point with independent uniform phases."""
    rng = np.random.default_rng(seed)
    K = channels.num_ues
    LM = channels.num_surfaces * channels.num_elements
    return PhaseIterate(z=np.exp(2j * np.pi * rng.random((K, LM))))


def allocate_airtime(snrs: np.ndarray, bandwidth_hz: float, tau_min: float,
                     tol: float = 1e-9) -> np.ndarray:
    """Airtime shares maximizing the worst user's rate at fixed SNRs.

    With the SNRs pinned the per-user rate is linear in the share, so this
    is a small LP: max r subject to tau_k * B*log2(1+snr_k) >= r,
    sum tau <= 1, tau_k >= tau_min.
    """
    snrs = np.asarray(snrs, dtype=float)
    K = snrs.shape[0]
    if K == 0:
        return np.zeros(0)
    if not 0.0 <= tau_min * K <= 1.0 + 1e-12:
        raise ValueError(f"tau_min={tau_min} infeasible for {K} users")
    coef = bandwidth_hz * np.log2(1.0 + snrs)
    if np.any(coef <= 0.0):
        # a zero-SNR user pins the min rate at zero; split time evenly
        return np.full(K, 1.0 / K)

    # variables [r, tau_1..tau_K]
    rows, cols, vals = [], [], []
    for k in range(K):
        rows += [k, k]
        cols += [0, 1 + k]
        vals += [1.0, -coef[k]]
    rows += [K] * K
    cols += list(range(1, K + 1))
    vals += [1.0] * K
    A = sp.csc_matrix((vals, (rows, cols)), shape=(K + 1, K + 1))
    b = np.concatenate([np.zeros(K), [1.0]])
    c = np.zeros(K + 1)
    c[0] = -1.0
    lower = np.concatenate([[0.0], np.full(K, tau_min)])
    upper = np.concatenate([[np.inf], np.ones(K)])
    hint = np.concatenate([[max(float(np.median(coef)) / K, 1e-12)],
                           np.full(K, 1.0 / K)])
    p = ConicProblem(c=c, A=A, b=b, cones=[nonneg(K + 1)],
                     lower=lower, upper=upper, var_hint=hint)
    sol = solve_conic(p, tol=tol)
    if sol.status != OPTIMAL:
        raise RuntimeError(f"airtime allocation did not solve: {sol.status}")
    tau = np.clip(sol.x[1:], tau_min, 1.0)
    total = tau.sum()
    if total > 1.0:
        tau /= total
    return tau


def _round_pattern(alpha_vals: np.ndarray, budget: int) -> np.ndarray:
    """Nearest 0/1 pattern with at most ``budget`` ones."""
    pattern = (np.asarray(alpha_vals, dtype=float) >= 0.5).astype(int)
    if pattern.sum() > budget:
        order = np.argsort(-alpha_vals, kind="stable")
        pattern = np.zeros_like(pattern)
        pattern[order[:budget]] = 1
    return pattern


def _normalize(z: np.ndarray) -> np.ndarray:
    mag = np.abs(z)
    out = np.where(mag < _ZERO_PHASE_TOL, 1.0 + 0.0j, z / np.where(mag < _ZERO_PHASE_TOL, 1.0, mag))
    return out


def _finalize_start(channels: ChannelSet, z: np.ndarray, alpha_vals: np.ndarray,
                    cfg: DeployConfig, tau_min: float,
                    dev_tol: float) -> tuple[SurfacePlan, Allocation, PlanScore]:
    """Turn the raw solver iterate into a concrete scored plan."""
    K, L, M = channels.num_ues, channels.num_surfaces, channels.num_elements
    alpha = _round_pattern(alpha_vals, cfg.budget)
    zs = z.reshape(K, L, M) if L else z.reshape(K, 0, 0)

    theta = np.ones((L, M), dtype=complex)
    phi = np.ones((L, K, M), dtype=complex)
    for l in range(L):
        per_user = _normalize(zs[:, l, :])              # (K, M)
        phi[l] = per_user
        mean = zs[:, l, :].mean(axis=0)
        if alpha[l] == 0 and K > 1:
            dev = np.abs(zs[:, l, :] - mean[None, :]).max()
            if dev > dev_tol:
                raise RuntimeError(
                    f"static surface {l} got user-dependent phases (spread {dev:.2e})"
                )
        theta[l] = _normalize(mean)

    plan = SurfacePlan(alpha=alpha, theta=theta, phi=phi)
    gam = snr(channels, plan)
    tau = allocate_airtime(gam, channels.bandwidth_hz, tau_min)
    allocation = Allocation(tau=tau)
    score = evaluate_plan(channels, plan, allocation)
    return plan, allocation, score


def plan_deployment(
    channels: ChannelSet, cfg: DeployConfig
) -> tuple[SurfacePlan, Allocation, SolveReport]:
    """Full planning run: multi-start surrogate iteration, best start wins.

    Per start: draw a random unit-modulus iterate, then repeatedly solve
    the mixed-integer surrogate subproblem around the previous iterate.
    A step is accepted only if the penalized objective did not decrease;
    the loop stops early once the relative objective change drops below
    ``cfg.objective_tol`` with all slacks below ``cfg.slack_tol``.
    """
    K, L = channels.num_ues, channels.num_surfaces
    if cfg.budget > L:
        raise ValueError(f"budget {cfg.budget} exceeds the {L} candidate surfaces")
    tau_min = cfg.tau_min if cfg.tau_min is not None else 1.0 / (2 * K)
    dev_tol = max(_SHARED_DEV_TOL, 100.0 * cfg.solver_tol)
    clock = time.perf_counter if cfg.measure_time else (lambda: 0.0)

    reports: list[StartReport] = []
    finals = []
    for start in range(cfg.num_starts):
        rep = StartReport(start=start)
        z = random_phase_iterate(channels, np.random.SeedSequence((cfg.seed, start))).z
        warm = None
        pattern = None
        best_x = None
        best_lay = None
        prev_obj = None
        rep.status = "iteration_cap"
        for it in range(1, cfg.max_iters + 1):
            t0 = clock()
            problem, lay = build_subproblem(
                channels, cfg.budget, PhaseIterate(z), tau_min=tau_min, omega=cfg.omega
            )
            repair = cfg.first_iter_max_iter is not None and it == 1
            sol = solve_mi_conic(
                problem, lay.alpha, cfg.budget,
                tol=cfg.solver_tol,
                max_iter=cfg.first_iter_max_iter if repair else cfg.solver_max_iter,
                node_limit=1 if repair else cfg.node_limit,
                prune_gap=cfg.mip_gap,
                exhaustive=cfg.exhaustive_mip and not repair,
                warm=warm, warm_pattern=pattern,
            )
            if sol.status in (INFEASIBLE, UNBOUNDED):
                raise RuntimeError(
                    f"subproblem reported {sol.status}; the slack terms should "
                    "make every instance feasible and bounded"
                )
            rep.solver_status = sol.status
            obj = -sol.objective
            if prev_obj is not None and obj < prev_obj - _IMPROVE_TOL * max(1.0, abs(prev_obj)):
                # the step made things worse (only possible under loose
                # solves); keep the previous iterate and stop
                rep.status = "no_improvement"
                rep.iteration_seconds.append(clock() - t0)
                break
            smax = float(np.max(sol.x[lay.s], initial=0.0))
            rep.objective_trace.append(float(obj))
            rep.slack_trace.append(max(smax, 0.0))
            z = lay.extract_z(sol.x)
            best_x, best_lay = sol.x, lay
            warm = (sol.x, sol.info.get("y_ext"), sol.info.get("s_ext"))
            pattern = _round_pattern(sol.x[lay.alpha], cfg.budget)
            rep.iteration_seconds.append(clock() - t0)
            if prev_obj is not None:
                rel = abs(obj - prev_obj) / max(abs(prev_obj), 1e-12)
                if rel < cfg.objective_tol and smax < cfg.slack_tol:
                    rep.status = "converged"
                    prev_obj = obj
                    break
            prev_obj = obj

        t0 = clock()
        plan, allocation, score = _finalize_start(
            channels, z, best_x[best_lay.alpha], cfg, tau_min, dev_tol
        )
        rep.gamma = score.snr
        rep.tau = allocation.tau
        rep.alpha = plan.alpha
        rep.min_rate_bps = score.min_rate
        rep.iteration_seconds.append(clock() - t0)
        rep.wallclock_s = float(sum(rep.iteration_seconds))
        reports.append(rep)
        finals.append((plan, allocation))

    best = max(range(len(reports)), key=lambda i: (reports[i].min_rate_bps, -i))
    report = SolveReport(budget=cfg.budget, starts=reports, best_start=best)
    plan, allocation = finals[best]
    return plan, allocation, report


def sweep_budgets(channels: ChannelSet, budgets, cfg: DeployConfig) -> list[SolveReport]:
    """One full planning run per budget, sharing the channel set.

    Every entry gets its own independent start seeds (derived from the
    entry position, so repeated budgets stay statistically independent).
    Each report's ``marginal_gain`` holds the change in best min rate per
    unit of added budget relative to the previous entry.
    """
    budgets = [int(b) for b in budgets]
    if budgets != sorted(budgets):
        raise ValueError("budgets must be sorted ascending")
    out: list[SolveReport] = []
    for i, b in enumerate(budgets):
        entry_seed = int(np.random.SeedSequence((cfg.seed, i)).generate_state(1)[0])
        _, _, report = plan_deployment(channels, replace(cfg, budget=b, seed=entry_seed))
        if out:
            db = b - budgets[i - 1]
            dr = report.min_rate_bps - out[-1].min_rate_bps
            report.marginal_gain = dr / db if db else dr
        out.append(report)
    return out
