"""Branch-and-bound over binary indicator variables of a conic program.

The continuous relaxations differ only in the box bounds of the binary
coordinates, so a single ConicWorkspace (one symbolic factorization) serves
every node; each node solve is warm-started from its parent's solution.
Best-first order with node-id tie-breaking makes runs deterministic.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .conic import (
    INFEASIBLE,
    MAX_ITER,
    OPTIMAL,
    UNBOUNDED,
    ConicProblem,
    ConicSolution,
    ConicWorkspace,
)

INTEGRALITY_TOL = 1e-6
DEFAULT_NODE_LIMIT = 50_000
DEFAULT_PRUNE_GAP = 1e-7
EXHAUSTIVE_LIMIT = 4096
_WARM_CACHE_LIMIT = 2000   # beyond this many queued nodes, drop warm tuples


@dataclass(order=True)
class MipNode:
    """One branch-and-bound node: a partial 0/1 assignment plus its bound.

    ``bound`` is the node's parent relaxation value in minimization sense,
    a valid lower bound on every completion of the partial assignment.
    """

    bound: float
    node_id: int
    fixed_zero: frozenset = field(compare=False)
    fixed_one: frozenset = field(compare=False)
    depth: int = field(compare=False, default=0)
    warm: tuple | None = field(compare=False, default=None, repr=False)


def _node_bounds(problem: ConicProblem, binary_idx, fixed_zero, fixed_one):
    lower = problem.lower.copy()
    upper = problem.upper.copy()
    for j in fixed_zero:
        upper[binary_idx[j]] = 0.0
    for j in fixed_one:
        lower[binary_idx[j]] = 1.0
    return lower, upper


def _fractionality(x: np.ndarray, binary_idx) -> np.ndarray:
    vals = x[binary_idx]
    return np.abs(vals - np.round(vals))


def _safe_bound(sol: ConicSolution) -> float:
    """Lower bound on the node's true optimum from a (possibly inexact) solve.

    An optimal-status solve is trusted as-is; an iteration-limited one is
    relaxed by its reported residuals so pruning never trusts noise.
    """
    if sol.status == OPTIMAL:
        return sol.objective
    slop = (sol.primal_res + sol.dual_res + sol.gap) * 10.0 * (1.0 + abs(sol.objective))
    if not math.isfinite(slop):
        return -math.inf
    return sol.objective - slop


def solve_mi_conic(
    problem: ConicProblem,
    binary_idx: np.ndarray,
    budget: int,
    *,
    tol: float = 1e-6,
    max_iter: int = 100_000,
    node_limit: int = DEFAULT_NODE_LIMIT,
    prune_gap: float = DEFAULT_PRUNE_GAP,
    exhaustive: bool = False,
    warm: tuple | None = None,
    warm_pattern: np.ndarray | None = None,
) -> ConicSolution:
    """Minimize a conic program with 0/1 constraints on ``binary_idx``.

    Every listed coordinate must carry a [0, 1] box in ``problem``; at most
    ``budget`` of them may be 1 (the corresponding linear row is expected in
    the problem data).  Returns the incumbent with binaries within
    INTEGRALITY_TOL of {0, 1}; ``info`` carries nodes / proven / bound and
    the usual warm-start fields.  ``warm`` seeds the root relaxation and
    ``warm_pattern`` (a 0/1 vector over the binaries) seeds the incumbent
    with one fixed-assignment solve before any branching.
    """
    binary_idx = np.asarray(binary_idx, dtype=np.intp)
    nb = binary_idx.size
    if not 0 <= budget <= max(nb, 0) + 0.5:
        raise ValueError(f"budget {budget} outside [0, {nb}]")
    if nb:
        if problem.lower is None or problem.upper is None:
            raise ValueError("binary coordinates require box bounds")
        lo = problem.lower[binary_idx]
        up = problem.upper[binary_idx]
        if np.any(lo < -1e-12) or np.any(up > 1.0 + 1e-12):
            raise ValueError("binary coordinates must carry [0, 1] boxes")

    ws = ConicWorkspace(problem)

    if exhaustive:
        return _solve_exhaustive(ws, problem, binary_idx, budget, tol, max_iter, warm)

    nodes_used = 0
    incumbent: ConicSolution | None = None

    def attempt_pattern(pattern: np.ndarray, seed: tuple | None) -> None:
        """Solve with all binaries pinned to a 0/1 pattern; keep if best."""
        nonlocal incumbent, nodes_used
        if pattern.sum() > budget + 0.5:
            return
        fz = frozenset(int(j) for j in np.flatnonzero(pattern < 0.5))
        fo = frozenset(int(j) for j in np.flatnonzero(pattern >= 0.5))
        lower, upper = _node_bounds(problem, binary_idx, fz, fo)
        ws.set_bounds(lower, upper)
        sol = ws.solve(tol=tol, max_iter=max_iter, warm=seed)
        nodes_used += 1
        if sol.status == OPTIMAL and (
            incumbent is None or sol.objective < incumbent.objective
        ):
            incumbent = sol

    if warm_pattern is not None and nb:
        attempt_pattern(np.asarray(warm_pattern, dtype=float), warm)

    # root relaxation
    ws.set_bounds(problem.lower, problem.upper)
    root = ws.solve(tol=tol, max_iter=max_iter, warm=warm)
    nodes_used += 1
    if root.status in (INFEASIBLE, UNBOUNDED):
        root.info.update(nodes=nodes_used, proven=True, bound=root.objective)
        return root

    heap: list[MipNode] = []
    next_id = 1
    root_node = MipNode(
        bound=_safe_bound(root), node_id=0,
        fixed_zero=frozenset(), fixed_one=frozenset(), depth=0,
    )
    frontier = [(root_node, root)]

    while frontier or heap:
        if frontier:
            node, sol = frontier.pop()
        else:
            if nodes_used >= node_limit:
                break
            node = heapq.heappop(heap)
            if incumbent is not None and node.bound >= incumbent.objective - prune_gap:
                continue
            lower, upper = _node_bounds(
                problem, binary_idx, node.fixed_zero, node.fixed_one
            )
            ws.set_bounds(lower, upper)
            sol = ws.solve(tol=tol, max_iter=max_iter, warm=node.warm)
            nodes_used += 1
            if sol.status in (INFEASIBLE, UNBOUNDED):
                continue
            node.bound = max(node.bound, _safe_bound(sol))
            if incumbent is not None and node.bound >= incumbent.objective - prune_gap:
                continue

        frac = _fractionality(sol.x, binary_idx) if nb else np.zeros(0)
        if nb:
            # never branch on an already-pinned coordinate, whatever an
            # inexact node solve reports for it
            for j in node.fixed_zero | node.fixed_one:
                frac[j] = 0.0
        if nb == 0 or frac.max() <= INTEGRALITY_TOL:
            if sol.status == OPTIMAL and (
                incumbent is None or sol.objective < incumbent.objective
            ):
                incumbent = sol
            elif sol.status != OPTIMAL and incumbent is None:
                # an inexact yet integral relaxation still beats no incumbent
                incumbent = sol
            continue

        j = int(np.argmax(frac))
        child_warm = (
            (sol.x, sol.info.get("y_ext"), sol.info.get("s_ext"))
            if len(heap) < _WARM_CACHE_LIMIT else None
        )
        down = MipNode(
            bound=node.bound, node_id=next_id,
            fixed_zero=node.fixed_zero | {j}, fixed_one=node.fixed_one,
            depth=node.depth + 1, warm=child_warm,
        )
        heapq.heappush(heap, down)
        next_id += 1
        if len(node.fixed_one) + 1 <= budget:
            up = MipNode(
                bound=node.bound, node_id=next_id,
                fixed_zero=node.fixed_zero, fixed_one=node.fixed_one | {j},
                depth=node.depth + 1, warm=child_warm,
            )
            heapq.heappush(heap, up)
            next_id += 1

    proven = not heap or (
        incumbent is not None
        and all(n.bound >= incumbent.objective - prune_gap for n in heap)
    )
    if incumbent is None:
        # no integral point found within the node limit: report the root
        # relaxation honestly (non-integral, flagged unproven)
        root.info.update(nodes=nodes_used, proven=False, bound=root.objective)
        return root
    incumbent.info.update(
        nodes=nodes_used, proven=bool(proven), bound=incumbent.objective
    )
    return incumbent


def _solve_exhaustive(ws, problem, binary_idx, budget, tol, max_iter, warm):
    """Enumerate every 0/1 pattern with at most ``budget`` ones."""
    nb = binary_idx.size
    count = sum(math.comb(nb, j) for j in range(int(budget) + 1))
    if count > EXHAUSTIVE_LIMIT:
        raise ValueError(
            f"{count} patterns exceed the exhaustive-mode limit {EXHAUSTIVE_LIMIT}"
        )
    best: ConicSolution | None = None
    seed = warm
    solved = 0
    for size in range(int(budget) + 1):
        for ones in itertools.combinations(range(nb), size):
            fo = frozenset(ones)
            fz = frozenset(range(nb)) - fo
            lower, upper = _node_bounds(problem, binary_idx, fz, fo)
            ws.set_bounds(lower, upper)
            sol = ws.solve(tol=tol, max_iter=max_iter, warm=seed)
            solved += 1
            if sol.status == OPTIMAL:
                seed = (sol.x, sol.info.get("y_ext"), sol.info.get("s_ext"))
                if best is None or sol.objective < best.objective:
                    best = sol
    if best is None:
        return ConicSolution(
            INFEASIBLE, np.full(problem.A.shape[1], np.nan), np.inf,
            np.nan, np.nan, np.nan, 0, info={"nodes": solved, "proven": True},
        )
    best.info.update(nodes=solved, proven=True, bound=best.objective)
    return best
