"""First-order conic solver.

Problems are given in the standard conic form

    minimize    c^T x
    subject to  A x + s = b,   s in K,   lo <= x <= hi (optional),

where K is an ordered product of zero / nonneg / soc / exp blocks (see
:mod:`surfplan.cones`).  Finite box bounds are translated into extra
nonnegative rows, so the solver core only ever sees the standard form.

The algorithm is operator splitting on the homogeneous self-dual
embedding: Douglas-Rachford alternation between one linear-system solve
with the skew-symmetric KKT operator and one projection onto the
embedding cone (free x dual-cone x nonneg ray), run as a fixed-point
iteration on the governing vector and sped up by safeguarded Anderson
acceleration.  The splitting runs in a diagonal metric whose primal and
dual block weights are rebalanced on the fly from the residual ratio;
the weights are kept reciprocal so one cached factorization serves
every balance.  Optimality, primal infeasibility, and unboundedness are
all read off the embedding: a normalized solution when the
homogenization variable stays positive, a certificate ray otherwise.
Fixed iteration order and a fixed sparse factorization make runs
bit-reproducible.

A :class:`ConicWorkspace` carries the (one-time) equilibration and the
sparse factorization; callers that repeatedly solve the same structure
with different right-hand sides or box bounds (branch-and-bound nodes)
reuse the workspace instead of refactoring.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .cones import BlockProjector, Cone, cone_dims, nonneg

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
MAX_ITER = "max_iter"

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 100_000

_AA_MEMORY = 10       # Anderson acceleration history length
_CHECK_EVERY = 25     # residual check interval
_RUIZ_SWEEPS = 15
_SCALE_SPREAD = 20.0
_REBALANCE_EVERY = 500   # min iterations between metric rebalances
_REBALANCE_GAP = 4.0     # primal/dual norm imbalance triggering a rebalance
_RELAXATION = 1.5        # over-relaxation of the splitting step


@dataclass
class ConicProblem:
    """Conic program data: min c^T x  s.t.  A x + s = b, s in cones, boxes.

    ``var_hint`` optionally gives the characteristic magnitude of each
    variable at the solution.  Equilibration only sees matrix entries, so
    when solution components span orders of magnitude (e.g. one variable
    lives near 1e3 and another near 1e-2) the hint restores a well-scaled
    iterate space.  Solutions are always reported in original units.
    """

    c: np.ndarray
    A: sp.spmatrix
    b: np.ndarray
    cones: list[Cone]
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    var_hint: np.ndarray | None = None

    @property
    def num_vars(self) -> int:
        return self.c.shape[0]

    @property
    def num_rows(self) -> int:
        return self.b.shape[0]

    def validate(self) -> None:
        c = np.asarray(self.c, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if c.ndim != 1 or b.ndim != 1:
            raise ValueError("c and b must be 1-D arrays")
        m, n = self.A.shape
        if n != c.shape[0]:
            raise ValueError(f"A has {n} columns but c has {c.shape[0]} entries")
        if m != b.shape[0]:
            raise ValueError(f"A has {m} rows but b has {b.shape[0]} entries")
        total = cone_dims(self.cones)
        if total != m:
            raise ValueError(f"cone dims sum to {total} but A has {m} rows")
        if not np.all(np.isfinite(c)):
            raise ValueError("c contains non-finite entries")
        if not np.all(np.isfinite(b)):
            raise ValueError("b contains non-finite entries")
        if not np.all(np.isfinite(self.A.data)):
            raise ValueError("A contains non-finite entries")
        for bound, name in ((self.lower, "lower"), (self.upper, "upper")):
            if bound is not None and bound.shape != (n,):
                raise ValueError(f"{name} bound must have shape ({n},)")
        if self.var_hint is not None:
            hint = np.asarray(self.var_hint, dtype=float)
            if hint.shape != (n,):
                raise ValueError(f"var_hint must have shape ({n},)")
            if not np.all(np.isfinite(hint)) or np.any(hint <= 0.0):
                raise ValueError("var_hint entries must be positive and finite")
        if self.lower is not None and self.upper is not None:
            both = np.isfinite(self.lower) & np.isfinite(self.upper)
            if np.any(self.lower[both] > self.upper[both]):
                j = int(np.argmax((self.lower > self.upper) & both))
                raise ValueError(f"lower[{j}] > upper[{j}]")


@dataclass
class ConicSolution:
    """Solver output: a point (or certificate ray) plus residuals."""

    status: str
    x: np.ndarray
    objective: float
    primal_res: float
    dual_res: float
    gap: float
    iterations: int
    y: np.ndarray | None = None
    s: np.ndarray | None = None
    info: dict = field(default_factory=dict)


def _row_block_slices(cones: list[Cone]) -> list[tuple[str, int, int]]:
    out, offset = [], 0
    for c in cones:
        out.append((c.kind, offset, offset + c.dim))
        offset += c.dim
    return out


def _segment_max(data: np.ndarray, indices: np.ndarray, indptr: np.ndarray,
                 weights: np.ndarray, nseg: int) -> np.ndarray:
    """max over CSR/CSC segments of |data| * weights[indices]; 0 for empty."""
    vals = np.abs(data) * weights[indices]
    out = np.zeros(nseg)
    starts = indptr[:-1]
    ends = indptr[1:]
    nonempty = starts < ends
    if np.any(nonempty):
        segmax = np.maximum.reduceat(vals, starts[nonempty])
        out[nonempty] = segmax
    return out


class ConicWorkspace:
    """Equilibrated, factored view of one problem structure.

    Box bounds and b may be updated between solves (values only — the
    sparsity pattern, cones, and c are fixed at construction), which is
    what lets branch-and-bound reuse one factorization across nodes.
    """

    def __init__(self, problem: ConicProblem):
        problem.validate()
        self._p = problem
        n = problem.num_vars
        c = np.asarray(problem.c, dtype=float).copy()

        # variable-magnitude hints: substitute x = S xhat so the iterate
        # space is O(1) per coordinate.  All internal data (including the
        # residual measures) live in hint units; reported solutions are
        # mapped back to original units.
        if problem.var_hint is not None:
            S = np.asarray(problem.var_hint, dtype=float).copy()
        else:
            S = np.ones(n)
        self._S = S
        c = c * S

        lower = problem.lower
        upper = problem.upper
        self._up_idx = (
            np.flatnonzero(np.isfinite(upper)) if upper is not None else np.empty(0, dtype=np.intp)
        )
        self._lo_idx = (
            np.flatnonzero(np.isfinite(lower)) if lower is not None else np.empty(0, dtype=np.intp)
        )
        nbox = self._up_idx.size + self._lo_idx.size

        blocks = [(problem.A @ sp.diags(S)).tocoo()]
        if nbox:
            rows = np.arange(nbox)
            cols = np.concatenate([self._up_idx, self._lo_idx])
            vals = np.concatenate([np.ones(self._up_idx.size), -np.ones(self._lo_idx.size)])
            blocks.append(sp.coo_matrix((vals, (rows, cols)), shape=(nbox, n)))
        A_ext = sp.vstack(blocks).tocoo() if nbox else blocks[0]
        cones_ext = list(problem.cones) + ([nonneg(nbox)] if nbox else [])
        m = A_ext.shape[0]

        # --- Ruiz equilibration with cone-block-uniform row scales -------
        # variable-magnitude hints seed the column scale; Ruiz refines on top
        D = np.ones(m)
        if problem.var_hint is not None:
            E = np.asarray(problem.var_hint, dtype=float).copy()
        else:
            E = np.ones(n)
        share = [(a, b2) for kind, a, b2 in _row_block_slices(cones_ext) if kind in ("soc", "exp")]
        csr = A_ext.tocsr()
        csc = A_ext.tocsc()
        abs_c = np.abs(c)
        for _ in range(_RUIZ_SWEEPS):
            r = D * _segment_max(csr.data, csr.indices, csr.indptr, E, m)
            for a, b2 in share:
                r[a:b2] = r[a:b2].max()
            r[r == 0.0] = 1.0
            D /= np.sqrt(r)
            # the cost row takes part in column equilibration so that a stiff
            # objective (e.g. a large penalty coefficient) cannot starve the
            # remaining directions after the c-norm normalization
            col = E * np.maximum(
                _segment_max(csc.data, csc.indices, csc.indptr, D, n), abs_c
            )
            col[col == 0.0] = 1.0
            E /= np.sqrt(col)
        # Confine both scale families to a bounded range around their medians.
        # Recovering a cone slack divides by D and reporting a variable
        # multiplies by E, so one extreme row or column scale would amplify
        # iterate error into exactly that row or column of the solution.
        # Clipping is pointwise monotone, so equal block scales stay equal.
        dmed = float(np.median(D))
        emed = float(np.median(E))
        np.clip(D, dmed / _SCALE_SPREAD, dmed * _SCALE_SPREAD, out=D)
        np.clip(E, emed / _SCALE_SPREAD, emed * _SCALE_SPREAD, out=E)
        self._D, self._E = D, E

        data = A_ext.data * D[A_ext.row] * E[A_ext.col]
        As = sp.csr_matrix((data, (A_ext.row, A_ext.col)), shape=A_ext.shape)
        self._As = As                      # scaled A
        self._AsT = As.T.tocsr()           # scaled A^T
        self._A_ext = A_ext.tocsr()        # unscaled, for residuals
        self._AT_ext = self._A_ext.T.tocsr()

        self._c = c
        self._cs = E * c
        self._rho_c = 1.0 / max(float(np.linalg.norm(self._cs)), 1e-9)
        self._cs = self._rho_c * self._cs

        gram = (self._AsT @ As).tocsc()
        eye = sp.identity(n, format="csc")
        self._factor = splu((eye + gram).tocsc())

        self._projector = BlockProjector(cones_ext)
        self._n, self._m = n, m
        self.set_b(problem.b, lower, upper)

    # -- value updates (structure stays fixed) ---------------------------

    def set_b(self, b: np.ndarray, lower: np.ndarray | None = None,
              upper: np.ndarray | None = None) -> None:
        """Install new right-hand side / box values (same finiteness pattern)."""
        parts = [np.asarray(b, dtype=float)]
        if self._up_idx.size or self._lo_idx.size:
            up = self._p.upper if upper is None else upper
            lo = self._p.lower if lower is None else lower
            parts.append(up[self._up_idx] / self._S[self._up_idx])
            parts.append(-lo[self._lo_idx] / self._S[self._lo_idx])
        b_ext = np.concatenate(parts) if len(parts) > 1 else parts[0]
        if not np.all(np.isfinite(b_ext)):
            raise ValueError("right-hand side contains non-finite entries")
        self._b_ext = b_ext
        bs = self._D * b_ext
        self._rho_b = 1.0 / max(float(np.linalg.norm(bs)), 1e-9)
        self._bs = self._rho_b * bs

    def set_bounds(self, lower: np.ndarray, upper: np.ndarray) -> None:
        self.set_b(self._p.b, lower, upper)

    # -- the splitting iteration -----------------------------------------

    def _metric(self, omega: float) -> tuple[np.ndarray, np.ndarray, float]:
        """Homogenization column for the metric diag(I/omega, omega I, 1).

        The product of the two block weights is one, so the cached
        factorization of I + A^T A serves every balance; changing omega
        costs two triangular solves and two matrix-vector products.
        """
        gx = self._factor.solve(self._AsT @ self._bs - omega * self._cs)
        gy = (self._As @ gx - self._bs) / omega
        den = 1.0 - float(self._cs @ gx + self._bs @ gy)
        return gx, gy, den

    def solve(self, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
              warm: tuple | None = None) -> ConicSolution:
        n, m = self._n, self._m
        cs, bs = self._cs, self._bs
        proj = self._projector

        omega = 1.0
        gx, gy, den = self._metric(omega)

        # Douglas-Rachford governing vector eta = (x, y, tau) block; the
        # iterate itself is u = Pi_C(eta), v = Pi_C(eta) - eta.  Every map
        # involved is positively homogeneous, so eta is kept on the unit
        # sphere: solutions and certificates are rays, and normalizing rules
        # out drift toward the trivial zero fixed point.
        sy = slice(n, n + m)
        eta = np.zeros(n + m + 1)
        eta[-1] = 1.0
        if warm is not None:
            wx, wy, ws = warm
            if wx is not None:
                eta[:n] = self._rho_b * (wx / (self._S * self._E))
            if wy is not None:
                eta[sy] = self._rho_c * (wy / self._D)
            if ws is not None:
                eta[sy] -= self._rho_b * (self._D * ws)
            eta /= np.linalg.norm(eta)

        dim = n + m + 1
        memory = _AA_MEMORY
        dF = np.zeros((dim, memory))
        dG = np.zeros((dim, memory))
        filled = 0
        ring = 0
        prev_f = prev_g = None
        revert = None
        base_normf = np.inf
        accelerated = False
        last_rebalance = 0

        it = 0
        while it < max_iter:
            it += 1
            # one plain splitting step from eta in the metric R:
            # g = eta + (R+Q)^{-1} R (2 Pi(eta) - eta) - Pi(eta)
            uy = proj.project_dual(eta[sy])
            utau = max(eta[-1], 0.0)
            ry = 2.0 * uy - eta[sy]
            rtau = 2.0 * utau - eta[-1]
            px = self._factor.solve(eta[:n] - omega * (self._AsT @ ry))
            py = ry + (self._As @ px) / omega
            th = (rtau + float(cs @ px + bs @ py)) / den
            a = _RELAXATION
            g = np.empty(dim)
            g[:n] = eta[:n] + a * ((px + th * gx) - eta[:n])
            g[sy] = eta[sy] + a * ((py + th * gy) - uy)
            g[-1] = eta[-1] + a * (th - utau)
            f = g - eta
            normf = float(np.linalg.norm(f))
            if not np.isfinite(normf):
                # numerical breakdown (e.g. an extreme accelerated point):
                # restart from the cold-start ray
                eta = np.zeros(dim)
                eta[-1] = 1.0
                filled = 0
                ring = 0
                prev_f = prev_g = None
                revert = None
                base_normf = np.inf
                accelerated = False
                continue

            if accelerated and normf > base_normf:
                # the accelerated point made the fixed-point residual worse:
                # fall back to the stored plain step and flush the memory
                eta = revert / float(np.linalg.norm(revert))
                filled = 0
                ring = 0
                prev_f = prev_g = None
                accelerated = False
                continue

            if it % _CHECK_EVERY == 0 or it == max_iter:
                result, pres, dres = self._check(
                    eta[:n], uy, utau, omega * (uy - eta[sy]), tol, it
                )
                if result is not None:
                    return result
                # when the primal and dual iterate norms drift far apart the
                # homogenization component is squeezed toward zero and the
                # unscaled residuals crawl; reweight the metric toward
                # balance (the factorization is unaffected, see _metric)
                if it - last_rebalance >= _REBALANCE_EVERY and it <= max_iter // 2:
                    nx = float(np.linalg.norm(eta[:n]))
                    ny = float(np.linalg.norm(uy))
                    if nx > 0.0 and ny > 0.0:
                        target = omega * ny / nx
                        if target > _REBALANCE_GAP or target < 1.0 / _REBALANCE_GAP:
                            new_omega = float(
                                np.clip(np.sqrt(omega * nx / ny), 1e-6, 1e6)
                            )
                            if new_omega != omega:
                                omega = new_omega
                                gx, gy, den = self._metric(omega)
                                last_rebalance = it
                                filled = 0
                                ring = 0
                                prev_f = prev_g = None
                                revert = None
                                base_normf = np.inf
                                accelerated = False
                                continue

            if prev_f is not None:
                dF[:, ring] = f - prev_f
                dG[:, ring] = g - prev_g
                ring = (ring + 1) % memory
                filled = min(filled + 1, memory)
            prev_f, prev_g = f, g
            revert = g
            base_normf = normf

            accelerated = False
            if filled:
                F = dF[:, :filled]
                FtF = F.T @ F
                lam = 1e-10 * np.trace(FtF) / filled + 1e-30
                try:
                    gamma = np.linalg.solve(FtF + lam * np.eye(filled), F.T @ f)
                    cand = g - dG[:, :filled] @ gamma
                except np.linalg.LinAlgError:
                    cand = None
                if cand is not None and np.all(np.isfinite(cand)):
                    eta = cand
                    accelerated = True
            if not accelerated:
                eta = g
            nrm = float(np.linalg.norm(eta))
            if nrm < 1e-14:
                eta = np.zeros(dim)
                eta[-1] = 1.0
                filled = 0
                ring = 0
                prev_f = prev_g = None
                accelerated = False
            else:
                eta = eta / nrm

        uy = proj.project_dual(eta[sy])
        utau = max(eta[-1], 0.0)
        x, y, s, obj, pres, dres, gap = self._recover(
            eta[:n], uy, utau, omega * (uy - eta[sy])
        )
        m_cut = self._p.num_rows
        return ConicSolution(
            MAX_ITER, x, obj, pres, dres, gap, max_iter,
            y=y[:m_cut], s=s[:m_cut], info={"y_ext": y, "s_ext": s},
        )

    # -- recovery, residuals, certificates --------------------------------

    def _unscale(self, ux, uy, vs, tau):
        x = self._E * ux / (self._rho_b * tau)
        y = self._D * uy / (self._rho_c * tau)
        s = vs / (self._D * self._rho_b * tau)
        return x, y, s

    def _recover(self, ux, uy, utau, vs):
        tau = utau if utau > 1e-12 else 1.0
        xh, y, s = self._unscale(ux, uy, vs, tau)
        obj = float(self._c @ xh)
        by = float(self._b_ext @ y)
        pres = np.linalg.norm(self._A_ext @ xh + s - self._b_ext) / (
            1.0 + np.linalg.norm(self._b_ext)
        )
        dres = np.linalg.norm(self._AT_ext @ y + self._c) / (1.0 + np.linalg.norm(self._c))
        gap = abs(obj + by) / (1.0 + abs(obj) + abs(by))
        return self._S * xh, y, s, obj, pres, dres, gap

    def _check(self, ux, uy, utau, vs, tol, it):
        """(solution or None, primal residual, dual residual)."""
        m_cut = self._p.num_rows
        pres = dres = None
        if utau > 1e-12:
            x, y, s, obj, pres, dres, gap = self._recover(ux, uy, utau, vs)
            if pres <= tol and dres <= tol and gap <= tol:
                sol = ConicSolution(
                    OPTIMAL, x, obj, pres, dres, gap, it,
                    y=y[:m_cut], s=s[:m_cut], info={"y_ext": y, "s_ext": s},
                )
                return sol, pres, dres

        # certificate rays (scaled back, homogeneous degree cancels)
        x_dir = self._E * ux
        s_dir = vs / self._D
        y_dir = self._D * uy
        ct = float(self._c @ x_dir)
        bt = float(self._b_ext @ y_dir)
        if ct < 0.0:
            unb_res = np.linalg.norm(self._A_ext @ x_dir + s_dir) / (-ct)
            if unb_res <= tol:
                x_cert = self._S * x_dir / (-ct)
                sol = ConicSolution(
                    UNBOUNDED, x_cert, -np.inf, unb_res, np.nan, np.nan, it,
                    s=(s_dir / (-ct))[:m_cut],
                )
                return sol, pres, dres
        if bt < 0.0:
            inf_res = np.linalg.norm(self._AT_ext @ y_dir) / (-bt)
            if inf_res <= tol:
                y_cert = y_dir / (-bt)
                sol = ConicSolution(
                    INFEASIBLE, np.full(self._n, np.nan), np.inf,
                    np.nan, inf_res, np.nan, it, y=y_cert[:m_cut],
                )
                return sol, pres, dres
        return None, pres, dres


def solve_conic(problem: ConicProblem, tol: float = DEFAULT_TOL,
                max_iter: int = DEFAULT_MAX_ITER, warm: tuple | None = None) -> ConicSolution:
    """Solve one conic program (factorization lives and dies with this call)."""
    return ConicWorkspace(problem).solve(tol=tol, max_iter=max_iter, warm=warm)
