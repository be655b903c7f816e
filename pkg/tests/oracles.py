"""Independent slow oracles used by the test suite.

Everything in here is deliberately written from scratch against textbook
definitions — none of it calls into the package's solver or projection
code — so that implementation and oracle can only agree by being right.
"""

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize


# ---------------------------------------------------------------------------
# reference projections (textbook formulas, independent of surfplan.cones)
# ---------------------------------------------------------------------------


def ref_project_soc(v):
    v = np.asarray(v, float)
    t, u = v[0], v[1:]
    nu = float(np.linalg.norm(u))
    if nu <= t:
        return v.copy()
    if nu <= -t:
        return np.zeros_like(v)
    a = 0.5 * (t + nu)
    return np.concatenate([[a], (a / nu) * u])


def exp_grid_project(v, iters=60):
    """2-D grid + refinement search over the exponential-cone boundary."""
    v = np.asarray(v, float)
    lo_a, hi_a, lo_b, hi_b = -8.0, 8.0, 1e-9, 8.0
    best = None
    for _ in range(iters):
        a = np.linspace(lo_a, hi_a, 121)
        b = np.linspace(lo_b, hi_b, 121)
        A, B = np.meshgrid(a, b)
        with np.errstate(over="ignore"):
            C = B * np.exp(A / B)
            d2 = np.where(
                np.isfinite(C), (A - v[0]) ** 2 + (B - v[1]) ** 2 + (C - v[2]) ** 2, np.inf
            )
        i = np.unravel_index(np.argmin(d2), d2.shape)
        best = (A[i], B[i], C[i], d2[i])
        da, db = (hi_a - lo_a) / 120, (hi_b - lo_b) / 120
        lo_a, hi_a = A[i] - 2 * da, A[i] + 2 * da
        lo_b, hi_b = max(B[i] - 2 * db, 1e-12), B[i] + 2 * db
    ray = np.array([min(v[0], 0.0), 0.0, max(v[2], 0.0)])
    dray = float(np.sum((ray - v) ** 2))
    if dray < best[3]:
        return ray
    return np.array(best[:3])


def _ref_project_product(r, cones):
    """Projection onto a product of zero/nonneg/soc blocks (no exp here)."""
    out = np.empty_like(r)
    off = 0
    for kind, dim in cones:
        seg = r[off : off + dim]
        if kind == "zero":
            out[off : off + dim] = 0.0
        elif kind == "nonneg":
            out[off : off + dim] = np.maximum(seg, 0.0)
        elif kind == "soc":
            out[off : off + dim] = ref_project_soc(seg)
        else:
            raise ValueError(kind)
        off += dim
    return out


# ---------------------------------------------------------------------------
# slow cone-program oracle: quadratic-penalty continuation
# ---------------------------------------------------------------------------


def penalty_oracle(c, A, b, cones, rho_max=1e9):
    """High-accuracy optimum of min c'x s.t. b - Ax in product cone.

    Minimizes c'x + (rho/2) * dist(b - Ax, K)^2 with the projection
    residual as the exact gradient, driving rho up geometrically while
    warm-starting.  The multiplier estimate rho*(r - P(r)) converges to
    the true dual variable, so the objective error shrinks like 1/rho.
    """
    c = np.asarray(c, float)
    A = np.asarray(A.todense() if sp.issparse(A) else A, float)
    b = np.asarray(b, float)

    def make_fun(rho):
        def fun(x):
            r = b - A @ x
            d = r - _ref_project_product(r, cones)
            return c @ x + 0.5 * rho * float(d @ d), c - rho * (A.T @ d)
        return fun

    x = np.zeros(c.shape[0])
    rho = 100.0
    while rho <= rho_max:
        res = minimize(make_fun(rho), x, jac=True, method="L-BFGS-B",
                       options={"maxiter": 20000, "ftol": 1e-18, "gtol": 1e-14})
        x = res.x
        rho *= 10.0
    return float(c @ x), x


# ---------------------------------------------------------------------------
# random bounded-and-feasible SOCP generator (known-structure, not known-value)
# ---------------------------------------------------------------------------


def random_socp(rng, max_vars=10):
    """Feasible, bounded SOCP: interior primal point and interior dual point
    are planted, which guarantees strong duality (Slater on both sides)."""
    n = int(rng.integers(2, max_vars + 1))
    cones = [("nonneg", int(rng.integers(1, 4)))]
    for _ in range(int(rng.integers(1, 3))):
        cones.append(("soc", int(rng.integers(2, 5))))
    if rng.random() < 0.5:
        cones.insert(0, ("zero", 1))
    m = sum(d for _, d in cones)
    A = rng.normal(size=(m, n))

    def interior(kind, dim):
        if kind == "zero":
            return np.zeros(dim)
        if kind == "nonneg":
            return rng.uniform(0.5, 1.5, dim)
        u = rng.normal(size=dim - 1)
        return np.concatenate([[np.linalg.norm(u) + rng.uniform(0.5, 1.5)], u])

    def interior_dual(kind, dim):
        if kind == "zero":
            return rng.normal(size=dim)  # dual of {0} is free
        return interior(kind, dim)

    s0 = np.concatenate([interior(k, d) for k, d in cones])
    y0 = np.concatenate([interior_dual(k, d) for k, d in cones])
    x0 = rng.normal(size=n)
    b = A @ x0 + s0
    c = -A.T @ y0
    return c, sp.csr_matrix(A), b, cones
