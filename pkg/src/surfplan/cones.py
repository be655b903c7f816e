"""Convex cone blocks and Euclidean projections onto them.

A cone program's constraint ``A x + s = b`` keeps its slack ``s`` inside a
product of primitive cones.  Four block kinds are supported:

* ``zero``    -- {0}^d, equality rows.
* ``nonneg``  -- componentwise nonnegative orthant of dimension d.
* ``soc``     -- second-order cone {(t, u) : ||u||_2 <= t}, d >= 2.
* ``exp``     -- exponential cone, the closure of
                 {(a, b, c) : b > 0, b * exp(a / b) <= c}, always dim 3.

Zero/NonNeg/SOC projections are closed-form.  The exponential cone is
projected by reducing the KKT conditions to a scalar root-finding problem
solved with a safeguarded (bracketed) Newton iteration; the companion
point in the polar cone comes out of the same root, which gives an exact
Moreau pair ``v = proj_K(v) + proj_polar(v)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, inf, isfinite, log
from typing import Iterable

import numpy as np

ZERO = "zero"
NONNEG = "nonneg"
SOC = "soc"
EXP = "exp"

# Bracket width below which the exponential-cone root search stops.
ROOT_TOL = 1e-12
# Relative slack used by the cone-membership shortcuts.
MEMBERSHIP_TOL = 1e-12


@dataclass(frozen=True)
class Cone:
    """One primitive cone block: a kind tag plus its dimension."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in (ZERO, NONNEG, SOC, EXP):
            raise ValueError(f"unknown cone kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError(f"cone dimension must be positive, got {self.dim}")
        if self.kind == SOC and self.dim < 2:
            raise ValueError(f"soc cone needs dim >= 2, got {self.dim}")
        if self.kind == EXP and self.dim != 3:
            raise ValueError(f"exp cone has dim 3, got {self.dim}")


def zero(dim: int) -> Cone:
    return Cone(ZERO, dim)


def nonneg(dim: int) -> Cone:
    return Cone(NONNEG, dim)


def soc(dim: int) -> Cone:
    return Cone(SOC, dim)


def expcone() -> Cone:
    return Cone(EXP, 3)


def cone_dims(cones: Iterable[Cone]) -> int:
    return sum(c.dim for c in cones)


# ---------------------------------------------------------------------------
# second-order cone
# ---------------------------------------------------------------------------


def _project_soc(v: np.ndarray) -> np.ndarray:
    t = v[0]
    u = v[1:]
    nu = np.linalg.norm(u)
    if nu <= t:
        return v.copy()
    if nu <= -t:
        return np.zeros_like(v)
    scale = 0.5 * (1.0 + t / nu)
    out = np.empty_like(v)
    out[0] = scale * nu
    out[1:] = scale * u
    return out


def project_soc_rows(V: np.ndarray) -> np.ndarray:
    """Project each row of V (shape n_blocks x d) onto the SOC, vectorized."""
    t = V[:, 0]
    nu = np.linalg.norm(V[:, 1:], axis=1)
    out = V.copy()
    interior = nu <= t
    flat = ~interior & (nu <= -t)
    boundary = ~interior & ~flat
    out[flat] = 0.0
    if np.any(boundary):
        nb = nu[boundary]
        scale = 0.5 * (1.0 + t[boundary] / nb)
        out[boundary, 0] = scale * nb
        out[boundary, 1:] = scale[:, None] * V[boundary, 1:]
    return out


# ---------------------------------------------------------------------------
# exponential cone
# ---------------------------------------------------------------------------


def _in_exp_primal(r: float, s: float, t: float) -> bool:
    if s < 0.0:
        return False
    if s == 0.0:
        return r <= 0.0 and t >= 0.0
    x = r / s
    if x > 700.0:  # s * e^x overflows; t is finite so the point is outside
        return False
    lhs = s * exp(x)
    return t - lhs >= -MEMBERSHIP_TOL * max(1.0, abs(t), lhs)


def _in_exp_polar(r: float, s: float, t: float) -> bool:
    # polar cone: cl{(u,v,w): u > 0, u*exp(v/u) <= -e*w} u {(0,v,w): v<=0, w<=0}
    if r < 0.0:
        return False
    if r == 0.0:
        return s <= 0.0 and t <= 0.0
    x = s / r
    if x > 700.0:
        return False
    lhs = r * exp(x)
    rhs = -np.e * t
    return rhs - lhs >= -MEMBERSHIP_TOL * max(1.0, abs(rhs), lhs)


def _safe_exp(x: float) -> float:
    return exp(x) if x < 709.0 else inf


def _exp_h(rho: float, r0: float, s0: float, t0: float) -> float:
    # Evaluated with overflow guards: for |rho| large one exponential
    # saturates to inf, and a zero coefficient must win over it (the exact
    # product is zero at every finite rho).
    lin_p = (rho - 1.0) * r0 + s0
    lin_d = r0 - rho * s0
    ep = _safe_exp(rho)
    en = _safe_exp(-rho)
    t1 = lin_p * ep if lin_p != 0.0 else 0.0
    t2 = lin_d * en if lin_d != 0.0 else 0.0
    return t1 - t2 - (rho * (rho - 1.0) + 1.0) * t0


def _exp_root(r0: float, s0: float, t0: float, lo: float, hi: float,
              rho0: float | None = None) -> float:
    """Safeguarded Newton for the root of h on [lo, hi] with h(lo)<0<h(hi).

    An optional initial guess (e.g. the root found for a nearby point)
    replaces the midpoint start; convergence is then typically two or three
    steps, with bisection still catching any wayward Newton update.
    """
    if rho0 is not None and lo < rho0 < hi:
        rho = rho0
    else:
        rho = 0.5 * (lo + hi)
    for _ in range(200):
        lin_p = (rho - 1.0) * r0 + s0
        lin_d = r0 - rho * s0
        ep = _safe_exp(rho)
        en = _safe_exp(-rho)
        t1 = lin_p * ep if lin_p != 0.0 else 0.0
        t2 = lin_d * en if lin_d != 0.0 else 0.0
        f = t1 - t2 - (rho * (rho - 1.0) + 1.0) * t0
        if f == 0.0:
            return rho
        if f < 0.0:
            lo = rho
        else:
            hi = rho
        if hi - lo <= ROOT_TOL * max(1.0, abs(lo), abs(hi)):
            break
        dp = rho * r0 + s0
        dd = r0 + s0 - rho * s0
        df = ((dp * ep if dp != 0.0 else 0.0)
              + (dd * en if dd != 0.0 else 0.0)
              - (2.0 * rho - 1.0) * t0)
        step_ok = False
        if isfinite(df) and df > 0.0 and isfinite(f):
            cand = rho - f / df
            if lo < cand < hi:
                if abs(cand - rho) <= ROOT_TOL * max(1.0, abs(cand)):
                    return cand
                rho = cand
                step_ok = True
        if not step_ok:
            rho = 0.5 * (lo + hi)
    return 0.5 * (lo + hi)


def _exp_bracket(r0: float, s0: float, t0: float) -> tuple[float, float]:
    """Sign-change bracket for h.

    At the root both (rho-1)*r0 + s0 and r0 - rho*s0 are nonnegative, which
    bounds rho whenever r0 or s0 is positive; missing ends are found by
    geometric expansion (h -> +inf as rho -> inf when r0 > 0, and
    h -> -inf as rho -> -inf when s0 > 0).
    """
    lo, hi = -inf, inf
    if r0 > 0.0:
        lo = 1.0 - s0 / r0
    elif r0 < 0.0:
        hi = 1.0 - s0 / r0
    if s0 > 0.0:
        hi = min(hi, r0 / s0)
    elif s0 < 0.0:
        lo = max(lo, r0 / s0)

    if lo == -inf:
        step = 1.0 + abs(hi) if hi != inf else 1.0
        lo = (hi if hi != inf else 0.0) - step
        while _exp_h(lo, r0, s0, t0) >= 0.0:
            step *= 2.0
            lo -= step
    if hi == inf:
        step = 1.0 + abs(lo)
        hi = lo + step
        while _exp_h(hi, r0, s0, t0) <= 0.0:
            step *= 2.0
            hi += step

    # Degenerate brackets (root at an endpoint) still need ordered signs.
    if _exp_h(lo, r0, s0, t0) > 0.0:
        hi = lo
        step = 1.0 + abs(lo)
        lo -= step
        while _exp_h(lo, r0, s0, t0) >= 0.0 and step < 1e30:
            step *= 2.0
            lo -= step
    elif _exp_h(hi, r0, s0, t0) < 0.0:
        lo = hi
        step = 1.0 + abs(hi)
        hi += step
        while _exp_h(hi, r0, s0, t0) <= 0.0 and step < 1e30:
            step *= 2.0
            hi += step
    return lo, hi


def _exp_moreau(
    v: np.ndarray, rho0: float | None = None
) -> tuple[np.ndarray, np.ndarray, float]:
    """Moreau pair for the exponential cone plus the boundary parameter.

    Returns (vp, vd, rho) with vp the projection of v onto the cone, vd the
    projection onto its polar, v = vp + vd and <vp, vd> ~ 0.  rho is the
    root of the one-dimensional optimality condition when the projection
    needed one (NaN on the analytic branches); feeding it back for a nearby
    point makes the next root solve a couple of Newton steps.
    """
    r0, s0, t0 = float(v[0]), float(v[1]), float(v[2])
    if _in_exp_primal(r0, s0, t0):
        return np.array([r0, s0, t0]), np.zeros(3), np.nan
    if _in_exp_polar(r0, s0, t0):
        return np.zeros(3), np.array([r0, s0, t0]), np.nan
    if r0 <= 0.0 and s0 <= 0.0:
        vp = np.array([r0, 0.0, max(t0, 0.0)])
        return vp, np.array([0.0, s0, min(t0, 0.0)]), np.nan

    lo, hi = _exp_bracket(r0, s0, t0)
    rho = _exp_root(r0, s0, t0, lo, hi, rho0)
    quad = rho * (rho - 1.0) + 1.0
    scale_p = max((rho - 1.0) * r0 + s0, 0.0) / quad
    scale_d = max(r0 - rho * s0, 0.0) / quad
    if scale_p > 0.0:
        vp = scale_p * np.array([rho, 1.0, _safe_exp(rho)])
    else:
        vp = np.zeros(3)
    if scale_d > 0.0:
        vd = scale_d * np.array([1.0, 1.0 - rho, -_safe_exp(-rho)])
    else:
        vd = np.zeros(3)
    return vp, vd, rho


def project_exp_pair(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Moreau pair for the exponential cone.

    Returns (vp, vd) with vp the projection of v onto the cone, vd the
    projection onto its polar, v = vp + vd and <vp, vd> ~ 0.
    """
    vp, vd, _ = _exp_moreau(v)
    return vp, vd


def _project_exp(v: np.ndarray) -> np.ndarray:
    return _exp_moreau(v)[0]


def _project_exp_dual(v: np.ndarray) -> np.ndarray:
    # K* = -polar(K), so proj_{K*}(v) = -proj_polar(-v).
    _, vd, _ = _exp_moreau(-np.asarray(v, dtype=float))
    return -vd


# ---------------------------------------------------------------------------
# public single-block interface
# ---------------------------------------------------------------------------


def project_cone(v: np.ndarray, cone: Cone) -> np.ndarray:
    """Project v onto one primitive cone block."""
    v = np.asarray(v, dtype=float)
    if v.shape != (cone.dim,):
        raise ValueError(f"vector of shape {v.shape} does not match cone dim {cone.dim}")
    if cone.kind == ZERO:
        return np.zeros_like(v)
    if cone.kind == NONNEG:
        return np.maximum(v, 0.0)
    if cone.kind == SOC:
        return _project_soc(v)
    return _project_exp(v)


def project_dual_cone(v: np.ndarray, cone: Cone) -> np.ndarray:
    """Project v onto the dual of a primitive cone block.

    Zero's dual is all of R^d; NonNeg and SOC are self-dual; the dual
    exponential cone comes from the polar half of the Moreau pair.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (cone.dim,):
        raise ValueError(f"vector of shape {v.shape} does not match cone dim {cone.dim}")
    if cone.kind == ZERO:
        return v.copy()
    if cone.kind == NONNEG:
        return np.maximum(v, 0.0)
    if cone.kind == SOC:
        return _project_soc(v)
    return _project_exp_dual(v)


class BlockProjector:
    """Vectorized projection onto a product cone (or its dual).

    Groups the blocks of a cone list by kind/dimension once, so the per-
    iteration projections inside the solver become a handful of numpy calls
    instead of a Python loop over blocks.
    """

    def __init__(self, cones: list[Cone]):
        self.dim = cone_dims(cones)
        zero_idx, nn_idx = [], []
        soc_groups: dict[int, list[int]] = {}
        exp_starts = []
        offset = 0
        for c in cones:
            idx = range(offset, offset + c.dim)
            if c.kind == ZERO:
                zero_idx.extend(idx)
            elif c.kind == NONNEG:
                nn_idx.extend(idx)
            elif c.kind == SOC:
                soc_groups.setdefault(c.dim, []).append(offset)
            else:
                exp_starts.append(offset)
            offset += c.dim
        self._zero = np.asarray(zero_idx, dtype=np.intp)
        self._nonneg = np.asarray(nn_idx, dtype=np.intp)
        self._soc = [
            (np.asarray(starts, dtype=np.intp)[:, None] + np.arange(d)[None, :])
            for d, starts in sorted(soc_groups.items())
        ]
        self._exp = np.asarray(exp_starts, dtype=np.intp)
        # boundary parameters of the last exp projections: successive calls
        # see nearby points, so the remembered root seeds the next solve
        self._exp_rho_d = np.full(self._exp.size, np.nan)
        self._exp_rho_p = np.full(self._exp.size, np.nan)

    def project_dual(self, v: np.ndarray) -> np.ndarray:
        """Projection onto the dual cone (free x nonneg x soc x exp-dual)."""
        out = v.copy()
        if self._nonneg.size:
            out[self._nonneg] = np.maximum(v[self._nonneg], 0.0)
        for idx in self._soc:
            out[idx] = project_soc_rows(v[idx])
        for j, start in enumerate(self._exp):
            prev = self._exp_rho_d[j]
            _, vd, rho = _exp_moreau(
                -v[start : start + 3], prev if isfinite(prev) else None
            )
            self._exp_rho_d[j] = rho
            out[start : start + 3] = -vd
        return out

    def project_primal(self, v: np.ndarray) -> np.ndarray:
        """Projection onto the product cone itself."""
        out = v.copy()
        if self._zero.size:
            out[self._zero] = 0.0
        if self._nonneg.size:
            out[self._nonneg] = np.maximum(v[self._nonneg], 0.0)
        for idx in self._soc:
            out[idx] = project_soc_rows(v[idx])
        for j, start in enumerate(self._exp):
            prev = self._exp_rho_p[j]
            vp, _, rho = _exp_moreau(
                v[start : start + 3], prev if isfinite(prev) else None
            )
            self._exp_rho_p[j] = rho
            out[start : start + 3] = vp
        return out
