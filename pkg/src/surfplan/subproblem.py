"""Convex subproblem construction for the surface-planning iteration.

Each outer iteration fixes an expansion point (the previous phase iterate)
and builds one mixed-integer conic instance over

    [r_min, tau_k, d_k, e_k, s_k, alpha_l, Re/Im z_{l,k,m},
     Re/Im phi_{l,k,m}, Re/Im theta_{l,m}]

maximizing ``r_min - omega * sum_k s_k`` where r_min^2 lower-bounds every
user's rate.  The rate chain is split across three cone families:

* an exponential-cone row per user encodes ``d_k >= 2^{e_k}``,
* a dim-4 second-order row per user encodes ``e_k >= r_min^2 / (B tau_k)``,
* an affine surrogate row per user lower-bounds the received power
  ``||h_k + H_k z_k||^2`` around the expansion point, with slack ``s_k``
  keeping every iteration feasible.

Phase-profile structure is linear: ``z = phi + theta`` rows couple the
per-user and shared profiles, and dim-3 second-order rows bound
``|phi| <= alpha`` and ``|theta| <= 1 - alpha`` so the binary mode switch
alpha_l routes each surface's energy to exactly one profile kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .channel import ChannelSet
from .conic import ConicProblem
from .cones import Cone, expcone, nonneg, soc, zero

MIN_OMEGA = 10.0
_PSD_TOL = 1e-9
_TIE_BREAK = 1e-8


@dataclass
class QuadData:
    """Received-power quadratic for one user: ||h + H z||^2 = z^H A z + 2 Re(b^H z) + c."""

    A: np.ndarray        # (LM, LM) Hermitian PSD
    b: np.ndarray        # (LM,)
    c: float             # >= 0

    def power_at(self, z: np.ndarray) -> float:
        """Exact received power at a phase vector (ground truth for the surrogate)."""
        z = np.asarray(z, dtype=complex)
        return float(np.real(z.conj() @ self.A @ z) + 2.0 * np.real(self.b.conj() @ z) + self.c)

    def surrogate_at(self, z: np.ndarray, z_prev: np.ndarray) -> float:
        """Affine minorant of ``power_at`` expanded around ``z_prev``."""
        z = np.asarray(z, dtype=complex)
        z_prev = np.asarray(z_prev, dtype=complex)
        lin = 2.0 * np.real((self.A @ z_prev + self.b).conj() @ z)
        return float(lin - np.real(z_prev.conj() @ self.A @ z_prev) + self.c)


def quad_data(channels: ChannelSet, k: int) -> QuadData:
    """Quadratic data (A, b, c) of user ``k``'s received power in the stacked phases."""
    H = channels.stacked[k]
    h = channels.h[k]
    A = H.conj().T @ H
    b = H.conj().T @ h
    return QuadData(A=A, b=b, c=float(np.real(h.conj() @ h)))


@dataclass
class PhaseIterate:
    """Expansion point of the surrogate: one stacked phase vector per user."""

    z: np.ndarray        # (K, LM) complex

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=complex)
        if self.z.ndim != 2:
            raise ValueError("iterate must be a (num_ues, L*M) array")
        if not np.all(np.isfinite(self.z)):
            raise ValueError("iterate contains non-finite entries")


@dataclass
class VariableLayout:
    """Index map of the real-lifted decision vector.

    Complex scalars occupy adjacent (real, imaginary) pairs; z and phi are
    grouped per user, theta is shared.
    """

    num_ues: int
    num_surfaces: int
    num_elements: int

    def __post_init__(self):
        K, L, M = self.num_ues, self.num_surfaces, self.num_elements
        self.r_min = 0
        self.tau = 1 + np.arange(K)
        self.d = 1 + K + np.arange(K)
        self.e = 1 + 2 * K + np.arange(K)
        self.s = 1 + 3 * K + np.arange(K)
        self.alpha = 1 + 4 * K + np.arange(L)
        self._z0 = 1 + 4 * K + L
        self._phi0 = self._z0 + 2 * K * L * M
        self._theta0 = self._phi0 + 2 * K * L * M
        self.num_vars = self._theta0 + 2 * L * M

    @property
    def pairs_per_user(self) -> int:
        return self.num_surfaces * self.num_elements

    def z_block(self, k: int) -> slice:
        """Real-vector slice of user k's interleaved (re, im) z entries."""
        w = 2 * self.pairs_per_user
        return slice(self._z0 + k * w, self._z0 + (k + 1) * w)

    def phi_block(self, k: int) -> slice:
        w = 2 * self.pairs_per_user
        return slice(self._phi0 + k * w, self._phi0 + (k + 1) * w)

    def theta_block(self) -> slice:
        return slice(self._theta0, self._theta0 + 2 * self.pairs_per_user)

    @staticmethod
    def _pairs_to_complex(seg: np.ndarray) -> np.ndarray:
        return seg[0::2] + 1j * seg[1::2]

    @staticmethod
    def _complex_to_pairs(vec: np.ndarray) -> np.ndarray:
        out = np.empty(2 * vec.shape[0])
        out[0::2] = vec.real
        out[1::2] = vec.imag
        return out

    def extract_z(self, x: np.ndarray) -> np.ndarray:
        """Stacked complex phase vectors, shape (K, LM)."""
        return np.array([self._pairs_to_complex(x[self.z_block(k)]) for k in range(self.num_ues)])

    def extract_phi(self, x: np.ndarray) -> np.ndarray:
        return np.array([self._pairs_to_complex(x[self.phi_block(k)]) for k in range(self.num_ues)])

    def extract_theta(self, x: np.ndarray) -> np.ndarray:
        return self._pairs_to_complex(x[self.theta_block()])


def build_subproblem(
    channels: ChannelSet,
    budget: int,
    iterate: PhaseIterate,
    tau_min: float | None = None,
    omega: float = 100.0,
) -> tuple[ConicProblem, VariableLayout]:
    """One convex instance of the planning problem around an expansion point.

    Returns the conic program (minimization of the negated objective) and
    the layout needed to read solutions back.
    """
    K, L = channels.num_ues, channels.num_surfaces
    M = channels.num_elements
    LM = L * M
    if tau_min is None:
        tau_min = 1.0 / (2 * K)
    if not 0.0 < tau_min * K <= 1.0:
        raise ValueError(f"tau_min={tau_min} leaves no feasible airtime split for {K} users")
    if omega < MIN_OMEGA:
        raise ValueError(f"omega must be at least {MIN_OMEGA}, got {omega}")
    if not 0 <= budget <= L:
        raise ValueError(f"budget must lie in [0, {L}], got {budget}")
    if iterate.z.shape != (K, LM):
        raise ValueError(f"iterate has shape {iterate.z.shape}, expected ({K}, {LM})")

    B = channels.bandwidth_hz
    noise_over_power = B * channels.noise_psd_watt_per_hz / channels.tx_power_watt

    quads = [quad_data(channels, k) for k in range(K)]
    for k, q in enumerate(quads):
        scale = np.linalg.norm(q.A) if LM else 0.0
        if LM and (not np.all(np.isfinite(q.A)) or
                   np.linalg.eigvalsh(q.A).min() < -_PSD_TOL * max(scale, 1.0)):
            raise ValueError(f"received-power matrix of user {k} is not PSD: corrupt channels")

    lay = VariableLayout(K, L, M)

    # characteristic magnitudes: received power (and hence the rate-curve
    # variables) can span orders of magnitude across users, which plain
    # entry equilibration cannot see
    hint = np.ones(lay.num_vars)
    e_hints = []
    for k in range(K):
        reach = np.linalg.norm(channels.h[k])
        if L:
            reach = reach + np.linalg.norm(channels.stacked[k], axis=0).sum()
        d_max = 1.0 + reach**2 / noise_over_power
        e_hat = max(math.log2(d_max), 1.0)
        hint[lay.d[k]] = d_max
        hint[lay.e[k]] = e_hat
        e_hints.append(e_hat)
    hint[lay.tau] = 1.0 / K
    hint[lay.r_min] = max(math.sqrt(B * float(np.median(e_hints)) / K), 1e-9)

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    b_parts: list[np.ndarray] = []
    cones: list[Cone] = []

    def add(r, c, v):
        rows.append(np.atleast_1d(np.asarray(r, dtype=np.int64)))
        cols.append(np.atleast_1d(np.asarray(c, dtype=np.int64)))
        vals.append(np.atleast_1d(np.asarray(v, dtype=float)))

    row = 0

    # profile coupling z - phi - theta = 0 (real and imaginary parts)
    if LM:
        n_pairs = 2 * K * LM
        r = row + np.arange(n_pairs)
        add(r, lay._z0 + np.arange(n_pairs), np.ones(n_pairs))
        add(r, lay._phi0 + np.arange(n_pairs), -np.ones(n_pairs))
        add(r, np.tile(lay._theta0 + np.arange(2 * LM), K), -np.ones(n_pairs))
        b_parts.append(np.zeros(n_pairs))
        cones.append(zero(n_pairs))
        row += n_pairs

    # scalar inequality block
    ineq_b = []

    def ineq(cols_k, vals_k, rhs):
        nonlocal row
        add(np.full(len(cols_k), row), cols_k, vals_k)
        ineq_b.append(rhs)
        row += 1

    ineq(lay.tau, np.ones(K), 1.0)                                  # total airtime
    for k in range(K):
        ineq([lay.tau[k]], [-1.0], -tau_min)                        # per-user floor
    ineq([lay.r_min], [-1.0], 0.0)
    for k in range(K):
        ineq([lay.s[k]], [-1.0], 0.0)
    if L and budget > 0:
        ineq(lay.alpha, np.ones(L), float(budget))                  # reconfigurable budget
    for k in range(K):                                              # power surrogate
        q = quads[k]
        # the row is stated in units of the user's peak received power, so
        # that its entries stay of one magnitude across near and far users
        w = noise_over_power * hint[lay.d[k]]
        cols_k = [lay.s[k], lay.d[k]]
        vals_k = [-1.0 / w, noise_over_power / w]
        if LM:
            qv = q.A @ iterate.z[k] + q.b
            coeff = np.empty(2 * LM)
            coeff[0::2] = -2.0 * qv.real / w
            coeff[1::2] = -2.0 * qv.imag / w
            cols_k = np.concatenate([cols_k, np.arange(lay.z_block(k).start, lay.z_block(k).stop)])
            vals_k = np.concatenate([vals_k, coeff])
            rhs = (q.c + noise_over_power
                   - float(np.real(iterate.z[k].conj() @ q.A @ iterate.z[k]))) / w
        else:
            rhs = (q.c + noise_over_power) / w
        ineq(cols_k, vals_k, rhs)
    b_parts.append(np.array(ineq_b))
    cones.append(nonneg(len(ineq_b)))

    # rate-splitting second-order rows: e + tau >= ||(sqrt(2/B) r, e, tau)||
    root_two_over_b = math.sqrt(2.0 / B)
    for k in range(K):
        add([row, row], [lay.e[k], lay.tau[k]], [-1.0, -1.0])
        add([row + 1], [lay.r_min], [-root_two_over_b])
        add([row + 2], [lay.e[k]], [-1.0])
        add([row + 3], [lay.tau[k]], [-1.0])
        b_parts.append(np.zeros(4))
        cones.append(soc(4))
        row += 4

    # per-user profile magnitude |phi| <= alpha, shared profile |theta| <= 1 - alpha
    if budget == 0 and LM:
        # a zero budget forces every alpha (and with it every per-user
        # profile) to zero; pinning them with equality rows instead of
        # magnitude cones collapsed to their tips keeps the duals regular
        n_pairs = 2 * K * LM
        r = row + np.arange(n_pairs)
        add(r, lay._phi0 + np.arange(n_pairs), np.ones(n_pairs))
        b_parts.append(np.zeros(n_pairs))
        cones.append(zero(n_pairs))
        row += n_pairs
    else:
        for l in range(L):
            for k in range(K):
                base = lay.phi_block(k).start + 2 * l * M
                for m in range(M):
                    add([row, row + 1, row + 2],
                        [lay.alpha[l], base + 2 * m, base + 2 * m + 1],
                        [-1.0, -1.0, -1.0])
                    b_parts.append(np.zeros(3))
                    cones.append(soc(3))
                    row += 3
    th0 = lay.theta_block().start
    for l in range(L):
        for m in range(M):
            j = l * M + m
            add([row, row + 1, row + 2],
                [lay.alpha[l], th0 + 2 * j, th0 + 2 * j + 1],
                [1.0, -1.0, -1.0])
            b_parts.append(np.array([1.0, 0.0, 0.0]))
            cones.append(soc(3))
            row += 3

    # exponential rows d >= 2^e as (e ln2 - ln sigma, 1, d / sigma) in the
    # exponential cone; the shift by each user's power scale sigma keeps the
    # block entries of one magnitude without changing the constraint
    for k in range(K):
        sigma = hint[lay.d[k]]
        add([row, row + 2], [lay.e[k], lay.d[k]], [-math.log(2.0), -1.0 / sigma])
        b_parts.append(np.array([-math.log(sigma), 1.0, 0.0]))
        cones.append(expcone())
        row += 3

    c = np.zeros(lay.num_vars)
    c[lay.r_min] = -1.0
    c[lay.s] = omega
    # break the flat optimal faces (d is sandwiched but costless, and tied
    # surfaces can trade indicator mass) with a drift far below every
    # tolerance used on the objective; without it the splitting iterates
    # wander along the faces and the tail converges sublinearly
    c[lay.d] = _TIE_BREAK / hint[lay.d]
    if L and budget > 0:
        c[lay.alpha] = _TIE_BREAK

    lower = np.full(lay.num_vars, -np.inf)
    upper = np.full(lay.num_vars, np.inf)
    if L:
        lower[lay.alpha] = 0.0
        upper[lay.alpha] = 1.0 if budget > 0 else 0.0

    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(row, lay.num_vars),
    ).tocsr()
    problem = ConicProblem(
        c=c, A=A, b=np.concatenate(b_parts), cones=cones, lower=lower, upper=upper,
        var_hint=hint,
    )
    return problem, lay
