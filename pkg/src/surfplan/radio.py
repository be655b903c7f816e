"""Physical-layer operations: surface phase plans, beamforming, SNR, rates.

This is the ground-truth side of the package: everything here evaluates a
concrete deployment exactly, with no convex relaxation involved.  The
optimizer proposes plans; this module scores them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet

_UNIT_TOL = 1e-6


class UnreachableUserError(ValueError):
    """Raised when a user's effective channel is identically zero."""


@dataclass
class SurfacePlan:
    """Mode assignment and phase profiles for every candidate surface.

    ``alpha[l]`` is 1 when surface ``l`` runs reconfigurable (its per-user
    profiles ``phi[l, k]`` apply) and 0 when it is static (the single shared
    profile ``theta[l]`` serves every user).  All profile entries are
    unit-modulus.
    """

    alpha: np.ndarray          # (L,) in {0, 1}
    theta: np.ndarray          # (L, M) complex, used where alpha == 0
    phi: np.ndarray            # (L, K, M) complex, used where alpha == 1

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha)
        self.theta = np.asarray(self.theta, dtype=complex)
        self.phi = np.asarray(self.phi, dtype=complex)
        L = self.alpha.shape[0] if self.alpha.ndim else 0
        self.alpha = self.alpha.reshape(L).astype(int)
        if np.any((self.alpha != 0) & (self.alpha != 1)):
            raise ValueError("alpha entries must be 0 or 1")
        if self.theta.ndim != 2 or self.theta.shape[0] != L:
            raise ValueError(f"theta must have shape (L, M) with L={L}")
        if self.phi.ndim != 3 or self.phi.shape[0] != L or self.phi.shape[2] != self.theta.shape[1]:
            raise ValueError("phi must have shape (L, K, M) matching theta")
        if L and self.theta.size:
            off = np.abs(np.abs(self.theta) - 1.0).max()
            off = max(off, np.abs(np.abs(self.phi) - 1.0).max())
            if off > _UNIT_TOL:
                raise ValueError(f"phase profiles must be unit-modulus (worst deviation {off:.2e})")

    @property
    def num_surfaces(self) -> int:
        return self.alpha.shape[0]

    @property
    def num_reconfigurable(self) -> int:
        return int(self.alpha.sum())

    def phases_for(self, k: int) -> np.ndarray:
        """Profiles seen by user ``k``, shape (L, M)."""
        if self.num_surfaces == 0:
            return self.theta
        return np.where(self.alpha[:, None] == 1, self.phi[:, k, :], self.theta)


def resulting_phase_vector(plan: SurfacePlan, surface: int, user: int) -> np.ndarray:
    """Profile applied at one surface for one user: phi if reconfigurable, theta if static."""
    if plan.alpha[surface] == 1:
        return plan.phi[surface, user]
    return plan.theta[surface]


@dataclass
class Allocation:
    """Per-user airtime shares; nonnegative and summing to at most one."""

    tau: np.ndarray

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=float).reshape(-1)
        if np.any(self.tau < -1e-12):
            raise ValueError("airtime shares must be nonnegative")
        total = float(self.tau.sum())
        if total > 1.0 + 1e-9:
            raise ValueError(f"airtime shares sum to {total:.6f} > 1")


def effective_channel(channels: ChannelSet, plan: SurfacePlan, user: int | None = None) -> np.ndarray:
    """Direct-plus-reflected channel v_k = h_k + sum_l H_{l,k} psi_{l,k}.

    Returns shape (N,) for a single user, (K, N) for all users.
    """
    if user is not None:
        psi = plan.phases_for(user).reshape(-1)
        return channels.h[user] + channels.stacked[user] @ psi
    return np.array([effective_channel(channels, plan, k) for k in range(channels.num_ues)])


def mrt_precoder(v: np.ndarray) -> np.ndarray:
    """Unit-norm conjugate beamformer; the received amplitude is then ||v||."""
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise UnreachableUserError("effective channel is zero; user cannot be served")
    return np.conj(v) / norm


def snr(channels: ChannelSet, plan: SurfacePlan, user: int | None = None) -> np.ndarray | float:
    """Post-beamforming SNR ||v_k||^2 P / (B N0) under matched transmission."""
    v = effective_channel(channels, plan, user)
    scale = channels.tx_power_watt / (channels.bandwidth_hz * channels.noise_psd_watt_per_hz)
    if user is not None:
        return float(np.linalg.norm(v) ** 2 * scale)
    return np.linalg.norm(v, axis=1) ** 2 * scale


def achievable_rate(tau: float, bandwidth_hz: float, snr_value: float) -> float:
    """Time-shared Shannon rate tau * B * log2(1 + SNR), in bit/s."""
    return float(tau) * bandwidth_hz * np.log2(1.0 + snr_value)


@dataclass
class PlanScore:
    """Exact evaluation of one deployment plan under one airtime split."""

    snr: np.ndarray          # (K,)
    rates: np.ndarray        # (K,) bit/s
    min_rate: float
    bottleneck_user: int


def evaluate_plan(channels: ChannelSet, plan: SurfacePlan, allocation: Allocation) -> PlanScore:
    """Score a plan exactly: per-user SNR, per-user rate, worst-user rate."""
    if allocation.tau.shape[0] != channels.num_ues:
        raise ValueError("allocation covers a different number of users than the channels")
    gam = snr(channels, plan)
    rates = allocation.tau * channels.bandwidth_hz * np.log2(1.0 + gam)
    worst = int(np.argmin(rates))
    return PlanScore(snr=gam, rates=rates, min_rate=float(rates[worst]), bottleneck_user=worst)
