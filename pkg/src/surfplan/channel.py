"""Scene description, deterministic channel synthesis, and channel files.

The synthetic model is single-path line-of-sight: every link gets the
free-space amplitude lambda/(4*pi*d) and a plane-wave phase across each
uniform planar array.  Metasurface elements radiate with a cosine
pattern over their front half-sphere and absorb on the back; BS antennas
and UE antennas are isotropic.  Blocked links are attenuated by a fixed
dB penalty rather than zeroed, which keeps optimization landscapes
smooth.  Everything is a pure function of the configuration, so channel
tensors are reproducible bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
# -174 dBm/Hz thermal noise floor, in W/Hz
THERMAL_NOISE_PSD = 10.0 ** ((-174.0 - 30.0) / 10.0)


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("zero-length direction vector")
    return v / n


def _is_square(n: int) -> bool:
    r = math.isqrt(n)
    return r * r == n


@dataclass
class SceneConfig:
    """Geometry and radio parameters of one deployment scene."""

    num_ues: int
    num_surfaces: int
    bs_antennas: int
    surface_elements: int
    bs_position: np.ndarray
    surface_positions: np.ndarray
    ue_positions: np.ndarray
    carrier_freq_hz: float = 28e9
    bandwidth_hz: float = 1e9
    tx_power_watt: float = 1.0
    noise_psd_watt_per_hz: float = THERMAL_NOISE_PSD
    noise_figure_db: float = 0.0
    bs_normal: np.ndarray | None = None
    surface_normals: np.ndarray | None = None
    # blocked links: direct BS-UE by UE index, BS-surface by surface index,
    # surface-UE by (surface, UE) pair
    blocked_bs_ue: frozenset = field(default_factory=frozenset)
    blocked_bs_surface: frozenset = field(default_factory=frozenset)
    blocked_surface_ue: frozenset = field(default_factory=frozenset)
    blockage_db: float = 40.0
    bs_spacing_wavelengths: float = 0.5
    element_spacing_wavelengths: float = 0.25

    def __post_init__(self):
        if self.num_ues < 1:
            raise ValueError("num_ues must be >= 1")
        if self.num_surfaces < 0:
            raise ValueError("num_surfaces must be >= 0")
        if self.bs_antennas < 1 or not _is_square(self.bs_antennas):
            raise ValueError(f"bs_antennas must be a positive perfect square, got {self.bs_antennas}")
        if self.num_surfaces > 0 and (self.surface_elements < 1 or not _is_square(self.surface_elements)):
            raise ValueError(
                f"surface_elements must be a positive perfect square, got {self.surface_elements}"
            )
        for name in ("carrier_freq_hz", "bandwidth_hz", "tx_power_watt", "noise_psd_watt_per_hz"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")

        self.bs_position = np.asarray(self.bs_position, dtype=float).reshape(3)
        self.surface_positions = np.asarray(self.surface_positions, dtype=float).reshape(
            self.num_surfaces, 3
        )
        self.ue_positions = np.asarray(self.ue_positions, dtype=float).reshape(self.num_ues, 3)
        if self.bs_normal is None:
            self.bs_normal = np.array([0.0, 0.0, -1.0])
        self.bs_normal = _unit(np.asarray(self.bs_normal, dtype=float).reshape(3))
        if self.surface_normals is None:
            # default: each surface faces the BS
            normals = [
                _unit(self.bs_position - self.surface_positions[l])
                for l in range(self.num_surfaces)
            ]
            self.surface_normals = (
                np.array(normals) if normals else np.zeros((0, 3))
            )
        else:
            normals = np.asarray(self.surface_normals, dtype=float).reshape(self.num_surfaces, 3)
            self.surface_normals = np.array([_unit(nrm) for nrm in normals]) if len(normals) else normals
        self.blocked_bs_ue = frozenset(int(k) for k in self.blocked_bs_ue)
        self.blocked_bs_surface = frozenset(int(l) for l in self.blocked_bs_surface)
        self.blocked_surface_ue = frozenset(
            (int(l), int(k)) for l, k in self.blocked_surface_ue
        )

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq_hz

    @property
    def noise_psd_effective(self) -> float:
        """Noise PSD including the receiver noise figure."""
        return self.noise_psd_watt_per_hz * 10.0 ** (self.noise_figure_db / 10.0)

    @property
    def blockage_amplitude(self) -> float:
        return 10.0 ** (-self.blockage_db / 20.0)

    def to_dict(self) -> dict:
        return {
            "num_ues": self.num_ues,
            "num_surfaces": self.num_surfaces,
            "bs_antennas": self.bs_antennas,
            "surface_elements": self.surface_elements,
            "carrier_freq_hz": self.carrier_freq_hz,
            "bandwidth_hz": self.bandwidth_hz,
            "tx_power_watt": self.tx_power_watt,
            "noise_psd_watt_per_hz": self.noise_psd_watt_per_hz,
            "noise_figure_db": self.noise_figure_db,
            "bs_position": self.bs_position.tolist(),
            "bs_normal": self.bs_normal.tolist(),
            "surface_positions": self.surface_positions.tolist(),
            "surface_normals": self.surface_normals.tolist(),
            "ue_positions": self.ue_positions.tolist(),
            "blocked_bs_ue": sorted(self.blocked_bs_ue),
            "blocked_bs_surface": sorted(self.blocked_bs_surface),
            "blocked_surface_ue": sorted(list(p) for p in self.blocked_surface_ue),
            "blockage_db": self.blockage_db,
            "bs_spacing_wavelengths": self.bs_spacing_wavelengths,
            "element_spacing_wavelengths": self.element_spacing_wavelengths,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneConfig":
        d = dict(d)
        for key in ("blocked_bs_ue", "blocked_bs_surface"):
            if key in d:
                d[key] = frozenset(d[key])
        if "blocked_surface_ue" in d:
            d["blocked_surface_ue"] = frozenset(tuple(p) for p in d["blocked_surface_ue"])
        return cls(**d)


@dataclass
class ChannelSet:
    """Complex channel tensors plus the radio constants needed to score them.

    Arrays are frozen after construction; cascades are derived, never stored
    independently of (h, G, g).
    """

    h: np.ndarray            # (K, N) direct BS->UE
    G: np.ndarray            # (L, M, N) BS->surface
    g: np.ndarray            # (L, K, M) surface->UE
    bandwidth_hz: float
    tx_power_watt: float
    noise_psd_watt_per_hz: float
    carrier_freq_hz: float
    cascade: np.ndarray = None      # (L, K, N, M), derived
    stacked: np.ndarray = None      # (K, N, L*M), derived

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=complex)
        K, N = self.h.shape
        self.G = np.asarray(self.G, dtype=complex)
        self.g = np.asarray(self.g, dtype=complex)
        if self.G.size == 0:
            self.G = self.G.reshape(0, 0, N)
        L = self.G.shape[0]
        M = self.G.shape[1] if L else 0
        if self.g.size == 0:
            self.g = self.g.reshape(L, K, M)
        if self.G.shape != (L, M, N):
            raise ValueError(f"G has shape {self.G.shape}, expected (L, M, N)=({L}, {M}, {N})")
        if self.g.shape != (L, K, M):
            raise ValueError(f"g has shape {self.g.shape}, expected (L, K, M)=({L}, {K}, {M})")
        for name in ("bandwidth_hz", "tx_power_watt", "noise_psd_watt_per_hz", "carrier_freq_hz"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        # cascade H_{l,k} = G_l^T diag(g_{l,k}):  H[l,k,n,m] = G[l,m,n] * g[l,k,m]
        Gt = np.transpose(self.G, (0, 2, 1))
        self.cascade = Gt[:, None, :, :] * self.g[:, :, None, :]
        # stacked per-UE matrix [H_{1,k} ... H_{L,k}] of shape (N, L*M)
        self.stacked = np.transpose(self.cascade, (1, 2, 0, 3)).reshape(K, N, L * M)
        for arr in (self.h, self.G, self.g, self.cascade, self.stacked):
            arr.flags.writeable = False

    @property
    def num_ues(self) -> int:
        return self.h.shape[0]

    @property
    def num_bs_antennas(self) -> int:
        return self.h.shape[1]

    @property
    def num_surfaces(self) -> int:
        return self.G.shape[0]

    @property
    def num_elements(self) -> int:
        return self.G.shape[1]


def aggregate_cascade(G_l: np.ndarray, g_lk: np.ndarray) -> np.ndarray:
    """Cascade matrix transpose(G_l) . diag(g_{l,k}) of shape (N, M)."""
    G_l = np.asarray(G_l, dtype=complex)
    g_lk = np.asarray(g_lk, dtype=complex)
    M, N = G_l.shape
    if g_lk.shape != (M,):
        raise ValueError(f"g has length {g_lk.shape}, expected ({M},)")
    return G_l.T * g_lk[None, :]


def _panel_axes(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two in-plane unit axes for a panel with the given normal."""
    ref = np.array([0.0, 0.0, 1.0])
    if abs(float(normal @ ref)) > 0.9:
        ref = np.array([1.0, 0.0, 0.0])
    u = _unit(np.cross(ref, normal))
    w = np.cross(normal, u)
    return u, w


def _element_offsets(num: int, spacing: float, normal: np.ndarray) -> np.ndarray:
    """Centered element positions (num, 3) of a square planar array."""
    side = math.isqrt(num)
    u, w = _panel_axes(normal)
    idx = np.arange(side) - (side - 1) / 2.0
    iu, iw = np.meshgrid(idx, idx, indexing="ij")
    return spacing * (iu.reshape(-1, 1) * u + iw.reshape(-1, 1) * w)


def _link(
    src: np.ndarray, dst: np.ndarray, wavelength: float,
    src_offsets: np.ndarray | None, dst_offsets: np.ndarray | None,
) -> tuple[float, float, np.ndarray | None, np.ndarray | None]:
    """Distance, plane-wave carrier phase, and per-element steering factors."""
    diff = dst - src
    d = float(np.linalg.norm(diff))
    if d == 0.0:
        raise ValueError(f"coincident positions: {src.tolist()} and {dst.tolist()}")
    p = diff / d
    phase = np.exp(-2j * np.pi * d / wavelength)
    steer_src = (
        np.exp(2j * np.pi * (src_offsets @ p) / wavelength) if src_offsets is not None else None
    )
    steer_dst = (
        np.exp(2j * np.pi * (dst_offsets @ -p) / wavelength) if dst_offsets is not None else None
    )
    return d, phase, steer_src, steer_dst


def synthesize_channels(cfg: SceneConfig, seed: int = 0) -> ChannelSet:
    """Deterministic LOS channels for a scene.

    The model is fully determined by the configuration; ``seed`` is accepted
    for interface stability (scene factories and optimizers own the actual
    randomness) and does not influence the tensors.
    """
    del seed
    lam = cfg.wavelength
    K, L = cfg.num_ues, cfg.num_surfaces
    N, M = cfg.bs_antennas, cfg.surface_elements

    bs_off = _element_offsets(N, cfg.bs_spacing_wavelengths * lam, cfg.bs_normal)
    surf_off = [
        _element_offsets(M, cfg.element_spacing_wavelengths * lam, cfg.surface_normals[l])
        for l in range(L)
    ]
    att = cfg.blockage_amplitude

    h = np.zeros((K, N), dtype=complex)
    for k in range(K):
        d, phase, steer_bs, _ = _link(cfg.bs_position, cfg.ue_positions[k], lam, bs_off, None)
        amp = lam / (4.0 * np.pi * d)
        if k in cfg.blocked_bs_ue:
            amp *= att
        h[k] = amp * phase * steer_bs

    G = np.zeros((L, M, N), dtype=complex)
    g = np.zeros((L, K, M), dtype=complex)
    for l in range(L):
        normal = cfg.surface_normals[l]
        d, phase, steer_bs, steer_sf = _link(
            cfg.bs_position, cfg.surface_positions[l], lam, bs_off, surf_off[l]
        )
        towards_bs = _unit(cfg.bs_position - cfg.surface_positions[l])
        gain = max(float(normal @ towards_bs), 0.0)
        amp = lam / (4.0 * np.pi * d) * gain
        if l in cfg.blocked_bs_surface:
            amp *= att
        G[l] = amp * phase * steer_sf[:, None] * steer_bs[None, :]

        for k in range(K):
            d, phase, steer_sf, _ = _link(
                cfg.surface_positions[l], cfg.ue_positions[k], lam, surf_off[l], None
            )
            towards_ue = _unit(cfg.ue_positions[k] - cfg.surface_positions[l])
            gain = max(float(normal @ towards_ue), 0.0)
            amp = lam / (4.0 * np.pi * d) * gain
            if (l, k) in cfg.blocked_surface_ue:
                amp *= att
            g[l, k] = amp * phase * steer_sf

    return ChannelSet(
        h=h, G=G, g=g,
        bandwidth_hz=cfg.bandwidth_hz,
        tx_power_watt=cfg.tx_power_watt,
        noise_psd_watt_per_hz=cfg.noise_psd_effective,
        carrier_freq_hz=cfg.carrier_freq_hz,
    )


# ---------------------------------------------------------------------------
# channel files
# ---------------------------------------------------------------------------


def _complex_to_pairs(arr: np.ndarray) -> list:
    stacked = np.stack([arr.real, arr.imag], axis=-1)
    return stacked.tolist()


def _pairs_to_complex(node, shape: tuple, name: str) -> np.ndarray:
    try:
        arr = np.asarray(node, dtype=float)
    except (TypeError, ValueError) as e:
        raise ValueError(f"{name}: not a numeric array ({e})") from None
    expected = shape + (2,)
    if arr.size == 0 and 0 in expected:
        return np.zeros(shape, dtype=complex)
    if arr.shape != expected:
        raise ValueError(f"{name}: expected shape {expected}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        idx = tuple(int(i) for i in np.argwhere(~np.isfinite(arr))[0])
        raise ValueError(f"{name}{list(idx)}: non-finite entry")
    return arr[..., 0] + 1j * arr[..., 1]


def save_channels(channels: ChannelSet, path: str) -> None:
    """Write a channel file (JSON; complex numbers as [re, im] pairs)."""
    doc = {
        "meta": {
            "K": channels.num_ues,
            "L": channels.num_surfaces,
            "N": channels.num_bs_antennas,
            "M": channels.num_elements,
            "B": channels.bandwidth_hz,
            "P": channels.tx_power_watt,
            "N0": channels.noise_psd_watt_per_hz,
            "carrier": channels.carrier_freq_hz,
        },
        "h": _complex_to_pairs(channels.h),
        "G": _complex_to_pairs(channels.G),
        "g": _complex_to_pairs(channels.g),
    }
    with open(path, "w") as f:
        json.dump(doc, f)


def load_channels(path: str) -> ChannelSet:
    """Read a channel file, validating schema and finiteness."""
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"channel file is not valid JSON: {e}") from None
    if not isinstance(doc, dict) or "meta" not in doc:
        raise ValueError("channel file: missing 'meta' section")
    meta = doc["meta"]
    for key in ("K", "L", "N", "M", "B", "P", "N0", "carrier"):
        if key not in meta:
            raise ValueError(f"meta: missing field '{key}'")
    K, L, N, M = (int(meta[k]) for k in ("K", "L", "N", "M"))
    for key in ("h", "G", "g"):
        if key not in doc:
            raise ValueError(f"channel file: missing array '{key}'")
    h = _pairs_to_complex(doc["h"], (K, N), "h")
    G = _pairs_to_complex(doc["G"], (L, M, N), "G")
    g = _pairs_to_complex(doc["g"], (L, K, M), "g")
    return ChannelSet(
        h=h, G=G, g=g,
        bandwidth_hz=float(meta["B"]),
        tx_power_watt=float(meta["P"]),
        noise_psd_watt_per_hz=float(meta["N0"]),
        carrier_freq_hz=float(meta["carrier"]),
    )
