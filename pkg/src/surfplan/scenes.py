"""Ready-made scene factories used by tests, demos, and the CLI."""

from __future__ import annotations

import numpy as np

from .channel import SPEED_OF_LIGHT, THERMAL_NOISE_PSD, SceneConfig

# Carrier for which the wavelength equals 4*pi, so the free-space amplitude
# of a link reduces to 1/distance.  Together with unit bandwidth and unit
# noise PSD this keeps SNRs and rates O(1-100), which is the regime the
# optimizer tests expect.
NORMALIZED_CARRIER_HZ = SPEED_OF_LIGHT / (4.0 * np.pi)


def desk_scene(
    num_ues: int = 8,
    num_surfaces: int = 6,
    bs_antennas: int = 4,
    surface_elements: int = 4,
    seed: int = 0,
    normalized: bool = True,
) -> SceneConfig:
    """A small indoor cell: ceiling BS, wall panels, UEs at desk height.

    Most UEs have their direct link blocked (clutter between ceiling and
    desk), so the wall surfaces carry real traffic.  UE placement is the
    only randomized ingredient and is owned by ``seed``.

    With ``normalized=True`` the radio constants are dimensionless test
    units (unit bandwidth/noise, wavelength 4*pi); otherwise a 28 GHz
    indoor setup with thermal noise is produced.
    """
    rng = np.random.default_rng(seed)
    room = np.array([4.0, 3.0])
    center = np.array([room[0] / 2, room[1] / 2, 1.2])

    bs_position = np.array([room[0] / 2, room[1] / 2, 2.5])
    ue_xy = rng.uniform([0.4, 0.4], room - 0.4, size=(num_ues, 2))
    ue_positions = np.column_stack([ue_xy, np.full(num_ues, 0.75)])

    # panels on a ring around the room center, facing inward
    angles = 2.0 * np.pi * (np.arange(num_surfaces) + 0.5) / max(num_surfaces, 1)
    ring = 1.9
    surface_positions = np.column_stack([
        center[0] + ring * np.cos(angles),
        center[1] + ring * np.sin(angles),
        np.full(num_surfaces, 1.6),
    ])
    surface_normals = np.array([
        (center - surface_positions[l]) / np.linalg.norm(center - surface_positions[l])
        for l in range(num_surfaces)
    ]) if num_surfaces else np.zeros((0, 3))

    # clutter blocks the direct path for three out of every four UEs
    blocked = frozenset(k for k in range(num_ues) if k % 4 != 0)

    if normalized:
        radio = dict(
            carrier_freq_hz=NORMALIZED_CARRIER_HZ,
            bandwidth_hz=1.0,
            tx_power_watt=20.0,
            noise_psd_watt_per_hz=1.0,
        )
    else:
        radio = dict(
            carrier_freq_hz=28e9,
            bandwidth_hz=100e6,
            tx_power_watt=1.0,
            noise_psd_watt_per_hz=THERMAL_NOISE_PSD,
            noise_figure_db=7.0,
        )

    return SceneConfig(
        num_ues=num_ues,
        num_surfaces=num_surfaces,
        bs_antennas=bs_antennas,
        surface_elements=surface_elements,
        bs_position=bs_position,
        surface_positions=surface_positions,
        ue_positions=ue_positions,
        blocked_bs_ue=blocked,
        **radio,
    )
