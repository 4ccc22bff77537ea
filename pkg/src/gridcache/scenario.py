"""Deployment geometry: eNB at the origin, an SN square and a user disk.

Random draws come from numpy's PCG64 generator seeded through
``SeedSequence(seed, spawn_key=(stream,))``.  Each class of sampled entity
owns a fixed stream id, so enabling or disabling one kind of randomness
never shifts the draws of another.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import EDGE_FRACTION, SimConfig

STREAM_VIRTUAL_CENTER = 0
STREAM_USERS = 1
STREAM_SHADOWING = 2
STREAM_FADING = 3


def substream(seed: int, stream: int) -> np.random.Generator:
    """Independent, reproducible generator for one entity class."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


@dataclass(frozen=True)
class Scenario:
    """One problem instance.

    Node 0 is the eNB at the origin; nodes 1..M are the SNs.  (Zero-based
    indices throughout the package.)
    """

    node_positions: np.ndarray  # (M+1, 2)
    user_positions: np.ndarray  # (K, 2)
    energy_rates_w: np.ndarray  # (M+1,)
    virtual_center: np.ndarray  # (2,)
    config: SimConfig
    seed: int

    @property
    def num_nodes(self) -> int:
        return self.node_positions.shape[0]

    def distances(self) -> np.ndarray:
        """Node-to-user distances in meters, shape (M+1, K)."""
        diff = self.node_positions[:, None, :] - self.user_positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])


def sn_offsets(num_sns: int, side_m: float) -> np.ndarray:
    """SN positions relative to the virtual center.

    Points sit at equal arc-length spacing along the square perimeter,
    starting at the lower-left corner and walking counter-clockwise; for four
    SNs these are exactly the corners.
    """
    half = side_m / 2.0
    corners = np.array([[-half, -half], [half, -half], [half, half], [-half, half]])
    step = 4.0 * side_m / num_sns
    out = np.empty((num_sns, 2))
    for n in range(num_sns):
        s = n * step
        edge = min(int(s // side_m), 3)
        frac = (s - edge * side_m) / side_m
        a, b = corners[edge], corners[(edge + 1) % 4]
        out[n] = a + frac * (b - a)
    return out


def center_distance_range(config: SimConfig) -> tuple[float, float]:
    """Allowed (inclusive, exclusive-for-center) range of |virtual_center|."""
    r = config.cell_radius_m
    outer = r - config.user_disk_radius_m
    split = EDGE_FRACTION * r
    if config.placement_mode == "cell_edge":
        return split, outer
    return 0.0, min(split, outer)


def _sample_virtual_center(config: SimConfig, rng: np.random.Generator) -> np.ndarray:
    lo, hi = center_distance_range(config)
    while True:
        # area-uniform over the annulus lo <= d <= hi
        d = np.sqrt(lo**2 + rng.random() * (hi**2 - lo**2))
        phi = 2.0 * np.pi * rng.random()
        if config.placement_mode == "cell_center" and d >= hi:
            continue
        return np.array([d * np.cos(phi), d * np.sin(phi)])


def _sample_users(config: SimConfig, center: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    k = config.num_users
    r = config.user_disk_radius_m * np.sqrt(rng.random(k))
    phi = 2.0 * np.pi * rng.random(k)
    return center + np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def sample_scenario(config: SimConfig, seed: int | None = None) -> Scenario:
    """Sample a deterministic scenario for ``(config, seed)``.

    ``seed`` defaults to ``config.seed``.
    """
    seed = config.seed if seed is None else seed
    center = _sample_virtual_center(config, substream(seed, STREAM_VIRTUAL_CENTER))
    users = _sample_users(config, center, substream(seed, STREAM_USERS))
    sns = center + sn_offsets(config.num_sns, config.sn_square_side_m)
    nodes = np.vstack([np.zeros((1, 2)), sns])
    for arr in (nodes, users, center):
        arr.setflags(write=False)
    energy = np.asarray(config.energy_rates_w, dtype=float)
    energy.setflags(write=False)
    return Scenario(
        node_positions=nodes,
        user_positions=users,
        energy_rates_w=energy,
        virtual_center=center,
        config=config,
        seed=seed,
    )
