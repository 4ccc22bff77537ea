"""Subchannel counts per node and the choice of concrete subchannels."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .powerplan import node_power_curve


@dataclass(frozen=True)
class SpectrumPlan:
    counts: np.ndarray  # (M+1,) int
    alpha: np.ndarray  # (M+1, N) 0/1

    @property
    def assigned_sets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in self.alpha)

    def dump_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["i", "j"])
            for i, js in enumerate(self.assigned_sets):
                for j in js:
                    w.writerow([i, j])
        return path


class PowerTable:
    """Node power for every admissible subchannel count, plus the energy-adjusted column.

    ``rows[i][n-1]`` is the power node ``i`` needs with ``n`` subchannels,
    for ``n = 1 .. N - M_act + 1``.
    """

    def __init__(
        self,
        active: Sequence[int],
        min_avg_snr: Mapping[int, float],
        targets: Sequence[float],
        energy_rates_w: Sequence[float],
        num_subchannels: int,
        bandwidth_hz: float,
    ):
        self.active = tuple(sorted(int(i) for i in active))
        width = num_subchannels - len(self.active) + 1
        self.rows = {
            i: node_power_curve(min_avg_snr[i], targets[i], bandwidth_hz, width) for i in self.active
        }
        self.energy = {i: float(energy_rates_w[i]) for i in self.active}
        self.counts = {i: 1 for i in self.active}

    def power(self, i: int) -> float:
        return float(self.rows[i][self.counts[i] - 1])

    def last_column(self) -> dict[int, float]:
        return {i: self.power(i) - self.energy[i] for i in self.active}

    def neediest(self, among: Sequence[int] | None = None) -> int:
        """Node with the largest ``P_i(N_i) - E_i``; ties go to the lowest index."""
        col = self.last_column()
        pool = self.active if among is None else sorted(among)
        return max(pool, key=lambda i: (col[i], -i))


def allocate_counts(
    active: Sequence[int],
    min_avg_snr: Mapping[int, float],
    targets: Sequence[float],
    energy_rates_w: Sequence[float],
    num_subchannels: int,
    bandwidth_hz: float,
    num_nodes: int | None = None,
) -> np.ndarray:
    """Greedy subchannel counts: start at one each, then feed the neediest node."""
    active = sorted(int(i) for i in active)
    if len(active) > num_subchannels:
        raise ValueError("more active nodes than subchannels")
    m1 = num_nodes if num_nodes is not None else len(energy_rates_w)
    counts = np.zeros(m1, dtype=int)
    if not active:
        return counts
    table = PowerTable(active, min_avg_snr, targets, energy_rates_w, num_subchannels, bandwidth_hz)
    for _ in range(num_subchannels - len(active)):
        table.counts[table.neediest()] += 1
    for i in active:
        counts[i] = table.counts[i]
    return counts


def select_subchannels(
    counts: Sequence[int],
    per_subchannel_min_snr: np.ndarray,
    energy_rates_w: Sequence[float],
    node_power_w: Sequence[float],
) -> SpectrumPlan:
    """Serve nodes by descending ``P_i - E_i``; each takes its best remaining subchannels.

    ``per_subchannel_min_snr`` is indexed (node, subchannel); rows of nodes
    with zero count are ignored.
    """
    counts = np.asarray(counts, dtype=int)
    snr = np.asarray(per_subchannel_min_snr, dtype=float)
    m1, n = snr.shape
    if counts.shape != (m1,) or counts.sum() != n:
        raise ValueError("subchannel counts must sum to the number of subchannels")
    if np.any(counts < 0):
        raise ValueError("negative subchannel count")
    priority = {int(i): float(node_power_w[i]) - float(energy_rates_w[i]) for i in np.flatnonzero(counts)}
    order = sorted(priority, key=lambda i: (-priority[i], i))
    alpha = np.zeros((m1, n), dtype=np.int8)
    pool = list(range(n))
    for pos, i in enumerate(order):
        if pos == len(order) - 1:
            chosen = pool
        else:
            ranked = sorted(pool, key=lambda j: (-snr[i, j], j))
            chosen = ranked[: counts[i]]
        for j in chosen:
            alpha[i, j] = 1
        taken = set(chosen)
        pool = [j for j in pool if j not in taken]
    alpha.setflags(write=False)
    counts = counts.copy()
    counts.setflags(write=False)
    return SpectrumPlan(counts=counts, alpha=alpha)
