"""Maximal-minimum-SNR user association.

Node 0 is the eNB, nodes 1..M the SNs.  A user is served when it connects
to the eNB or to at least ``D`` SNs.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class AssociationResult:
    beta: np.ndarray  # (M+1, K) 0/1
    reconstruction_degree: int
    node_sets: tuple[frozenset[int], ...]  # per user, the serving nodes
    step3_iterations: int = 0

    @property
    def user_sets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(int(k) for k in np.flatnonzero(row)) for row in self.beta)

    @property
    def active_set(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.beta.any(axis=1)))

    @property
    def enb_active(self) -> bool:
        return bool(self.beta[0].any())

    @property
    def active_sns(self) -> tuple[int, ...]:
        return tuple(i for i in self.active_set if i != 0)

    @property
    def dstar(self) -> int:
        return self.reconstruction_degree * int(self.enb_active) + len(self.active_sns)

    @property
    def case_label(self) -> str:
        if not self.active_sns:
            return "I"
        if not self.enb_active:
            return "II"
        return "III"

    def min_avg_snr(self, avg_snr: np.ndarray) -> dict[int, float]:
        """Per active node, the minimum average SNR over its users."""
        return {i: float(avg_snr[i, self.beta[i].astype(bool)].min()) for i in self.active_set}

    def coverage(self) -> np.ndarray:
        """Per-user left side of the reconstruction constraint."""
        return coverage(self.beta, self.reconstruction_degree)

    def dump_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "i", "beta"])
            m1, k = self.beta.shape
            for u in range(k):
                for i in range(m1):
                    w.writerow([u, i, int(self.beta[i, u])])
        return path


def coverage(beta: np.ndarray, d: int) -> np.ndarray:
    beta = np.asarray(beta)
    return beta[0] + beta[1:].sum(axis=0) / d


def is_feasible(beta: np.ndarray, d: int) -> bool:
    # integer form of beta_0k + sum_SN beta_ik / D >= 1
    beta = np.asarray(beta, dtype=int)
    return bool(np.all(d * beta[0] + beta[1:].sum(axis=0) >= d))


def _result(node_sets: list[set[int]], m1: int, d: int, iterations: int = 0) -> AssociationResult:
    beta = np.zeros((m1, len(node_sets)), dtype=np.int8)
    for k, nodes in enumerate(node_sets):
        for i in nodes:
            beta[i, k] = 1
    beta.setflags(write=False)
    return AssociationResult(
        beta=beta,
        reconstruction_degree=d,
        node_sets=tuple(frozenset(s) for s in node_sets),
        step3_iterations=iterations,
    )


def rank_nodes(avg_snr: np.ndarray) -> np.ndarray:
    """1-based rank of every node per user by descending SNR; ties by node index."""
    m1, k = avg_snr.shape
    ranks = np.empty((m1, k), dtype=int)
    for u in range(k):
        order = np.argsort(-avg_snr[:, u], kind="stable")
        ranks[order, u] = np.arange(1, m1 + 1)
    return ranks


def initial_node_sets(avg_snr: np.ndarray, d: int, ranks: np.ndarray | None = None) -> list[set[int]]:
    """Step 1: the closest nodes that let each user rebuild the file."""
    m1, k = avg_snr.shape
    ranks = rank_nodes(avg_snr) if ranks is None else ranks
    sets: list[set[int]] = []
    for u in range(k):
        if ranks[0, u] <= d:
            top = [i for i in range(m1) if ranks[i, u] <= d + 1]
            sns = [i for i in top if i != 0]
            if sum(avg_snr[i, u] for i in sns) > d * avg_snr[0, u]:
                sets.append(set(sns))
            else:
                sets.append({0})
        else:
            sets.append({i for i in range(m1) if ranks[i, u] <= d})
    return sets


def add_backups(avg_snr: np.ndarray, sets: list[set[int]]) -> list[set[int]]:
    """Step 2: offer node i to every user it reaches strictly better than one of its own users."""
    k = len(sets)
    for u in range(k):
        for i in sorted(sets[u]):
            for v in range(k):
                if v != u and avg_snr[i, v] > avg_snr[i, u]:
                    sets[v].add(i)
    return sets


def _node_minima(avg_snr: np.ndarray, sets: list[set[int]]) -> dict[int, float]:
    minima: dict[int, float] = {}
    for u, nodes in enumerate(sets):
        for i in nodes:
            val = avg_snr[i, u]
            if i not in minima or val < minima[i]:
                minima[i] = val
    return minima


def _user_coverage(nodes: set[int], d: int) -> int:
    # d * (beta_0k + sum_SN beta_ik / D), kept integral
    return d * (0 in nodes) + sum(1 for i in nodes if i != 0)


def _bottleneck_users(avg_snr: np.ndarray, sets: list[set[int]], d: int) -> list[int]:
    minima = _node_minima(avg_snr, sets)
    out = []
    for u, nodes in enumerate(sets):
        if _user_coverage(nodes, d) > d and any(avg_snr[i, u] == minima[i] for i in nodes):
            out.append(u)
    return out


def prune_bottlenecks(
    avg_snr: np.ndarray, sets: list[set[int]], d: int, ranks: np.ndarray
) -> tuple[list[set[int]], int]:
    """Step 3: over-provisioned users release the nodes they are the bottleneck of.

    Returns the pruned sets and the number of sweeps performed.
    """
    sweeps = 0
    pending = _bottleneck_users(avg_snr, sets, d)
    while pending:
        sweeps += 1
        for u in pending:
            minima = _node_minima(avg_snr, sets)
            worst = [i for i in sorted(sets[u]) if avg_snr[i, u] == minima[i]]
            if not worst:
                continue
            i_star = max(worst, key=lambda i: (ranks[i, u], -i))
            sn_count = sum(1 for i in sets[u] if i != 0)
            if i_star == 0 and sn_count < d:
                sets[u] = {0}
            else:
                sets[u] = sets[u] - {i_star}
        pending = _bottleneck_users(avg_snr, sets, d)
    return sets, sweeps


def associate(avg_snr: np.ndarray, d: int) -> AssociationResult:
    """Run the three-step maximal-minimum-SNR association once."""
    avg_snr = np.asarray(avg_snr, dtype=float)
    m1, _ = avg_snr.shape
    if m1 < d + 1:
        raise ValueError("need at least D SNs plus the eNB")
    if np.any(avg_snr <= 0):
        raise ValueError("average SNRs must be positive")
    ranks = rank_nodes(avg_snr)
    sets = initial_node_sets(avg_snr, d, ranks)
    sets = add_backups(avg_snr, sets)
    sets, sweeps = prune_bottlenecks(avg_snr, sets, d, ranks)
    result = _result(sets, m1, d, sweeps)
    assert is_feasible(result.beta, d), "association left a user unable to rebuild the file"
    return result


def association_objective(
    result: AssociationResult,
    avg_snr: np.ndarray,
    num_subchannels: int,
    bandwidth_hz: float,
    fragment_rate_bps: float,
) -> float:
    """Total power when spectrum is split in proportion to the traffic each node carries."""
    d = result.reconstruction_degree
    dstar = result.dstar
    minima = result.min_avg_snr(np.asarray(avg_snr, dtype=float))
    inv = sum(1.0 / minima[i] for i in result.active_sns)
    if result.enb_active:
        inv += d / minima[0]
    n = num_subchannels
    return float(n / dstar * np.expm1(np.log(2.0) * dstar * fragment_rate_bps / (n * bandwidth_hz)) * inv)


def candidate_associations(avg_snr: np.ndarray, d: int) -> list[AssociationResult]:
    """Associations obtained with the node pool forced to every admissible pattern.

    A pattern is the eNB alone, the eNB plus any SNs, or at least ``D`` SNs
    without the eNB; the association is rerun with every other node
    unavailable.  Results are ordered by nominal traffic level ``D*`` (from
    ``D`` up to ``D+M``) and deduplicated, so the eNB-only association comes
    first.
    """
    avg_snr = np.asarray(avg_snr, dtype=float)
    m1 = avg_snr.shape[0]
    sns = list(range(1, m1))
    patterns: list[tuple[int, ...]] = []
    for size in range(0, len(sns) + 1):
        for combo in itertools.combinations(sns, size):
            patterns.append((0,) + combo)
            if size >= d:
                patterns.append(combo)
    patterns.sort(key=lambda p: (d * (0 in p) + sum(1 for i in p if i != 0), p))
    seen: set[bytes] = set()
    out: list[AssociationResult] = []
    for pattern in patterns:
        idx = list(pattern)
        sets = _associate_restricted(avg_snr[idx], d, with_enb=0 in pattern)
        if sets is None:
            continue
        res = _result([{idx[i] for i in s} for s in sets], m1, d)
        key = res.beta.tobytes()
        if key not in seen:
            seen.add(key)
            out.append(res)
    return out


def associate_sweep(
    avg_snr: np.ndarray,
    d: int,
    num_subchannels: int,
    bandwidth_hz: float,
    fragment_rate_bps: float,
) -> AssociationResult:
    """Candidate association with the lowest :func:`association_objective`; earlier wins ties."""
    best: AssociationResult | None = None
    best_val = np.inf
    for res in candidate_associations(avg_snr, d):
        val = association_objective(res, avg_snr, num_subchannels, bandwidth_hz, fragment_rate_bps)
        if val < best_val:
            best, best_val = res, val
    assert best is not None
    return best


def _associate_restricted(sub: np.ndarray, d: int, with_enb: bool) -> list[set[int]] | None:
    """Association over a subset of nodes; ``sub`` row 0 is the eNB iff ``with_enb``."""
    if with_enb:
        if sub.shape[0] - 1 < d:
            # too few SNs to ever replace the eNB: everyone stays on it
            return [{0} for _ in range(sub.shape[1])]
        res = associate(sub, d)
        return [set(s) for s in res.node_sets]
    if sub.shape[0] < d:
        return None
    # no eNB: a negligible eNB row ranks last for every user, so it is never picked
    padded = np.vstack([np.full((1, sub.shape[1]), np.finfo(float).tiny), sub])
    res = associate(padded, d)
    if res.enb_active:
        return None
    return [{i - 1 for i in s} for s in res.node_sets]


def offload_gain_check(before: tuple[float, float], after: tuple[float, float], theta: float) -> bool:
    """Whether moving traffic from a deficit node to a surplus node saves on-grid power.

    ``before``/``after`` are ``(P_deficit, P_surplus)`` pairs.
    """
    saved = before[0] - after[0]
    cost = after[1] - before[1]
    return saved > cost * theta
