"""End-to-end planning for one channel realization, and constraint checking."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .association import (
    AssociationResult,
    associate,
    associate_sweep,
    candidate_associations,
    is_feasible,
)
from .channel import ChannelState
from .config import ASSOCIATION_MODES
from .gridflow import FlowSettlement, credit_balance, settle
from .powerplan import PowerAllocation, power_at_count, waterfill
from .spectrum import SpectrumPlan, allocate_counts, select_subchannels

RATE_RTOL = 1e-9

# "sweep_ongrid": rerun the association for every forced node pattern (traffic
#     levels D..D+M) and keep the plan with the lowest on-grid power.
# "sweep_objective": same candidates, ranked by the equal-split power estimate.
# "single": one pass of the association over all nodes.
DEFAULT_ASSOCIATION_MODE = ASSOCIATION_MODES[0]


@dataclass(frozen=True)
class NetworkPlan:
    association: AssociationResult
    spectrum: SpectrumPlan
    allocations: tuple[PowerAllocation | None, ...]  # None for idle nodes
    settlement: FlowSettlement
    targets_bps: tuple[float, ...]

    @property
    def total_ongrid_w(self) -> float:
        return self.settlement.total_ongrid_w


def node_targets(num_nodes: int, d: int, fragment_rate_bps: float) -> list[float]:
    return [d * fragment_rate_bps] + [fragment_rate_bps] * (num_nodes - 1)


def per_subchannel_minima(snr: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Worst-user SNR per (node, subchannel); rows of idle nodes are ``inf``."""
    m1, n, _ = snr.shape
    out = np.full((m1, n), np.inf)
    for i in range(m1):
        users = np.flatnonzero(beta[i])
        if users.size:
            out[i] = snr[i][:, users].min(axis=1)
    return out


@dataclass(frozen=True)
class PoweredPlan:
    """Association, spectrum and per-node powers; everything but the energy settlement."""

    association: AssociationResult
    spectrum: SpectrumPlan
    allocations: tuple[PowerAllocation | None, ...]
    node_power_w: np.ndarray
    targets_bps: tuple[float, ...]

    def settle(self, energy_rates_w: Sequence[float], theta: float) -> NetworkPlan:
        return NetworkPlan(
            association=self.association,
            spectrum=self.spectrum,
            allocations=self.allocations,
            settlement=settle(self.node_power_w, energy_rates_w, theta),
            targets_bps=self.targets_bps,
        )


def allocate_power(
    channel: ChannelState,
    association: AssociationResult,
    spectrum: SpectrumPlan,
    targets: Sequence[float],
    bandwidth_hz: float,
) -> PoweredPlan:
    """Water-fill every active node over its own subchannels."""
    minima = per_subchannel_minima(channel.snr, association.beta)
    m1 = channel.snr.shape[0]
    allocations: list[PowerAllocation | None] = []
    powers = np.zeros(m1)
    for i in range(m1):
        if not association.beta[i].any():
            allocations.append(None)
            continue
        js = np.flatnonzero(spectrum.alpha[i])
        alloc = waterfill(minima[i, js], targets[i], bandwidth_hz, node=i)
        allocations.append(alloc)
        powers[i] = alloc.total_power_w
    powers.setflags(write=False)
    return PoweredPlan(association, spectrum, tuple(allocations), powers, tuple(float(t) for t in targets))


def power_and_settle(
    channel: ChannelState,
    association: AssociationResult,
    spectrum: SpectrumPlan,
    targets: Sequence[float],
    bandwidth_hz: float,
    energy_rates_w: Sequence[float],
    theta: float,
) -> NetworkPlan:
    return allocate_power(channel, association, spectrum, targets, bandwidth_hz).settle(energy_rates_w, theta)


def assign_spectrum(
    channel: ChannelState,
    association: AssociationResult,
    targets: Sequence[float],
    bandwidth_hz: float,
    energy_rates_w: Sequence[float],
) -> SpectrumPlan:
    m1, n, _ = channel.snr.shape
    min_avg = association.min_avg_snr(channel.avg_snr)
    counts = allocate_counts(
        association.active_set, min_avg, targets, energy_rates_w, n, bandwidth_hz, num_nodes=m1
    )
    node_power = np.zeros(m1)
    for i in association.active_set:
        node_power[i] = power_at_count(min_avg[i], targets[i], bandwidth_hz, int(counts[i]))
    return select_subchannels(
        counts, per_subchannel_minima(channel.snr, association.beta), energy_rates_w, node_power
    )


def mode_associations(
    channel: ChannelState,
    d: int,
    fragment_rate_bps: float,
    bandwidth_hz: float,
    association_mode: str = DEFAULT_ASSOCIATION_MODE,
) -> list[AssociationResult]:
    """Associations the pipeline will consider under ``association_mode``."""
    n = channel.snr.shape[1]
    if association_mode == "sweep_ongrid":
        return candidate_associations(channel.avg_snr, d)
    if association_mode == "sweep_objective":
        return [associate_sweep(channel.avg_snr, d, n, bandwidth_hz, fragment_rate_bps)]
    if association_mode == "single":
        return [associate(channel.avg_snr, d)]
    raise ValueError(f"unknown association mode {association_mode!r}")


def powered_candidates(
    channel: ChannelState,
    associations: Sequence[AssociationResult],
    targets: Sequence[float],
    bandwidth_hz: float,
    energy_rates_w: Sequence[float],
) -> list[PoweredPlan]:
    out = []
    for assoc in associations:
        spectrum = assign_spectrum(channel, assoc, targets, bandwidth_hz, energy_rates_w)
        out.append(allocate_power(channel, assoc, spectrum, targets, bandwidth_hz))
    return out


def best_settled(candidates: Sequence[PoweredPlan], energy_rates_w: Sequence[float], theta: float) -> NetworkPlan:
    """Settle every candidate and keep the lowest on-grid total; earlier wins ties."""
    best: NetworkPlan | None = None
    for cand in candidates:
        plan = cand.settle(energy_rates_w, theta)
        if best is None or plan.total_ongrid_w < best.total_ongrid_w:
            best = plan
    assert best is not None
    return best


def plan_network(
    channel: ChannelState,
    d: int,
    fragment_rate_bps: float,
    bandwidth_hz: float,
    energy_rates_w: Sequence[float],
    theta: float,
    association_mode: str = DEFAULT_ASSOCIATION_MODE,
) -> NetworkPlan:
    """Associate users, split and pick spectrum, water-fill, settle."""
    m1 = channel.snr.shape[0]
    targets = node_targets(m1, d, fragment_rate_bps)
    assocs = mode_associations(channel, d, fragment_rate_bps, bandwidth_hz, association_mode)
    cands = powered_candidates(channel, assocs, targets, bandwidth_hz, energy_rates_w)
    return best_settled(cands, energy_rates_w, theta)


def case1_association(num_nodes: int, num_users: int, d: int) -> AssociationResult:
    beta = np.zeros((num_nodes, num_users), dtype=np.int8)
    beta[0] = 1
    beta.setflags(write=False)
    return AssociationResult(beta=beta, reconstruction_degree=d, node_sets=tuple(frozenset({0}) for _ in range(num_users)))


def case1_spectrum(num_nodes: int, num_subchannels: int) -> SpectrumPlan:
    counts = np.zeros(num_nodes, dtype=int)
    counts[0] = num_subchannels
    alpha = np.zeros((num_nodes, num_subchannels), dtype=np.int8)
    alpha[0] = 1
    counts.setflags(write=False)
    alpha.setflags(write=False)
    return SpectrumPlan(counts=counts, alpha=alpha)


def plan_case1(
    channel: ChannelState,
    d: int,
    fragment_rate_bps: float,
    bandwidth_hz: float,
    energy_rates_w: Sequence[float],
    theta: float,
) -> NetworkPlan:
    """Baseline: the eNB multicasts the whole file to everyone over all subchannels."""
    m1, n, k = channel.snr.shape
    targets = node_targets(m1, d, fragment_rate_bps)
    return power_and_settle(
        channel,
        case1_association(m1, k, d),
        case1_spectrum(m1, n),
        targets,
        bandwidth_hz,
        energy_rates_w,
        theta,
    )


def constraint_violations(plan: NetworkPlan, bandwidth_hz: float, atol: float = 1e-9) -> list[str]:
    """Names of the problem constraints the plan breaks (empty when feasible)."""
    bad: list[str] = []
    beta = plan.association.beta
    alpha = plan.spectrum.alpha
    d = plan.association.reconstruction_degree
    s = plan.settlement
    for i, alloc in enumerate(plan.allocations):
        if beta[i].any():
            t = plan.targets_bps[i]
            if alloc is None or abs(alloc.achieved_rate_bps - t) > RATE_RTOL * max(t, 1.0):
                bad.append(f"c1: node {i} rate")
            if alloc is not None and np.any(alloc.power_w < 0):
                bad.append(f"c6: node {i} negative power")
    if np.any(s.delta_w > s.energy_rates_w + atol):
        bad.append("c2: injection exceeds harvested energy")
    if credit_balance(s) < -atol * max(1.0, float(np.abs(s.delta_w).sum())):
        bad.append("c3: credit overdrawn")
    if not np.all(alpha.sum(axis=0) == 1):
        bad.append("c4: subchannels not partitioned")
    if not is_feasible(beta, d):
        bad.append("c5: user cannot rebuild the file")
    if not (set(np.unique(alpha)) <= {0, 1} and set(np.unique(beta)) <= {0, 1}):
        bad.append("c7: non-binary indicator")
    expected_on = np.maximum(s.node_power_w - (s.energy_rates_w - s.delta_w), 0.0)
    if not np.allclose(expected_on, s.ongrid_w, rtol=0, atol=atol * max(1.0, float(s.node_power_w.sum()))):
        bad.append("on-grid power inconsistent with flows")
    return bad
