"""Exhaustive solver for tiny instances, used to certify the heuristic pipeline.

Every association satisfying the reconstruction constraint is paired with
every assignment of subchannels to nodes.  Each pairing is priced by exact
water-filling on the worst-user SNRs and the optimal energy settlement.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .channel import ChannelState
from .config import ASSOCIATION_MODES
from .gridflow import FlowSettlement, ongrid_closed_form, settle
from .pipeline import NetworkPlan, constraint_violations, node_targets, plan_network
from .powerplan import waterfill

MAX_SNS = 2
MAX_SUBCHANNELS = 4
MAX_USERS = 3

# On-grid totals below this are treated as zero when forming ratios.
ZERO_W = 1e-12


class SizeGuardError(ValueError):
    pass


@dataclass(frozen=True)
class TinyInstance:
    snr: np.ndarray  # (M+1, N, K)
    reconstruction_degree: int
    fragment_rate_bps: float
    energy_rates_w: np.ndarray
    theta: float
    bandwidth_hz: float = 1.0
    seed: int | None = None

    def __post_init__(self) -> None:
        snr = np.asarray(self.snr, dtype=float)
        if snr.ndim != 3:
            raise ValueError("snr must be indexed (node, subchannel, user)")
        m1, n, k = snr.shape
        if m1 - 1 > MAX_SNS or n > MAX_SUBCHANNELS or k > MAX_USERS:
            raise SizeGuardError(
                f"instance too large for exhaustive search (M={m1 - 1}, N={n}, K={k}; "
                f"limits {MAX_SNS}, {MAX_SUBCHANNELS}, {MAX_USERS})"
            )
        if m1 < 2 or k < 1:
            raise ValueError("need at least one SN and one user")
        if not 1 <= self.reconstruction_degree <= m1 - 1:
            raise ValueError("reconstruction degree must lie in [1, M]")
        if n < m1:
            raise ValueError("need at least M+1 subchannels")
        if np.any(snr <= 0) or not np.all(np.isfinite(snr)):
            raise ValueError("SNRs must be positive and finite")
        energy = np.asarray(self.energy_rates_w, dtype=float)
        if energy.shape != (m1,):
            raise ValueError("one energy rate per node required")
        snr.setflags(write=False)
        energy.setflags(write=False)
        object.__setattr__(self, "snr", snr)
        object.__setattr__(self, "energy_rates_w", energy)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.snr.shape

    @property
    def targets_bps(self) -> list[float]:
        return node_targets(self.snr.shape[0], self.reconstruction_degree, self.fragment_rate_bps)

    @property
    def channel(self) -> ChannelState:
        return ChannelState.from_snr(self.snr)

    def relabeled(self, sn_perm: Sequence[int] | None = None, sc_perm: Sequence[int] | None = None) -> "TinyInstance":
        """Same instance with SNs and/or subchannels permuted (the eNB stays node 0)."""
        m1, n, _ = self.snr.shape
        nodes = [0] + [1 + int(p) for p in (sn_perm if sn_perm is not None else range(m1 - 1))]
        scs = list(sc_perm) if sc_perm is not None else list(range(n))
        return TinyInstance(
            snr=self.snr[nodes][:, scs],
            reconstruction_degree=self.reconstruction_degree,
            fragment_rate_bps=self.fragment_rate_bps,
            energy_rates_w=self.energy_rates_w[nodes],
            theta=self.theta,
            bandwidth_hz=self.bandwidth_hz,
            seed=self.seed,
        )


@dataclass(frozen=True)
class OracleSolution:
    best_beta: np.ndarray
    best_alpha: np.ndarray
    best_total_ongrid_w: float
    explored_count: int
    settlement: FlowSettlement = field(repr=False)


def _user_options(m1: int, d: int) -> list[int]:
    """Node bitmasks a single user may connect to."""
    out = []
    for mask in range(1, 1 << m1):
        enb = mask & 1
        sns = bin(mask >> 1).count("1")
        if d * enb + sns >= d:
            out.append(mask)
    return out


def _power_table(inst: TinyInstance) -> np.ndarray:
    """``table[i, user_mask, sc_mask]``: node power, ``inf`` where the rate is unreachable."""
    m1, n, k = inst.snr.shape
    targets = inst.targets_bps
    table = np.zeros((m1, 1 << k, 1 << n))
    for i in range(m1):
        for umask in range(1, 1 << k):
            users = [u for u in range(k) if umask >> u & 1]
            minima = inst.snr[i][:, users].min(axis=1)
            for scmask in range(1 << n):
                scs = [j for j in range(n) if scmask >> j & 1]
                if not scs:
                    table[i, umask, scmask] = 0.0 if targets[i] == 0 else np.inf
                    continue
                table[i, umask, scmask] = waterfill(minima[scs], targets[i], inst.bandwidth_hz).total_power_w
    return table


def solve_exact(inst: TinyInstance) -> OracleSolution:
    m1, n, k = inst.snr.shape
    d = inst.reconstruction_degree
    table = _power_table(inst)

    alphas = np.array(list(itertools.product(range(m1), repeat=n)), dtype=int)  # (A, N) owner per SC
    bit = 1 << np.arange(n)
    sc_masks = np.stack([((alphas == i) * bit).sum(axis=1) for i in range(m1)], axis=1)  # (A, M+1)

    best_val = math.inf
    best: tuple[tuple[int, ...], int] | None = None
    explored = 0
    for choice in itertools.product(_user_options(m1, d), repeat=k):
        umask = [sum(1 << u for u in range(k) if choice[u] >> i & 1) for i in range(m1)]
        powers = np.stack([table[i, umask[i], sc_masks[:, i]] for i in range(m1)], axis=1)
        explored += powers.shape[0]
        finite = np.all(np.isfinite(powers), axis=1)
        if not finite.any():
            continue
        vals = np.full(powers.shape[0], np.inf)
        vals[finite] = ongrid_closed_form(powers[finite], inst.energy_rates_w, inst.theta)
        a = int(np.argmin(vals))
        if vals[a] < best_val:
            best_val = float(vals[a])
            best = (choice, a)
    assert best is not None, "every tiny instance admits the eNB-only plan"

    choice, a = best
    beta = np.zeros((m1, k), dtype=np.int8)
    for u, mask in enumerate(choice):
        for i in range(m1):
            beta[i, u] = mask >> i & 1
    alpha = np.zeros((m1, n), dtype=np.int8)
    alpha[alphas[a], np.arange(n)] = 1
    umask = [sum(1 << u for u in range(k) if beta[i, u]) for i in range(m1)]
    powers = np.array([table[i, umask[i], sc_masks[a, i]] for i in range(m1)])
    s = settle(powers, inst.energy_rates_w, inst.theta)
    return OracleSolution(
        best_beta=beta,
        best_alpha=alpha,
        best_total_ongrid_w=s.total_ongrid_w,
        explored_count=explored,
        settlement=s,
    )


def compare(oracle: OracleSolution | TinyInstance | float, heuristic_value: float) -> float:
    """Heuristic-to-optimum ratio: 1 when both vanish, ``inf`` when only the optimum does."""
    if isinstance(oracle, TinyInstance):
        oracle = solve_exact(oracle)
    opt = oracle.best_total_ongrid_w if isinstance(oracle, OracleSolution) else float(oracle)
    if not (math.isfinite(opt) and math.isfinite(heuristic_value)) or opt < 0:
        raise ValueError("values must be finite and the optimum nonnegative")
    if opt <= ZERO_W:
        return 1.0 if heuristic_value <= ZERO_W else math.inf
    return heuristic_value / opt


def heuristic_plan(inst: TinyInstance, association_mode: str = ASSOCIATION_MODES[0]) -> NetworkPlan:
    return plan_network(
        inst.channel,
        inst.reconstruction_degree,
        inst.fragment_rate_bps,
        inst.bandwidth_hz,
        inst.energy_rates_w,
        inst.theta,
        association_mode=association_mode,
    )


def random_tiny_instance(seed: int, d: int = 1) -> TinyInstance:
    """Synthetic instance within the size guards.

    Link SNRs are log-uniform over 0-30 dB with unit-mean exponential
    per-subchannel fading; energy budgets are drawn on the scale of the
    eNB-only power so that both surplus and deficit nodes occur.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(101,))))
    m = int(rng.integers(max(1, d), MAX_SNS + 1))
    n = int(rng.integers(m + 1, MAX_SUBCHANNELS + 1))
    k = int(rng.integers(1, MAX_USERS + 1))
    slow = 10.0 ** rng.uniform(0.0, 3.0, size=(m + 1, 1, k))
    snr = slow * rng.exponential(1.0, size=(m + 1, n, k))
    bits = rng.uniform(0.25, 2.0)  # per-fragment rate in bit/s/Hz
    scale = n * (2.0 ** (d * bits / n) - 1.0) / snr[0].min(axis=1).mean()
    energy = rng.uniform(0.0, 0.4, size=m + 1) * scale
    energy[1:] *= rng.uniform(0.0, 0.2)
    return TinyInstance(
        snr=snr,
        reconstruction_degree=d,
        fragment_rate_bps=bits,
        energy_rates_w=energy,
        theta=float(rng.uniform(0.0, 1.0)),
        bandwidth_hz=1.0,
        seed=seed,
    )


@dataclass(frozen=True)
class CertificationRow:
    instance_seed: int
    oracle_w: float
    heuristic_w: float
    ratio: float
    violations: tuple[str, ...]


def certify(seeds: Iterable[int], d: int = 1, association_mode: str = ASSOCIATION_MODES[0]) -> list[CertificationRow]:
    rows = []
    for seed in seeds:
        inst = random_tiny_instance(seed, d)
        opt = solve_exact(inst)
        plan = heuristic_plan(inst, association_mode)
        rows.append(
            CertificationRow(
                instance_seed=seed,
                oracle_w=opt.best_total_ongrid_w,
                heuristic_w=plan.total_ongrid_w,
                ratio=compare(opt, plan.total_ongrid_w),
                violations=tuple(constraint_violations(plan, inst.bandwidth_hz)),
            )
        )
    return rows


def ratio_summary(rows: Sequence[CertificationRow]) -> dict[str, float]:
    ratios = np.array([r.ratio for r in rows], dtype=float)
    return {
        "min": float(np.min(ratios)),
        "median": float(np.median(ratios)),
        "max": float(np.max(ratios)),
    }


def write_certification(rows: Sequence[CertificationRow], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance_seed", "oracle_w", "heuristic_w", "ratio"])
        for r in rows:
            w.writerow([r.instance_seed, repr(r.oracle_w), repr(r.heuristic_w), repr(r.ratio)])
    return path
