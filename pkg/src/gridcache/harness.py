"""Monte-Carlo trials and parameter sweeps, with CSV / plot-data output."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .channel import ChannelState, realize_channel
from .config import SimConfig
from .pipeline import (
    NetworkPlan,
    best_settled,
    case1_association,
    case1_spectrum,
    constraint_violations,
    allocate_power,
    mode_associations,
    node_targets,
    powered_candidates,
)
from .scenario import sample_scenario

# Download rates (bits per epoch) for sweeps.  The top value puts the mean
# cell-edge eNB-only on-grid power at about 20 W for theta = 0 with the
# default configuration (100 snapshots, seeds 0..99).
R_MAX_BITS = 155e3
DEFAULT_R_VALUES = tuple(float(x) for x in np.linspace(R_MAX_BITS / 10, R_MAX_BITS, 10))
DEFAULT_THETA_VALUES = (0.0, 0.4, 0.8)
DEFAULT_D_VALUES = (1, 2, 3, 4)


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    placement_mode: str
    R: float
    theta: float
    D: int
    proposed_ongrid_w: float
    case1_ongrid_w: float
    dstar: int
    case_label: str
    active_count: int
    counts: tuple[int, ...]
    min_avg_snr: tuple[float, ...]  # nan for idle nodes
    delta_w: tuple[float, ...]
    violations: tuple[str, ...] = ()


def _record(config: SimConfig, seed: int, R: float, theta: float, d: int,
            plan: NetworkPlan, case1: NetworkPlan, channel: ChannelState, check: bool) -> TrialRecord:
    assoc = plan.association
    minima = assoc.min_avg_snr(channel.avg_snr)
    m1 = channel.snr.shape[0]
    violations: tuple[str, ...] = ()
    if check:
        b = config.subchannel_bandwidth_hz
        violations = tuple(constraint_violations(plan, b)) + tuple(
            "case1 " + v for v in constraint_violations(case1, b)
        )
    return TrialRecord(
        seed=seed,
        placement_mode=config.placement_mode,
        R=float(R),
        theta=float(theta),
        D=int(d),
        proposed_ongrid_w=plan.total_ongrid_w,
        case1_ongrid_w=case1.total_ongrid_w,
        dstar=assoc.dstar,
        case_label=assoc.case_label,
        active_count=len(assoc.active_set),
        counts=tuple(int(c) for c in plan.spectrum.counts),
        min_avg_snr=tuple(minima.get(i, math.nan) for i in range(m1)),
        delta_w=tuple(float(x) for x in plan.settlement.delta_w),
        violations=violations,
    )


def snapshot_records(
    config: SimConfig,
    seed: int,
    R_values: Sequence[float],
    theta_values: Sequence[float],
    D_values: Sequence[int],
    check: bool = True,
) -> Iterator[TrialRecord]:
    """All trial records for one snapshot, reusing every theta-independent stage.

    The proposed plan and the eNB-only baseline are computed on the same
    channel realization.
    """
    scenario = sample_scenario(config, seed)
    channel = realize_channel(scenario, seed)
    m1, n, k = channel.snr.shape
    b = config.subchannel_bandwidth_hz
    energy = config.energy_rates_w
    cached_assocs: dict[int, list] = {}
    for d in D_values:
        for R in R_values:
            s = R / (config.epoch_s * d)
            targets = node_targets(m1, d, s)
            if config.association_mode == "sweep_objective":
                assocs = mode_associations(channel, d, s, b, config.association_mode)
            else:
                if d not in cached_assocs:
                    cached_assocs[d] = mode_associations(channel, d, s, b, config.association_mode)
                assocs = cached_assocs[d]
            cands = powered_candidates(channel, assocs, targets, b, energy)
            base = allocate_power(channel, case1_association(m1, k, d), case1_spectrum(m1, n), targets, b)
            for theta in theta_values:
                plan = best_settled(cands, energy, theta)
                case1 = base.settle(energy, theta)
                yield _record(config, seed, R, theta, d, plan, case1, channel, check)


def run_trial(config: SimConfig, seed: int | None = None) -> TrialRecord:
    """One snapshot at the configuration's own rate, theta and reconstruction degree."""
    seed = config.seed if seed is None else seed
    (rec,) = snapshot_records(
        config,
        seed,
        [config.download_rate_bits],
        [config.transfer_efficiency],
        [config.reconstruction_degree],
    )
    return rec


@dataclass(frozen=True)
class SweepCell:
    mode: str
    theta: float
    D: int
    R: float
    mean_proposed_w: float
    se_proposed_w: float
    mean_case1_w: float
    se_case1_w: float
    snapshots: int


@dataclass(frozen=True)
class SweepResult:
    cells: tuple[SweepCell, ...]
    trials: tuple[TrialRecord, ...]
    snapshots: int

    def cell(self, mode: str, theta: float, d: int, R: float) -> SweepCell:
        for c in self.cells:
            if c.mode == mode and c.theta == theta and c.D == d and c.R == R:
                return c
        raise KeyError((mode, theta, d, R))

    def trials_for(self, **match) -> list[TrialRecord]:
        return [t for t in self.trials if all(getattr(t, k) == v for k, v in match.items())]


def _mean_se(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        return float(arr.mean()), 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))


def run_sweep(
    config_base: SimConfig,
    R_values: Sequence[float] = DEFAULT_R_VALUES,
    theta_values: Sequence[float] = DEFAULT_THETA_VALUES,
    D_values: Sequence[int] = DEFAULT_D_VALUES,
    snapshots: int = 100,
    modes: Sequence[str] | None = None,
) -> SweepResult:
    """Grid sweep with common random numbers: snapshot ``s`` uses seed ``config.seed + s`` everywhere."""
    if snapshots < 1:
        raise ValueError("snapshots must be at least 1")
    modes = [config_base.placement_mode] if modes is None else list(modes)
    trials: list[TrialRecord] = []
    for mode in modes:
        for d in D_values:
            config_base.replace(placement_mode=mode, reconstruction_degree=int(d))  # validates D
        cfg = config_base.replace(placement_mode=mode)
        for s in range(snapshots):
            trials.extend(snapshot_records(cfg, cfg.seed + s, R_values, theta_values, D_values))
    groups: dict[tuple, list[TrialRecord]] = {}
    for t in trials:
        groups.setdefault((t.placement_mode, t.theta, t.D, t.R), []).append(t)
    cells = []
    for mode in modes:
        for theta in theta_values:
            for d in D_values:
                for R in R_values:
                    group = groups[(mode, float(theta), int(d), float(R))]
                    mp, sp = _mean_se([t.proposed_ongrid_w for t in group])
                    mc, sc = _mean_se([t.case1_ongrid_w for t in group])
                    cells.append(SweepCell(mode, float(theta), int(d), float(R), mp, sp, mc, sc, len(group)))
    trials.sort(key=lambda t: (modes.index(t.placement_mode), t.theta, t.D, t.R, t.seed))
    return SweepResult(cells=tuple(cells), trials=tuple(trials), snapshots=snapshots)


SWEEP_COLUMNS = [
    "mode", "theta", "D", "R_bits", "mean_proposed_w", "se_proposed_w",
    "mean_case1_w", "se_case1_w", "snapshots",
]
TRIAL_COLUMNS = [
    "seed", "placement_mode", "R_bits", "theta", "D", "proposed_ongrid_w", "case1_ongrid_w",
    "dstar", "case_label", "active_count", "counts", "min_avg_snr", "delta_w",
]


def _num(x: float) -> str:
    return repr(float(x))


def _joined(values: Sequence[float]) -> str:
    return ";".join(str(v) if isinstance(v, int) else _num(v) for v in values)


def write_trials(trials: Sequence[TrialRecord], path: Path) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_COLUMNS)
        for t in trials:
            w.writerow([
                t.seed, t.placement_mode, _num(t.R), _num(t.theta), t.D,
                _num(t.proposed_ongrid_w), _num(t.case1_ongrid_w), t.dstar, t.case_label,
                t.active_count, _joined(t.counts), _joined(t.min_avg_snr), _joined(t.delta_w),
            ])
    return path


def panel_filename(mode: str, theta: float) -> str:
    return f"plot_{mode}_theta{theta:g}.dat"


def emit(result: SweepResult, out_dir: str | Path) -> list[Path]:
    """Write ``sweep.csv``, ``trials.csv`` and one plot-data file per (mode, theta) panel."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        sweep_path = out / "sweep.csv"
        with sweep_path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SWEEP_COLUMNS)
            for c in result.cells:
                w.writerow([
                    c.mode, _num(c.theta), c.D, _num(c.R), _num(c.mean_proposed_w), _num(c.se_proposed_w),
                    _num(c.mean_case1_w), _num(c.se_case1_w), c.snapshots,
                ])
        written.append(sweep_path)
        written.append(write_trials(result.trials, out / "trials.csv"))
        panels: dict[tuple[str, float], list[SweepCell]] = {}
        for c in result.cells:
            panels.setdefault((c.mode, c.theta), []).append(c)
        for (mode, theta), cells in panels.items():
            ds = sorted({c.D for c in cells})
            Rs = sorted({c.R for c in cells})
            by_key = {(c.D, c.R): c for c in cells}
            path = out / panel_filename(mode, theta)
            with path.open("w", encoding="utf-8", newline="\n") as fh:
                fh.write(f"# mode={mode} theta={theta:g} snapshots={result.snapshots}\n")
                fh.write("# on-grid power in W, mean over snapshots\n")
                fh.write("# " + " ".join(["R_bits"] + [f"proposed_D{d}" for d in ds] + ["case1"]) + "\n")
                for R in Rs:
                    row = [_num(R)] + [_num(by_key[(d, R)].mean_proposed_w) for d in ds]
                    row.append(_num(by_key[(ds[0], R)].mean_case1_w))
                    fh.write(" ".join(row) + "\n")
            written.append(path)
        return written
    except OSError as exc:
        raise OSError(f"cannot write results under {out}: {exc}") from exc
