import itertools
import math

import numpy as np
import pytest

from gridcache.association import is_feasible
from gridcache.gridflow import settle
from gridcache.oracle import (
    SizeGuardError,
    TinyInstance,
    certify,
    compare,
    heuristic_plan,
    random_tiny_instance,
    ratio_summary,
    solve_exact,
    write_certification,
)
from gridcache.pipeline import constraint_violations
from gridcache.powerplan import waterfill


def _naive_optimum(inst: TinyInstance) -> float:
    """Plain double loop over associations and subchannel owners, using the per-node settlement."""
    m1, n, k = inst.snr.shape
    targets = inst.targets_bps
    best = math.inf
    for b in itertools.product([0, 1], repeat=m1 * k):
        beta = np.array(b).reshape(m1, k)
        if not is_feasible(beta, inst.reconstruction_degree):
            continue
        for owners in itertools.product(range(m1), repeat=n):
            powers = []
            for i in range(m1):
                users = np.flatnonzero(beta[i])
                scs = [j for j in range(n) if owners[j] == i]
                if users.size == 0:
                    powers.append(0.0)
                    continue
                if not scs:
                    break
                g = inst.snr[i][np.ix_(scs, users)].min(axis=1)
                powers.append(waterfill(g, targets[i], inst.bandwidth_hz).total_power_w)
            else:
                best = min(best, settle(powers, inst.energy_rates_w, inst.theta).total_ongrid_w)
    return best


def test_dominant_sn_with_ample_energy():
    snr = np.empty((2, 2, 1))
    snr[0] = 1.0
    snr[1] = 100.0
    inst = TinyInstance(snr, 1, 1.0, [0.0, 10.0], 0.0)
    sol = solve_exact(inst)
    assert sol.best_total_ongrid_w == 0.0
    assert sol.best_beta[:, 0].tolist() == [0, 1]


def test_theta_irrelevant_without_green_energy():
    for seed in range(20):
        base = random_tiny_instance(seed)
        vals = []
        for theta in (0.0, 0.5, 1.0):
            inst = TinyInstance(base.snr, 1, base.fragment_rate_bps, np.zeros(base.snr.shape[0]), theta)
            vals.append(solve_exact(inst).best_total_ongrid_w)
        assert vals[0] == pytest.approx(vals[1], rel=1e-12) == pytest.approx(vals[2], rel=1e-12)


def test_relabel_invariance():
    for seed in range(30):
        inst = random_tiny_instance(seed)
        m1, n, _ = inst.snr.shape
        ref = solve_exact(inst).best_total_ongrid_w
        rng = np.random.default_rng(seed)
        moved = inst.relabeled(rng.permutation(m1 - 1), rng.permutation(n))
        assert solve_exact(moved).best_total_ongrid_w == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_matches_naive_enumeration():
    for seed in range(25):
        inst = random_tiny_instance(seed)
        if inst.snr.shape[1] > 3 and inst.snr.shape[2] > 2:
            continue
        assert solve_exact(inst).best_total_ongrid_w == pytest.approx(_naive_optimum(inst), rel=1e-9, abs=1e-12)


def test_solution_is_feasible():
    for seed in range(40):
        inst = random_tiny_instance(seed)
        sol = solve_exact(inst)
        assert is_feasible(sol.best_beta, inst.reconstruction_degree)
        assert np.all(sol.best_alpha.sum(axis=0) == 1)
        for i, target in enumerate(inst.targets_bps):
            users = np.flatnonzero(sol.best_beta[i])
            if users.size:
                scs = np.flatnonzero(sol.best_alpha[i])
                alloc = waterfill(inst.snr[i][np.ix_(scs, users)].min(axis=1), target, inst.bandwidth_hz)
                assert alloc.achieved_rate_bps == pytest.approx(target, rel=1e-9)
        s = sol.settlement
        assert np.all(s.delta_w <= s.energy_rates_w + 1e-12)
        assert sol.explored_count > 0


def test_heuristic_never_beats_oracle():
    rows = certify(range(50))
    for r in rows:
        assert r.heuristic_w >= r.oracle_w - 1e-9 * max(1.0, r.oracle_w)
        assert r.violations == ()
        assert r.ratio >= 1.0 - 1e-9


def test_heuristic_plan_feasible_all_modes():
    inst = random_tiny_instance(3)
    for mode in ("sweep_ongrid", "sweep_objective", "single"):
        assert constraint_violations(heuristic_plan(inst, mode), inst.bandwidth_hz) == []


def test_size_guards():
    with pytest.raises(SizeGuardError):
        TinyInstance(np.ones((4, 4, 1)), 1, 1.0, np.zeros(4), 0.5)
    with pytest.raises(SizeGuardError):
        TinyInstance(np.ones((2, 5, 1)), 1, 1.0, np.zeros(2), 0.5)
    with pytest.raises(SizeGuardError):
        TinyInstance(np.ones((2, 2, 4)), 1, 1.0, np.zeros(2), 0.5)
    with pytest.raises(ValueError):
        TinyInstance(np.ones((2, 2, 1)), 2, 1.0, np.zeros(2), 0.5)


def test_compare_examples():
    assert compare(3.0, 3.0) == 1.0
    assert compare(3.0, 3.3) == pytest.approx(1.1)
    assert compare(0.0, 0.0) == 1.0
    assert compare(0.0, 1.0) == math.inf
    with pytest.raises(ValueError):
        compare(-1.0, 1.0)


def test_random_instances_within_guards_and_deterministic():
    for seed in range(100):
        a, b = random_tiny_instance(seed), random_tiny_instance(seed)
        assert a.snr.tobytes() == b.snr.tobytes()
        m1, n, k = a.snr.shape
        assert m1 - 1 <= 2 and n <= 4 and k <= 3


def test_certification_report(tmp_path):
    rows = certify(range(5))
    text = write_certification(rows, tmp_path / "c.csv").read_text().splitlines()
    assert text[0] == "instance_seed,oracle_w,heuristic_w,ratio"
    assert len(text) == 6
    summary = ratio_summary(rows)
    assert summary["min"] <= summary["median"] <= summary["max"]
