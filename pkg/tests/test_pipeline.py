import dataclasses

import numpy as np
import pytest

from gridcache.channel import realize_channel
from gridcache.config import SimConfig
from gridcache.gridflow import settle
from gridcache.pipeline import (
    constraint_violations,
    node_targets,
    per_subchannel_minima,
    plan_case1,
    plan_network,
)
from gridcache.scenario import sample_scenario

SMALL = SimConfig(num_subchannels=12, num_users=6)


def _plan(cfg=SMALL, seed=0, mode="sweep_ongrid", theta=0.4):
    ch = realize_channel(sample_scenario(cfg, seed))
    args = (ch, cfg.reconstruction_degree, cfg.fragment_rate_bps, cfg.subchannel_bandwidth_hz, cfg.energy_rates_w, theta)
    return ch, plan_network(*args, association_mode=mode), plan_case1(*args)


@pytest.mark.parametrize("mode", ["sweep_ongrid", "sweep_objective", "single"])
def test_plans_are_feasible(mode):
    for seed in range(10):
        _, plan, base = _plan(seed=seed, mode=mode)
        assert constraint_violations(plan, SMALL.subchannel_bandwidth_hz) == []
        assert constraint_violations(base, SMALL.subchannel_bandwidth_hz) == []


def test_sweep_never_worse_than_case1():
    for seed in range(10):
        _, plan, base = _plan(seed=seed)
        assert plan.total_ongrid_w <= base.total_ongrid_w + 1e-12


def test_case1_shape():
    _, _, base = _plan()
    assert base.association.case_label == "I"
    assert base.spectrum.counts.tolist() == [12, 0, 0, 0, 0]
    assert base.targets_bps == tuple(node_targets(5, 2, SMALL.fragment_rate_bps))


def test_violations_detected():
    _, plan, _ = _plan()
    b = SMALL.subchannel_bandwidth_hz
    broken = dataclasses.replace(plan, targets_bps=tuple(2 * t for t in plan.targets_bps))
    assert any(v.startswith("c1") for v in constraint_violations(broken, b))
    alpha = plan.spectrum.alpha.copy()
    alpha[:, 0] = 0
    bad_spec = dataclasses.replace(plan.spectrum, alpha=alpha)
    assert any(v.startswith("c4") for v in constraint_violations(dataclasses.replace(plan, spectrum=bad_spec), b))
    beta = np.zeros_like(plan.association.beta)
    bad_assoc = dataclasses.replace(plan.association, beta=beta)
    assert any(v.startswith("c5") for v in constraint_violations(dataclasses.replace(plan, association=bad_assoc), b))
    s = plan.settlement
    over = dataclasses.replace(s, delta_w=s.delta_w - 100.0)
    assert any(v.startswith("c3") for v in constraint_violations(dataclasses.replace(plan, settlement=over), b))


def test_per_subchannel_minima():
    snr = np.arange(1, 25, dtype=float).reshape(2, 3, 4)
    beta = np.array([[1, 0, 1, 0], [0, 0, 0, 0]])
    out = per_subchannel_minima(snr, beta)
    assert np.array_equal(out[0], snr[0][:, [0, 2]].min(axis=1))
    assert np.all(np.isinf(out[1]))


def test_settlement_is_of_node_powers():
    _, plan, _ = _plan()
    again = settle(plan.settlement.node_power_w, plan.settlement.energy_rates_w, 0.4)
    assert again.total_ongrid_w == plan.total_ongrid_w
