"""Green-energy exchange through grid credit and the resulting on-grid power."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FlowSettlement:
    node_power_w: np.ndarray
    energy_rates_w: np.ndarray
    theta: float
    delta_w: np.ndarray  # > 0 injected to the grid, < 0 credit drawn
    ongrid_w: np.ndarray
    total_ongrid_w: float

    @property
    def surplus_set(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.node_power_w < self.energy_rates_w))

    @property
    def deficit_set(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.node_power_w >= self.energy_rates_w))


def settle(node_power_w, energy_rates_w, theta: float) -> FlowSettlement:
    """Optimal power flow for fixed node powers.

    Surplus nodes (``P < E``) inject everything they do not use.  The
    resulting credit pool ``theta * sum(injected)`` is handed to deficit
    nodes in ascending index order, each taking as much as it still needs.
    """
    p = np.asarray(node_power_w, dtype=float)
    e = np.asarray(energy_rates_w, dtype=float)
    if p.shape != e.shape:
        raise ValueError("power and energy vectors differ in length")
    if np.any(p < 0):
        raise ValueError("node powers must be nonnegative")
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")

    surplus = p < e
    delta = np.zeros_like(p)
    delta[surplus] = e[surplus] - p[surplus]
    pool = theta * float(delta[surplus].sum())
    ongrid = np.zeros_like(p)
    for i in np.flatnonzero(~surplus):
        need = p[i] - e[i]
        take = min(need, pool)
        pool -= take
        delta[i] = -take
        ongrid[i] = need - take
    return FlowSettlement(
        node_power_w=p,
        energy_rates_w=e,
        theta=float(theta),
        delta_w=delta,
        ongrid_w=ongrid,
        total_ongrid_w=float(ongrid.sum()),
    )


def total_objective(settlement: FlowSettlement) -> float:
    return float(settlement.ongrid_w.sum())


def ongrid_closed_form(node_power_w, energy_rates_w, theta: float) -> np.ndarray | float:
    """Total on-grid power from aggregates alone.

    ``max(0, sum_def(P) + theta*sum_sur(P) - sum_def(E) - theta*sum_sur(E))``.
    Broadcasts over leading axes of ``node_power_w``; the node axis is last.
    """
    p = np.asarray(node_power_w, dtype=float)
    e = np.asarray(energy_rates_w, dtype=float)
    weight = np.where(p < e, theta, 1.0)
    val = np.maximum(0.0, np.sum(weight * (p - e), axis=-1))
    return float(val) if np.ndim(val) == 0 else val


def credit_balance(settlement: FlowSettlement) -> float:
    """Left side of the credit constraint: earned credit minus credit spent."""
    d = settlement.delta_w
    return float(np.sum(np.where(d > 0, settlement.theta * d, d)))
