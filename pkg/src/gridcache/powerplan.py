"""Rate-constrained water-filling and the node power-vs-subchannel-count curve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PowerAllocation:
    node: int | None
    active_subchannels: tuple[int, ...]  # positions into the input SNR vector
    power_w: np.ndarray
    water_level: float
    target_rate_bps: float
    achieved_rate_bps: float

    @property
    def total_power_w(self) -> float:
        return float(self.power_w.sum())


def achieved_rate(power_w: np.ndarray, snrs: np.ndarray, bandwidth_hz: float) -> float:
    return float(bandwidth_hz * np.sum(np.log2(1.0 + np.asarray(power_w) * np.asarray(snrs))))


def waterfill(
    min_snrs: np.ndarray,
    target_rate_bps: float,
    bandwidth_hz: float,
    node: int | None = None,
) -> PowerAllocation:
    """Minimum-power allocation meeting ``target_rate_bps`` over parallel channels.

    The water level over an active set A is
    ``(2**(target/B) / prod(gamma_A)) ** (1/|A|)``; channels whose inverse
    SNR reaches the level are dropped and the level recomputed until no
    channel is dropped.
    """
    g = np.asarray(min_snrs, dtype=float).ravel()
    if target_rate_bps < 0:
        raise ValueError("target rate must be nonnegative")
    if g.size == 0:
        if target_rate_bps > 0:
            raise ValueError("positive target with no subchannels")
        return PowerAllocation(node, (), np.zeros(0), 0.0, target_rate_bps, 0.0)
    if np.any(~np.isfinite(g)) or np.any(g <= 0):
        raise ValueError("SNRs must be positive and finite")
    if target_rate_bps == 0:
        return PowerAllocation(node, (), np.zeros(g.size), float(1.0 / g.max()), 0.0, 0.0)

    bits = target_rate_bps / bandwidth_hz
    log_g = np.log2(g)
    active = np.ones(g.size, dtype=bool)
    while True:
        n = int(active.sum())
        log_level = (bits - log_g[active].sum()) / n
        # drop j when 1/gamma_j >= level, i.e. log2(gamma_j) <= -log2(level)
        drop = active & (log_g <= -log_level)
        if not drop.any():
            break
        active &= ~drop
    level = 2.0**log_level
    power = np.zeros(g.size)
    power[active] = level - 1.0 / g[active]
    return PowerAllocation(
        node=node,
        active_subchannels=tuple(int(j) for j in np.flatnonzero(active)),
        power_w=power,
        water_level=float(level),
        target_rate_bps=float(target_rate_bps),
        achieved_rate_bps=achieved_rate(power, g, bandwidth_hz),
    )


def node_power_curve(
    min_avg_snr: float,
    target_rate_bps: float,
    bandwidth_hz: float,
    max_count: int,
) -> np.ndarray:
    """Total node power when given 1..max_count equal-SNR subchannels.

    ``P(n) = n * (2**(target/(B n)) - 1) / gamma``.
    """
    if not min_avg_snr > 0:
        raise ValueError("SNR must be positive")
    n = np.arange(1, max_count + 1, dtype=float)
    return n * np.expm1(np.log(2.0) * target_rate_bps / (bandwidth_hz * n)) / min_avg_snr


def power_at_count(min_avg_snr: float, target_rate_bps: float, bandwidth_hz: float, count: int) -> float:
    return float(count * np.expm1(np.log(2.0) * target_rate_bps / (bandwidth_hz * count)) / min_avg_snr)
