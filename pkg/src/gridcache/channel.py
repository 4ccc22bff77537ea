"""Downlink channel realization: path loss, shadowing, fast fading, SNR."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .scenario import STREAM_FADING, STREAM_SHADOWING, Scenario, substream

# Links closer than this are evaluated at this distance; the path-loss
# formulas are not meant for the sub-meter near field.
MIN_LINK_DISTANCE_M = 1.0

# Floor-penetration term of the SN model with n = 4: 18.3 * n**((n+2)/(n+1) - 0.46)
_SN_FLOOR_LOSS_DB = 18.3 * 4.0 ** ((4 + 2) / (4 + 1) - 0.46)


def path_loss_db(node_kind: str, distance_m: float | np.ndarray) -> float | np.ndarray:
    """Path loss in dB for an ``"enb"`` or ``"sn"`` transmitter.

    eNB: ``128.1 + 37.6 log10(d / 1000)``; SN: ``37 + 30 log10(d) + 18.3 * 4**0.74``,
    ``d`` in meters.
    """
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    if node_kind == "enb":
        loss = 128.1 + 37.6 * np.log10(d / 1000.0)
    elif node_kind == "sn":
        loss = 37.0 + 30.0 * np.log10(d) + _SN_FLOOR_LOSS_DB
    else:
        raise ValueError(f"unknown node kind {node_kind!r}")
    return float(loss) if loss.ndim == 0 else loss


def noise_power_w(noise_psd_dbm_hz: float, noise_figure_db: float, bandwidth_hz: float) -> float:
    return 10.0 ** ((noise_psd_dbm_hz + noise_figure_db) / 10.0) / 1000.0 * bandwidth_hz


@dataclass(frozen=True)
class ChannelState:
    gain: np.ndarray  # (M+1, N, K) linear power gain
    snr: np.ndarray  # (M+1, N, K) normalized SNR
    avg_snr: np.ndarray  # (M+1, K) mean SNR over subchannels
    noise_power_w: float

    @classmethod
    def from_gain(cls, gain: np.ndarray, noise_w: float) -> "ChannelState":
        gain = np.array(gain, dtype=float)
        if gain.ndim != 3:
            raise ValueError("gain must be indexed (node, subchannel, user)")
        if not (np.all(np.isfinite(gain)) and np.all(gain > 0)):
            raise ValueError("gains must be positive and finite")
        snr = gain / noise_w
        avg = snr.sum(axis=1) / snr.shape[1]
        for arr in (gain, snr, avg):
            arr.setflags(write=False)
        return cls(gain=gain, snr=snr, avg_snr=avg, noise_power_w=noise_w)

    @classmethod
    def from_snr(cls, snr: np.ndarray) -> "ChannelState":
        """Wrap a synthetic SNR array (unit noise power)."""
        return cls.from_gain(snr, 1.0)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.snr.shape

    def dump_csv(self, path: str | Path) -> Path:
        """Write the SNR array as ``i,j,k,snr`` rows (zero-based indices)."""
        path = Path(path)
        m, n, k = self.snr.shape
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["i", "j", "k", "snr"])
            for i in range(m):
                for j in range(n):
                    for u in range(k):
                        w.writerow([i, j, u, repr(float(self.snr[i, j, u]))])
        return path


def link_gain_db(scenario: Scenario) -> np.ndarray:
    """Deterministic part of the link budget (antenna gain minus path loss), (M+1, K)."""
    cfg = scenario.config
    d = np.maximum(scenario.distances(), MIN_LINK_DISTANCE_M)
    out = np.empty_like(d)
    out[0] = cfg.antenna_gain_enb_db - path_loss_db("enb", d[0])
    out[1:] = cfg.antenna_gain_sn_db - path_loss_db("sn", d[1:])
    return out


def realize_channel(scenario: Scenario, seed: int | None = None) -> ChannelState:
    """Draw shadowing (per link) and fast fading (per link and subchannel).

    ``seed`` defaults to the scenario's own seed.
    """
    cfg = scenario.config
    seed = scenario.seed if seed is None else seed
    m1 = scenario.num_nodes
    k = cfg.num_users
    n = cfg.num_subchannels
    shadow = substream(seed, STREAM_SHADOWING).normal(0.0, cfg.shadowing_std_db, size=(m1, k))
    slow = 10.0 ** ((link_gain_db(scenario) - shadow) / 10.0)
    if cfg.fast_fading_enabled:
        fading = substream(seed, STREAM_FADING).exponential(1.0, size=(m1, n, k))
    else:
        fading = np.ones((m1, n, k))
    gain = slow[:, None, :] * fading
    return ChannelState.from_gain(
        gain, noise_power_w(cfg.noise_psd_dbm_hz, cfg.noise_figure_ue_db, cfg.subchannel_bandwidth_hz)
    )


def min_snr(channel: ChannelState, node: int, users: Iterable[int]) -> tuple[np.ndarray, float]:
    """Worst-user SNR of ``node`` over ``users``.

    Returns the per-subchannel minimum vector and the minimum of the
    subchannel-averaged SNRs.
    """
    idx = sorted(set(int(u) for u in users))
    if not idx:
        raise ValueError("user set must be nonempty")
    per_sc = channel.snr[node][:, idx].min(axis=1)
    avg = float(channel.avg_snr[node, idx].min())
    return per_sc, avg
