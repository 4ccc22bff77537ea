"""Simulation configuration: defaults, validation and JSON loading."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    """Raised when a configuration document is malformed or violates an invariant."""


PLACEMENT_MODES = ("cell_edge", "cell_center")
ASSOCIATION_MODES = ("sweep_ongrid", "sweep_objective", "single")

# Fraction of the cell radius separating cell-edge from cell-center placements.
EDGE_FRACTION = 0.6


@dataclass(frozen=True)
class SimConfig:
    carrier_frequency_mhz: float = 2000.0
    subchannel_bandwidth_hz: float = 180e3
    num_subchannels: int = 100
    num_sns: int = 4
    num_users: int = 30
    reconstruction_degree: int = 2
    cell_radius_m: float = 250.0
    sn_square_side_m: float = 60.0
    user_disk_radius_m: float = 80.0
    enb_energy_rate_w: float = 20.0
    sn_energy_rate_w: float = 0.5
    epoch_s: float = 1e-3
    download_rate_bits: float = 60e3
    transfer_efficiency: float = 0.4
    shadowing_std_db: float = 10.0
    noise_psd_dbm_hz: float = -174.0
    noise_figure_ue_db: float = 9.0
    antenna_gain_enb_db: float = 16.0
    antenna_gain_sn_db: float = 5.0
    fast_fading_enabled: bool = True
    placement_mode: str = "cell_edge"
    association_mode: str = "sweep_ongrid"
    seed: int = 0

    def __post_init__(self) -> None:
        validate(self)

    @property
    def fragment_rate_bps(self) -> float:
        """Per-fragment rate S = R / (T * D), in bit/s."""
        return self.download_rate_bits / (self.epoch_s * self.reconstruction_degree)

    @property
    def node_targets_bps(self) -> list[float]:
        """Rate target per node: D*S for the eNB (node 0), S for every SN."""
        s = self.fragment_rate_bps
        return [self.reconstruction_degree * s] + [s] * self.num_sns

    @property
    def energy_rates_w(self) -> list[float]:
        return [self.enb_energy_rate_w] + [self.sn_energy_rate_w] * self.num_sns

    def replace(self, **changes: Any) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


_INT_FIELDS = {"num_subchannels", "num_sns", "num_users", "reconstruction_degree", "seed"}
_POSITIVE_FIELDS = (
    "carrier_frequency_mhz",
    "subchannel_bandwidth_hz",
    "cell_radius_m",
    "sn_square_side_m",
    "user_disk_radius_m",
    "epoch_s",
    "shadowing_std_db",
)
_NONNEGATIVE_FIELDS = ("enb_energy_rate_w", "sn_energy_rate_w", "download_rate_bits")


def validate(cfg: SimConfig) -> None:
    for name in _INT_FIELDS:
        value = getattr(cfg, name)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer, got {value!r}")
    if not isinstance(cfg.fast_fading_enabled, bool):
        raise ConfigError("fast_fading_enabled must be a boolean")
    for name in _POSITIVE_FIELDS:
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name} must be positive")
    for name in _NONNEGATIVE_FIELDS:
        if not getattr(cfg, name) >= 0:
            raise ConfigError(f"{name} must be nonnegative")
    if cfg.num_sns < 1:
        raise ConfigError("num_sns must be at least 1")
    if cfg.num_users < 1:
        raise ConfigError("num_users must be at least 1")
    if cfg.reconstruction_degree < 1:
        raise ConfigError("reconstruction_degree must be at least 1")
    if cfg.reconstruction_degree > cfg.num_sns:
        raise ConfigError("reconstruction_degree exceeds num_sns")
    if cfg.num_subchannels < cfg.num_sns + 1:
        raise ConfigError("num_subchannels must be at least num_sns + 1")
    if not 0.0 <= cfg.transfer_efficiency <= 1.0:
        raise ConfigError("transfer_efficiency must lie in [0, 1]")
    if cfg.placement_mode not in PLACEMENT_MODES:
        raise ConfigError(f"placement_mode must be one of {PLACEMENT_MODES}")
    if cfg.association_mode not in ASSOCIATION_MODES:
        raise ConfigError(f"association_mode must be one of {ASSOCIATION_MODES}")
    if cfg.user_disk_radius_m >= cfg.cell_radius_m:
        raise ConfigError("user_disk_radius_m must be smaller than cell_radius_m")
    if cfg.placement_mode == "cell_edge" and (
        EDGE_FRACTION * cfg.cell_radius_m > cfg.cell_radius_m - cfg.user_disk_radius_m
    ):
        raise ConfigError("user_disk_radius_m leaves no room for cell_edge placement")


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SimConfig)}


def config_from_dict(data: dict[str, Any]) -> SimConfig:
    unknown = sorted(set(data) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    values: dict[str, Any] = {}
    for key, value in data.items():
        if key in _INT_FIELDS and isinstance(value, float) and value.is_integer():
            value = int(value)
        elif _FIELD_TYPES[key] == "float" and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        values[key] = value
    return SimConfig(**values)


def load_config(source: str | Path | dict[str, Any] | None = None) -> SimConfig:
    """Build a validated :class:`SimConfig` from a JSON document.

    ``source`` may be a JSON string, a path to a JSON file, an already-parsed
    mapping, or ``None`` for the defaults.  Omitted keys take their default
    values.
    """
    if source is None:
        return SimConfig()
    if isinstance(source, dict):
        return config_from_dict(source)
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")
                                    and source.strip() != "" and Path(source).exists()):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = str(source)
    if text.strip() == "":
        return SimConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("configuration document must be a JSON object")
    return config_from_dict(data)
