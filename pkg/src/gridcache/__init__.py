"""Energy-aware association, spectrum and power planning for a cache-assisted cell."""

from .config import SimConfig, ConfigError, load_config
from .scenario import Scenario, sample_scenario
from .channel import ChannelState, realize_channel
from .gridflow import FlowSettlement, settle
from .association import AssociationResult, associate
from .spectrum import SpectrumPlan, allocate_counts, select_subchannels
from .powerplan import PowerAllocation, waterfill
from .pipeline import NetworkPlan, plan_network, plan_case1, constraint_violations

__all__ = [
    "SimConfig", "ConfigError", "load_config",
    "Scenario", "sample_scenario",
    "ChannelState", "realize_channel",
    "FlowSettlement", "settle",
    "AssociationResult", "associate",
    "SpectrumPlan", "allocate_counts", "select_subchannels",
    "PowerAllocation", "waterfill",
    "NetworkPlan", "plan_network", "plan_case1", "constraint_violations",
]
