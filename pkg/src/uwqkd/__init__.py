"""Key-rate bounds and photon transport for underwater quantum key distribution."""

__version__ = "0.1.0"

from .bb84 import Bb84Params, LinkSetup, achievable_distance, direct_link_report  # noqa: E402
from .channel import (  # noqa: E402
    TURBULENCE_PRESETS,
    WATER_TYPES,
    LinkGeometry,
    TurbulenceParams,
    WaterType,
    path_loss,
    power_transfer_mu,
)
from .decoy import DecoyParams, decoy_cutoff, decoy_report  # noqa: E402
from .noise import Environment, ReceiverParams  # noqa: E402
from .relay import optimal_relay_count, relay_achievable_distance  # noqa: E402

__all__ = [
    "__version__",
    "Bb84Params",
    "DecoyParams",
    "Environment",
    "LinkGeometry",
    "LinkSetup",
    "ReceiverParams",
    "TURBULENCE_PRESETS",
    "TurbulenceParams",
    "WATER_TYPES",
    "WaterType",
    "achievable_distance",
    "decoy_cutoff",
    "decoy_report",
    "direct_link_report",
    "optimal_relay_count",
    "path_loss",
    "power_transfer_mu",
    "relay_achievable_distance",
]
