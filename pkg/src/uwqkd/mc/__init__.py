"""Monte Carlo photon transport in homogeneous seawater."""

from .gate import GateCurve, gate_curve, gate_noise, mc_qber, optimize_gate_time
from .phase import ScatterModel, sample_scatter_angle, tthg_params_from_B
from .photon import Photon, launch_photon, rotate_direction, sample_path_length, update_weight
from .transport import (
    Absorbed,
    Arrivals,
    Detected,
    DetectorSpec,
    McConfig,
    McResult,
    Missed,
    propagate,
    run_simulation,
)

__all__ = [
    "Absorbed",
    "Arrivals",
    "Detected",
    "DetectorSpec",
    "GateCurve",
    "McConfig",
    "McResult",
    "Missed",
    "Photon",
    "ScatterModel",
    "gate_curve",
    "gate_noise",
    "launch_photon",
    "mc_qber",
    "optimize_gate_time",
    "propagate",
    "rotate_direction",
    "run_simulation",
    "sample_path_length",
    "sample_scatter_angle",
    "tthg_params_from_B",
    "update_weight",
]
