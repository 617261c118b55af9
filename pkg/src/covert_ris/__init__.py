"""Joint sensing and covert communication design for RIS-assisted NOMA downlinks."""

from .config import SolveOptions, SystemConfig, desk_config, load_config
from .channel import ChannelSet, build_channel_set
from .covertness import CovertnessSpec, make_covertness_spec
from .optimizer import (LiftedSolution, solve_known_warden, solve_norm_bounded_csi,
                        solve_oma, solve_sensing_csi)
from .sensing import SensingModel, make_sensing_model

__all__ = [
    "SystemConfig", "SolveOptions", "desk_config", "load_config",
    "ChannelSet", "build_channel_set",
    "CovertnessSpec", "make_covertness_spec",
    "SensingModel", "make_sensing_model",
    "LiftedSolution", "solve_known_warden", "solve_sensing_csi",
    "solve_norm_bounded_csi", "solve_oma",
]
