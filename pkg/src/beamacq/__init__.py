"""Multi-user mmWave initial access: arrays, channels, beam training and frame design."""

from .arrays import ArrayGeometry, ArrayKind, array_response, dft_vector, grid_phases, steering_beam
from .channel import Channel, PathComponent, channel_matrix, path_loss_db, post_training_snr, sample_channel
from .codebooks import Codebook, CodebookKind, build_codebook
from .estimators import estimate_lml, estimate_ml, estimate_mp, lml_statistic, ml_statistic
from .overhead import FrameParams, SinrCdf, expected_data_time, optimize_overhead, rate_objective
from .scenario import ScenarioConfig, Topology, generate_topology, los_state, schedule_fdm
from .signaling import Network, TrainingConfig, run_initial_access

__all__ = [
    "ArrayGeometry", "ArrayKind", "array_response", "dft_vector", "grid_phases", "steering_beam",
    "Channel", "PathComponent", "channel_matrix", "path_loss_db", "post_training_snr", "sample_channel",
    "Codebook", "CodebookKind", "build_codebook",
    "estimate_lml", "estimate_ml", "estimate_mp", "lml_statistic", "ml_statistic",
    "FrameParams", "SinrCdf", "expected_data_time", "optimize_overhead", "rate_objective",
    "ScenarioConfig", "Topology", "generate_topology", "los_state", "schedule_fdm",
    "Network", "TrainingConfig", "run_initial_access",
]
