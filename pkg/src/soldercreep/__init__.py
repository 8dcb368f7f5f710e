"""Creep-strain surrogates for solder joints under synthetic thermal cycling.

Pipeline: ``profilegen`` draws exponential half-cycles, ``creepsim`` runs a
lumped Garofalo-creep oracle over them, ``datasets`` builds MLP/LSTM samples,
``neuralnet`` trains the surrogates and ``evalmetrics`` scores them.
"""
from .creepsim import CreepMaterial, CreepRecord, JointGeometry, simulate_profile
from .datasets import Standardizer, build_lstm_dataset, build_mlp_dataset, segment_training_fraction
from .evalmetrics import MetricsReport, evaluate_predictions, f_rel_ave, r2_score
from .profilegen import HalfCycle, ProfileSpec, TemperatureTrace, derive_half_cycle, generate_profile

__version__ = "0.1.0"

__all__ = [
    "CreepMaterial", "CreepRecord", "HalfCycle", "JointGeometry", "MetricsReport", "ProfileSpec",
    "Standardizer", "TemperatureTrace", "build_lstm_dataset", "build_mlp_dataset", "derive_half_cycle",
    "evaluate_predictions", "f_rel_ave", "generate_profile", "r2_score", "segment_training_fraction",
    "simulate_profile",
]
