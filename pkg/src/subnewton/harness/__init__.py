"""Experiment harness: data, configuration, method comparisons, rate fits."""

from .config import METHOD_PRESETS, DatasetSpec, ExperimentConfig, load_config, method_config, parse_config
from .data import load_libsvm, synth_classification, write_libsvm
from .experiment import build_dataset, run_experiment
from .msstudy import MsTable, ms_study
from .rates import RateFit, fit_rates

__all__ = [
    "METHOD_PRESETS",
    "DatasetSpec",
    "ExperimentConfig",
    "MsTable",
    "RateFit",
    "build_dataset",
    "fit_rates",
    "load_config",
    "load_libsvm",
    "method_config",
    "ms_study",
    "parse_config",
    "run_experiment",
    "synth_classification",
    "write_libsvm",
]
