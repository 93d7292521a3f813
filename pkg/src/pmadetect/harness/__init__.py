"""Datasets, metrics, synthetic data and evaluation protocols."""

from .dataset import Dataset
from .experiments import (
    AblationMask,
    SweepCell,
    ablation_run,
    ablation_variants,
    evaluate,
    run_experiment,
    split_dataset,
    sweep,
    sweep_matrix,
)
from .metrics import METRIC_FIELDS, Metrics, auc_roc, compute_metrics
from .synth import FAMILIES as SIGNAL_FAMILIES
from .synth import SynthConfig, synth_dataset

__all__ = [
    "AblationMask",
    "Dataset",
    "METRIC_FIELDS",
    "Metrics",
    "SIGNAL_FAMILIES",
    "SweepCell",
    "SynthConfig",
    "ablation_run",
    "ablation_variants",
    "auc_roc",
    "compute_metrics",
    "evaluate",
    "run_experiment",
    "split_dataset",
    "sweep",
    "sweep_matrix",
    "synth_dataset",
]
