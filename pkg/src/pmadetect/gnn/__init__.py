"""From-scratch graph classifiers (numpy, manual backpropagation)."""

from .batch import GraphBatch, batch_graphs
from .checkpoint import Checkpoint
from .model import (
    ARCHITECTURES,
    ModelConfig,
    ModelParams,
    Prediction,
    forward_batch,
    gradients,
    infer,
    init_params,
    model_forward,
    predict_scores,
    readout_mean,
)
from .train import Adam, TrainConfig, TrainResult, train

__all__ = [
    "ARCHITECTURES",
    "Adam",
    "Checkpoint",
    "GraphBatch",
    "ModelConfig",
    "ModelParams",
    "Prediction",
    "TrainConfig",
    "TrainResult",
    "batch_graphs",
    "forward_batch",
    "gradients",
    "infer",
    "init_params",
    "model_forward",
    "predict_scores",
    "readout_mean",
    "train",
]
