"""Full-batch training with Adam on mean cross-entropy."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ..cashflow import CashFlowGraph
from ..errors import DegenerateDataset, FeatureMissing, NumericalDivergence
from .batch import batch_graphs
from .model import ModelConfig, ModelParams, gradients, init_params

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    train_size_per_class: int = 100
    learning_rate: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 42

    def __post_init__(self):
        if self.epochs < 1 or self.train_size_per_class < 1:
            raise ValueError("epochs and train_size_per_class must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


class Adam:
    def __init__(self, lr: float = 0.01, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for name, p in params.items():
            g = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(p)
                self.v[name] = np.zeros_like(p)
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


@dataclass
class TrainResult:
    params: ModelParams
    losses: list[float] = field(default_factory=list)


def train(
    graphs: Sequence[CashFlowGraph],
    labels: Sequence[int],
    model_config: ModelConfig,
    train_config: TrainConfig,
) -> TrainResult:
    """Fit a classifier; the whole training set forms one batch per epoch.

    Deterministic for a given seed: the seed fixes both the initial weights
    and the (fixed) order in which graphs are stacked into the batch.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if len(graphs) != len(labels):
        raise ValueError(f"{len(graphs)} graphs but {len(labels)} labels")
    if set(labels.tolist()) != {0, 1}:
        raise DegenerateDataset("training set needs at least one graph of each class")
    if any(g.features is None for g in graphs):
        raise FeatureMissing("all training graphs must be featurized")

    init_seq, order_seq = np.random.SeedSequence(train_config.seed).spawn(2)
    order = np.random.Generator(np.random.PCG64(order_seq)).permutation(len(graphs))
    batch = batch_graphs([graphs[i] for i in order], model_config.direction)
    y = labels[order]

    params = init_params(model_config, int(init_seq.generate_state(1, np.uint64)[0]))
    params.seed = train_config.seed
    opt = Adam(train_config.learning_rate, train_config.adam_beta1, train_config.adam_beta2, train_config.adam_eps)
    losses = []
    for epoch in range(train_config.epochs):
        loss, grads = gradients(params, model_config, batch, y)
        if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
            raise NumericalDivergence(epoch)
        losses.append(loss)
        opt.step(params.tensors, grads)
    log.debug("trained %s for %d epochs, final loss %.4f", model_config.arch, train_config.epochs, losses[-1])
    return TrainResult(params, losses)
