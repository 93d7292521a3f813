"""Two-layer graph classifiers with a mean readout and a dense output head.

Forward pass for every architecture::

    h1 = relu(layer_1(x))          # in_dim -> hidden
    h2 = layer_2(h1)               # hidden -> hidden
    r  = mean over nodes of h2     # per graph
    logits = r @ W_head + b_head   # hidden -> 2
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

from ..cashflow import CashFlowGraph
from ..errors import EmptyGraph, FeatureMissing, ShapeError
from ..features import NUM_FEATURES
from . import layers
from .batch import DIRECTIONS, GraphBatch, batch_graphs

ARCHITECTURES = ("mlp", "gcn", "gat", "gin", "graphsage")
_ALIASES = {"sage": "graphsage", "graph_sage": "graphsage"}


def canonical_arch(name: str) -> str:
    key = name.lower().replace("-", "_")
    key = _ALIASES.get(key, key)
    if key not in ARCHITECTURES:
        raise ValueError(f"unknown architecture {name!r}; choose from {ARCHITECTURES}")
    return key


@dataclass(frozen=True)
class ModelConfig:
    arch: str = "graphsage"
    num_layers: int = 2
    hidden_dim: int = 16
    out_dim: int = 2
    direction: str = "symmetrized"
    columns: tuple[int, ...] = tuple(range(NUM_FEATURES))

    def __post_init__(self):
        object.__setattr__(self, "arch", canonical_arch(self.arch))
        object.__setattr__(self, "columns", tuple(int(c) for c in self.columns))
        if self.num_layers < 1 or self.hidden_dim < 1 or self.out_dim < 1:
            raise ValueError("num_layers and all dimensions must be >= 1")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if not self.columns:
            raise ValueError("at least one feature column is required")

    @property
    def in_dim(self) -> int:
        return len(self.columns)

    def to_dict(self) -> dict:
        return {
            "arch": self.arch,
            "num_layers": self.num_layers,
            "hidden_dim": self.hidden_dim,
            "out_dim": self.out_dim,
            "direction": self.direction,
            "columns": list(self.columns),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelConfig":
        return cls(**{**doc, "columns": tuple(doc.get("columns", range(NUM_FEATURES)))})


@dataclass
class ModelParams:
    tensors: dict[str, np.ndarray]
    seed: int | None = None

    def copy(self) -> "ModelParams":
        return ModelParams({k: v.copy() for k, v in self.tensors.items()}, self.seed)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def equal(self, other: "ModelParams") -> bool:
        return self.tensors.keys() == other.tensors.keys() and all(
            np.array_equal(v, other.tensors[k]) for k, v in self.tensors.items()
        )


@dataclass(frozen=True)
class Prediction:
    label: int
    score: float


def parameter_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    shapes = {}
    d_in = config.in_dim
    for i in range(config.num_layers):
        for name, shape in layers.param_shapes(config.arch, d_in, config.hidden_dim).items():
            shapes[f"l{i}.{name}"] = shape
        d_in = config.hidden_dim
    shapes["head.W"] = (config.hidden_dim, config.out_dim)
    shapes["head.b"] = (config.out_dim,)
    return shapes


def _glorot_limit(name: str, shape: tuple[int, ...]) -> float:
    if len(shape) == 2:
        return np.sqrt(6.0 / (shape[0] + shape[1]))
    if name.endswith("att"):
        return np.sqrt(6.0 / (shape[0] // 2 + 1))
    return 0.0  # biases start at zero


def init_params(config: ModelConfig, seed: int) -> ModelParams:
    """Glorot-uniform weights, zero biases, drawn in a fixed parameter order."""
    rng = np.random.Generator(np.random.PCG64(seed))
    tensors = {}
    for name, shape in parameter_shapes(config).items():
        limit = _glorot_limit(name, shape)
        if limit == 0.0:
            tensors[name] = np.zeros(shape)
        else:
            tensors[name] = rng.uniform(-limit, limit, size=shape)
    return ModelParams(tensors, seed)


def validate_params(params: ModelParams, config: ModelConfig) -> None:
    expected = parameter_shapes(config)
    if set(expected) != set(params.tensors):
        raise ShapeError(f"parameter names {sorted(params.tensors)} do not match {config.arch} layout")
    for name, shape in expected.items():
        got = params.tensors[name]
        if got.shape != shape:
            raise ShapeError(f"{name}: expected shape {shape}, got {got.shape}")
        if not np.all(np.isfinite(got)):
            raise ShapeError(f"{name} contains non-finite values")


def _layer_params(params: ModelParams, i: int) -> dict[str, np.ndarray]:
    prefix = f"l{i}."
    return {k[len(prefix):]: v for k, v in params.tensors.items() if k.startswith(prefix)}


def _inputs(batch: GraphBatch, config: ModelConfig) -> np.ndarray:
    if batch.x is None:
        raise FeatureMissing("graphs must be featurized before classification")
    if batch.x.shape[1] <= max(config.columns):
        raise ShapeError(f"feature matrix has {batch.x.shape[1]} columns; model reads {config.columns}")
    return batch.x[:, list(config.columns)]


@dataclass
class ForwardCache:
    layer_caches: list = field(default_factory=list)
    relu_masks: list = field(default_factory=list)
    readout: np.ndarray | None = None
    logits: np.ndarray | None = None


def forward_batch(
    params: ModelParams, config: ModelConfig, batch: GraphBatch, cache: ForwardCache | None = None
) -> np.ndarray:
    """Logits of shape ``(num_graphs, out_dim)``."""
    h = _inputs(batch, config)
    fwd = layers.FORWARD[config.arch]
    for i in range(config.num_layers):
        z, layer_cache = fwd(batch, h, _layer_params(params, i))
        if i < config.num_layers - 1:
            mask = z > 0
            h = z * mask
        else:
            mask = None
            h = z
        if cache is not None:
            cache.layer_caches.append(layer_cache)
            cache.relu_masks.append(mask)
    readout = batch.pool @ h
    logits = readout @ params["head.W"] + params["head.b"]
    if cache is not None:
        cache.readout = readout
        cache.logits = logits
    return logits


def backprop(
    params: ModelParams, config: ModelConfig, batch: GraphBatch, cache: ForwardCache, d_logits: np.ndarray
) -> dict[str, np.ndarray]:
    """Reverse pass from ``d(loss)/d(logits)`` to every parameter."""
    grads = {
        "head.W": cache.readout.T @ d_logits,
        "head.b": d_logits.sum(axis=0),
    }
    dh = batch.pool.T @ (d_logits @ params["head.W"].T)
    bwd = layers.BACKWARD[config.arch]
    for i in reversed(range(config.num_layers)):
        mask = cache.relu_masks[i]
        if mask is not None:
            dh = dh * mask
        dh, layer_grads = bwd(batch, cache.layer_caches[i], _layer_params(params, i), dh)
        for name, g in layer_grads.items():
            grads[f"l{i}.{name}"] = g
    return {name: grads[name] for name in params.tensors}


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient with respect to the logits."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_p = shifted - log_z
    n = logits.shape[0]
    loss = -log_p[np.arange(n), labels].mean()
    d = np.exp(log_p)
    d[np.arange(n), labels] -= 1.0
    return float(loss), d / n


def gradients(
    params: ModelParams, config: ModelConfig, batch: GraphBatch, labels: Sequence[int]
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy over the batch and its exact parameter gradients."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (batch.num_graphs,):
        raise ShapeError(f"{labels.shape[0]} labels for {batch.num_graphs} graphs")
    cache = ForwardCache()
    logits = forward_batch(params, config, batch, cache)
    loss, d_logits = cross_entropy(logits, labels)
    return loss, backprop(params, config, batch, cache, d_logits)


def loss_value(params: ModelParams, config: ModelConfig, batch: GraphBatch, labels: Sequence[int]) -> float:
    logits = forward_batch(params, config, batch)
    return cross_entropy(logits, np.asarray(labels, dtype=np.int64))[0]


# --- single-graph API ------------------------------------------------------------


def model_forward(g: CashFlowGraph, params: ModelParams, config: ModelConfig) -> np.ndarray:
    if g.features is None:
        raise FeatureMissing("graph has no feature matrix")
    return forward_batch(params, config, batch_graphs([g], config.direction))[0]


def class1_probability(logits: np.ndarray) -> np.ndarray:
    """Softmax probability of class 1 for 2-logit rows."""
    logits = np.atleast_2d(logits)
    return expit(logits[:, 1] - logits[:, 0])


def to_prediction(score: float) -> Prediction:
    # exact 0.5 goes to the benign class
    return Prediction(label=int(score > 0.5), score=float(score))


def infer(g: CashFlowGraph, params: ModelParams, config: ModelConfig) -> Prediction:
    return to_prediction(class1_probability(model_forward(g, params, config))[0])


def predict_scores(graphs: Sequence[CashFlowGraph], params: ModelParams, config: ModelConfig) -> np.ndarray:
    """Class-1 probability for each graph, computed in one batch."""
    if any(g.features is None for g in graphs):
        raise FeatureMissing("all graphs must be featurized")
    logits = forward_batch(params, config, batch_graphs(graphs, config.direction))
    return class1_probability(logits)


# --- single-layer convenience wrappers ----------------------------------------------


def _single(g: CashFlowGraph | GraphBatch, direction: str) -> GraphBatch:
    return g if isinstance(g, GraphBatch) else batch_graphs([g], direction)


def _act(z: np.ndarray, activation: bool) -> np.ndarray:
    return np.maximum(z, 0.0) if activation else z


def layer_forward_gcn(g, h, w, b, direction="symmetrized", activation=True):
    return _act(layers.gcn_forward(_single(g, direction), h, {"W": w, "b": b})[0], activation)


def layer_forward_sage(g, h, w_self, w_neigh, b, direction="symmetrized", activation=True):
    p = {"W_self": w_self, "W_neigh": w_neigh, "b": b}
    return _act(layers.sage_forward(_single(g, direction), h, p)[0], activation)


def layer_forward_gin(g, h, w_a, b_a, w_b, b_b, direction="symmetrized", activation=False):
    p = {"W_a": w_a, "b_a": b_a, "W_b": w_b, "b_b": b_b}
    return _act(layers.gin_forward(_single(g, direction), h, p)[0], activation)


def layer_forward_gat(g, h, w, att, b=None, direction="symmetrized", activation=True, slope=layers.LEAKY_SLOPE):
    b = np.zeros(w.shape[1]) if b is None else b
    p = {"W": w, "att": att, "b": b}
    return _act(layers.gat_forward(_single(g, direction), h, p, slope)[0], activation)


def forward_mlp(h, w1, b1, w2, b2):
    """Per-node two-layer perceptron; the graph structure is never read."""
    return np.maximum(h @ w1 + b1, 0.0) @ w2 + b2


def readout_mean(h: np.ndarray) -> np.ndarray:
    if h.shape[0] == 0:
        raise EmptyGraph("cannot read out an empty node set")
    return h.mean(axis=0)
