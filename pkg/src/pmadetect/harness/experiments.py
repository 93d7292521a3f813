"""Train/evaluate protocols: balanced split, single runs, ablations and sweeps."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..errors import ConfigError
from ..features import FAMILIES, columns_for
from ..gnn import ModelConfig, TrainConfig, predict_scores, train
from .dataset import Dataset
from .metrics import Metrics, compute_metrics


@dataclass(frozen=True)
class AblationMask:
    include_type: bool = True
    include_frequency: bool = True
    include_diversity: bool = True
    include_profit: bool = True

    def __post_init__(self):
        if not any(self.families_flags()):
            raise ConfigError("ablation mask must keep at least one feature family")

    def families_flags(self) -> tuple[bool, ...]:
        return (self.include_type, self.include_frequency, self.include_diversity, self.include_profit)

    @property
    def families(self) -> tuple[str, ...]:
        return tuple(name for name, keep in zip(FAMILIES, self.families_flags()) if keep)

    @property
    def columns(self) -> tuple[int, ...]:
        return columns_for(self.families)

    @classmethod
    def without(cls, family: str) -> "AblationMask":
        if family not in FAMILIES:
            raise ConfigError(f"unknown feature family {family!r}")
        return cls(**{f"include_{family}": False})

    @property
    def name(self) -> str:
        dropped = [f for f in FAMILIES if f not in self.families]
        return "full" if not dropped else "without_" + "_".join(dropped)


def split_dataset(dataset: Dataset, train_size_per_class: int, seed: int) -> tuple[Dataset, Dataset]:
    """Balanced draw of ``train_size_per_class`` graphs per class; the rest is the test set."""
    labels = dataset.labels
    rng = np.random.Generator(np.random.PCG64(seed))
    train_idx = []
    for cls in (0, 1):
        members = np.flatnonzero(labels == cls)
        if members.size <= train_size_per_class:
            raise ConfigError(
                f"class {cls} has {members.size} graphs; need more than {train_size_per_class} to train and test"
            )
        train_idx.extend(rng.choice(members, size=train_size_per_class, replace=False).tolist())
    train_idx.sort()
    chosen = set(train_idx)
    test_idx = [i for i in range(len(dataset)) if i not in chosen]
    return dataset.subset(train_idx), dataset.subset(test_idx)


def evaluate(test: Dataset, params, model_config: ModelConfig) -> tuple[Metrics, np.ndarray]:
    scores = predict_scores(test.graphs, params, model_config)
    predictions = (scores > 0.5).astype(np.int64)
    return compute_metrics(predictions, test.labels, scores), scores


def run_experiment(dataset: Dataset, model_config: ModelConfig, train_config: TrainConfig) -> Metrics:
    """Split with the training seed, fit, and score the held-out remainder."""
    train_set, test_set = split_dataset(dataset, train_config.train_size_per_class, train_config.seed)
    result = train(train_set.graphs, train_set.labels, model_config, train_config)
    return evaluate(test_set, result.params, model_config)[0]


def ablation_run(
    dataset: Dataset, mask: AblationMask, model_config: ModelConfig, train_config: TrainConfig
) -> Metrics:
    """Retrain from the same seed on the kept feature columns only."""
    return run_experiment(dataset, replace(model_config, columns=mask.columns), train_config)


def ablation_variants() -> list[AblationMask]:
    return [AblationMask()] + [AblationMask.without(f) for f in FAMILIES]


@dataclass(frozen=True)
class SweepCell:
    epochs: int
    train_size: int
    metrics: Metrics


def sweep(
    dataset: Dataset,
    epochs_grid: Sequence[int],
    train_size_grid: Sequence[int],
    model_config: ModelConfig,
    train_config: TrainConfig | None = None,
) -> list[SweepCell]:
    """One train/evaluate cycle per (epochs, train size) cell, row-major by epochs.

    Every cell reuses the base seed, so a cell equals ``run_experiment`` with
    that cell's epochs and train size.
    """
    if not epochs_grid or not train_size_grid:
        raise ConfigError("sweep grids must be non-empty")
    base = train_config or TrainConfig()
    labels = dataset.labels
    smallest = min(int(np.sum(labels == 0)), int(np.sum(labels == 1)))
    for size in train_size_grid:
        if size >= smallest:
            raise ConfigError(f"cell train_size={size}: only {smallest} graphs in the smaller class")
    cells = []
    for epochs, size in itertools.product(epochs_grid, train_size_grid):
        cfg = replace(base, epochs=int(epochs), train_size_per_class=int(size))
        cells.append(SweepCell(int(epochs), int(size), run_experiment(dataset, model_config, cfg)))
    return cells


def sweep_matrix(cells: Sequence[SweepCell], metric: str) -> tuple[list[int], list[int], np.ndarray]:
    """Heatmap data: rows are epochs, columns train sizes (NaN where undefined)."""
    epochs = sorted({c.epochs for c in cells})
    sizes = sorted({c.train_size for c in cells})
    grid = np.full((len(epochs), len(sizes)), np.nan)
    for c in cells:
        value = getattr(c.metrics, metric)
        if value is not None:
            grid[epochs.index(c.epochs), sizes.index(c.train_size)] = value
    return epochs, sizes, grid
