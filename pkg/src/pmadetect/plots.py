"""Figures written next to the CSV reports (Agg backend, PNG)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .harness.experiments import SweepCell, sweep_matrix  # noqa: E402
from .harness.metrics import Metrics  # noqa: E402

HEATMAP_METRICS = ("accuracy", "tpr", "fpr", "auc")
# deterministic output: no timestamps or software tags in the PNG metadata
_SAVE = {"dpi": 120, "metadata": {"Software": None}}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def plot_sweep(cells: Sequence[SweepCell], path: str | Path) -> Path:
    """2x2 heatmaps, rows = epochs, columns = train size."""
    fig, axes = plt.subplots(2, 2, figsize=(9, 7.5), constrained_layout=True)
    for ax, metric in zip(axes.flat, HEATMAP_METRICS):
        epochs, sizes, grid = sweep_matrix(cells, metric)
        im = ax.imshow(grid, origin="lower", vmin=0.0, vmax=1.0, cmap="viridis", aspect="auto")
        ax.set_xticks(range(len(sizes)), [str(s) for s in sizes])
        ax.set_yticks(range(len(epochs)), [str(e) for e in epochs])
        ax.set_xlabel("train size per class")
        ax.set_ylabel("epochs")
        ax.set_title(metric.upper() if metric != "accuracy" else "Accuracy")
        if grid.size <= 100:
            for (i, j), v in np.ndenumerate(grid):
                if np.isfinite(v):
                    ax.text(j, i, f"{v:.2f}", ha="center", va="center", fontsize=7,
                            color="white" if v < 0.5 else "black")
        fig.colorbar(im, ax=ax, shrink=0.85)
    return _save(fig, path)


def plot_ablation(rows: Sequence[tuple[str, Metrics]], path: str | Path) -> Path:
    names = [name for name, _ in rows]
    fields = ("accuracy", "tpr", "auc")
    x = np.arange(len(rows))
    width = 0.8 / len(fields)
    fig, ax = plt.subplots(figsize=(max(5.0, 1.4 * len(rows)), 4), constrained_layout=True)
    for k, field in enumerate(fields):
        vals = [getattr(m, field) for _, m in rows]
        vals = [np.nan if v is None else v for v in vals]
        ax.bar(x + (k - (len(fields) - 1) / 2) * width, vals, width, label=field)
    ax.set_xticks(x, names, rotation=20, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.legend(frameon=False, ncol=len(fields))
    return _save(fig, path)


def plot_losses(losses: Sequence[float], path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.5), constrained_layout=True)
    ax.plot(np.arange(1, len(losses) + 1), losses, lw=1.5)
    ax.set_xlabel("epoch")
    ax.set_ylabel("cross-entropy")
    ax.grid(alpha=0.3)
    return _save(fig, path)
