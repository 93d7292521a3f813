"""CSV writers for metrics, sweeps, ablations and loss traces.

Every file is UTF-8 with ``\\n`` line endings and a header row.  Floats are
written with ``repr`` so values round-trip exactly and reruns are byte-identical.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence

from .harness.experiments import SweepCell
from .harness.metrics import METRIC_FIELDS, Metrics

METRICS_HEADER = ("run", *METRIC_FIELDS)
SWEEP_HEADER = ("epochs", "train_size", *METRIC_FIELDS)
ABLATION_HEADER = ("variant", "columns", *METRIC_FIELDS)
LOSS_HEADER = ("epoch", "loss")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _render(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _metric_values(m: Metrics) -> list:
    return [getattr(m, f) for f in METRIC_FIELDS]


def metrics_csv(runs: Iterable[tuple[str, Metrics]]) -> str:
    return _render(METRICS_HEADER, ([name, *_metric_values(m)] for name, m in runs))


def sweep_csv(cells: Iterable[SweepCell]) -> str:
    return _render(SWEEP_HEADER, ([c.epochs, c.train_size, *_metric_values(c.metrics)] for c in cells))


def ablation_csv(rows: Iterable[tuple[str, Sequence[int], Metrics]]) -> str:
    return _render(
        ABLATION_HEADER,
        ([name, " ".join(map(str, cols)), *_metric_values(m)] for name, cols, m in rows),
    )


def loss_csv(losses: Sequence[float]) -> str:
    return _render(LOSS_HEADER, ((i + 1, float(v)) for i, v in enumerate(losses)))


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")
    return path
