"""End-to-end classification: parse -> build -> classify, with per-phase timing."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

from .cashflow import GraphStats, construct_graph, graph_stats
from .errors import PMAError
from .features import AccountDb, assemble_features
from .gnn import Checkpoint, infer
from .rpc import fetch_transaction
from .txparse import RawTransaction, extract_transfers, parse_fixture


class PipelineError(PMAError):
    """Unexpected failure inside a phase; wraps the original exception."""

    def __init__(self, phase: str, cause: BaseException):
        self.phase = phase
        self.cause = cause
        super().__init__(f"{type(cause).__name__}: {cause}")


@dataclass(frozen=True)
class TimingReport:
    parse_ms: float
    build_ms: float
    classify_ms: float
    total_ms: float


@dataclass(frozen=True)
class ClassifyResponse:
    tx_hash: str
    prediction: int
    score: float
    timing: TimingReport
    graph_stats: GraphStats
    no_transfers: bool = False
    malformed_events: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def error_document(exc: BaseException, phase: str | None = None) -> dict:
    phase = phase or getattr(exc, "phase", "internal")
    kind = type(exc.cause).__name__ if isinstance(exc, PipelineError) else type(exc).__name__
    return {"error": {"phase": phase, "type": kind, "message": str(exc)}}


class _Phase:
    """Times a block and tags any exception with the phase name."""

    def __init__(self, name: str):
        self.name = name
        self.ms = 0.0

    def __enter__(self):
        self._t0 = time.perf_counter_ns()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.ms = (time.perf_counter_ns() - self._t0) / 1e6
        if exc is None:
            return False
        if isinstance(exc, PMAError):
            exc.phase = self.name
            return False
        raise PipelineError(self.name, exc) from exc


@dataclass
class Classifier:
    """A loaded checkpoint plus account snapshot; immutable and thread-safe to share."""

    checkpoint: Checkpoint
    db: Mapping[str, bool] = field(default_factory=AccountDb)
    rpc: str | None = None

    @classmethod
    def load(cls, model_path: str | Path, db_path: str | Path | None = None, rpc: str | None = None) -> "Classifier":
        db = AccountDb.load(db_path) if db_path else AccountDb()
        return cls(Checkpoint.load(model_path), db, rpc)

    def classify_fixture(self, raw: bytes) -> ClassifyResponse:
        return self._run(lambda: parse_fixture(raw))

    def classify_hash(self, tx_hash: str, rpc: str | None = None, chain: str = "ethereum") -> ClassifyResponse:
        endpoint = rpc or self.rpc
        if not endpoint:
            raise PipelineError("parse", ValueError("no RPC endpoint configured"))
        return self._run(lambda: fetch_transaction(endpoint, tx_hash, chain))

    def classify_transaction(self, tx: RawTransaction) -> ClassifyResponse:
        return self._run(lambda: tx)

    def _run(self, load) -> ClassifyResponse:
        t0 = time.perf_counter_ns()
        issues: list = []
        with _Phase("parse") as parse:
            tx = load()
            transfers = extract_transfers(tx, issues)
        if not transfers:
            total = (time.perf_counter_ns() - t0) / 1e6
            return ClassifyResponse(
                tx_hash=tx.tx_hash,
                prediction=0,
                score=0.0,
                timing=TimingReport(parse.ms, 0.0, 0.0, total),
                graph_stats=GraphStats(0, 0, 0, 0),
                no_transfers=True,
                malformed_events=len(issues),
            )
        with _Phase("build") as build:
            graph = assemble_features(construct_graph(transfers), self.db)
        with _Phase("classify") as classify:
            pred = infer(graph, self.checkpoint.params, self.checkpoint.config)
        total = (time.perf_counter_ns() - t0) / 1e6
        return ClassifyResponse(
            tx_hash=tx.tx_hash,
            prediction=pred.label,
            score=pred.score,
            timing=TimingReport(parse.ms, build.ms, classify.ms, total),
            graph_stats=graph_stats(graph),
            malformed_events=len(issues),
        )


def classify_pipeline(
    source: bytes | RawTransaction | tuple[str, str],
    model: Checkpoint | str | Path,
    db: Mapping[str, bool] | None = None,
) -> ClassifyResponse:
    """Classify a fixture document, a decoded transaction, or ``(tx_hash, rpc_endpoint)``."""
    checkpoint = model if isinstance(model, Checkpoint) else Checkpoint.load(model)
    clf = Classifier(checkpoint, db if db is not None else AccountDb())
    if isinstance(source, RawTransaction):
        return clf.classify_transaction(source)
    if isinstance(source, tuple):
        tx_hash, endpoint = source
        return clf.classify_hash(tx_hash, endpoint)
    return clf.classify_fixture(source)


__all__ = [
    "ClassifyResponse",
    "Classifier",
    "PipelineError",
    "TimingReport",
    "classify_pipeline",
    "error_document",
]
