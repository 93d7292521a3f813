"""Node features of a cash flow graph.

Each row of the feature matrix is

    [opaque_ca, transparent_ca, eoa, in_freq, out_freq, in_div, out_div, profit]

Frequency and diversity are normalized by the graph-wide maximum in each
direction; profit sums each edge's amount relative to the largest single
transfer of the same asset.
"""

from __future__ import annotations

import json
from collections import defaultdict
from pathlib import Path
from typing import Mapping

import numpy as np

from .cashflow import CashFlowGraph
from .errors import EmptyGraph, SchemaError
from .txparse import canonical_address

NUM_FEATURES = 8
FAMILIES = {
    "type": (0, 1, 2),
    "frequency": (3, 4),
    "diversity": (5, 6),
    "profit": (7,),
}

OPAQUE_CA = (1.0, 0.0, 0.0)
TRANSPARENT_CA = (0.0, 1.0, 0.0)
EOA = (0.0, 0.0, 1.0)


class AccountDb(Mapping[str, bool]):
    """Read-only snapshot: contract address -> source-verified flag.

    Addresses missing from the snapshot are treated as EOAs.
    """

    def __init__(self, entries: Mapping[str, bool] | None = None):
        self._entries = {canonical_address(k): bool(v) for k, v in (entries or {}).items()}

    def __getitem__(self, address: str) -> bool:
        return self._entries[address]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    @classmethod
    def load(cls, path: str | Path) -> "AccountDb":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict) or not all(isinstance(v, bool) for v in doc.values()):
            raise SchemaError("account_db", "account db must map addresses to booleans")
        return cls(doc)

    def dumps(self) -> str:
        return json.dumps(dict(sorted(self._entries.items())), indent=1)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")


def _check(g: CashFlowGraph) -> None:
    if g.num_edges == 0:
        raise EmptyGraph("graph has no edges")


def node_type(g: CashFlowGraph, db: Mapping[str, bool]) -> np.ndarray:
    out = np.empty((g.num_nodes, 3))
    for v, address in enumerate(g.nodes):
        verified = db.get(address)
        if verified is None:
            out[v] = EOA
        elif verified:
            out[v] = TRANSPARENT_CA
        else:
            out[v] = OPAQUE_CA
    return out


def _normalize(counts: np.ndarray) -> np.ndarray:
    peak = counts.max(axis=0)
    out = np.zeros(counts.shape)
    for col in range(counts.shape[1]):
        if peak[col] > 0:
            out[:, col] = counts[:, col] / peak[col]
    return out


def transfer_frequency(g: CashFlowGraph) -> np.ndarray:
    """Per node ``[in_count / max_in, out_count / max_out]``; parallel edges count."""
    _check(g)
    counts = np.zeros((g.num_nodes, 2))
    for s, r in g.edges:
        counts[r, 0] += 1
        counts[s, 1] += 1
    return _normalize(counts)


def transfer_diversity(g: CashFlowGraph) -> np.ndarray:
    """Per node distinct incoming/outgoing assets over the graph-wide maxima."""
    _check(g)
    incoming = defaultdict(set)
    outgoing = defaultdict(set)
    for (s, r), meta in zip(g.edges, g.edge_meta):
        incoming[r].add(meta.asset)
        outgoing[s].add(meta.asset)
    counts = np.zeros((g.num_nodes, 2))
    for v in range(g.num_nodes):
        counts[v] = len(incoming[v]), len(outgoing[v])
    return _normalize(counts)


def raw_profit(g: CashFlowGraph) -> np.ndarray:
    """Unclamped profit accumulator (sums to zero over the graph)."""
    _check(g)
    largest: dict[str, int] = {}
    for meta in g.edge_meta:
        if meta.amount > largest.get(meta.asset, 0):
            largest[meta.asset] = meta.amount
    profit = np.zeros(g.num_nodes)
    for (s, r), meta in zip(g.edges, g.edge_meta):
        # int / int is correctly rounded even for 256-bit operands
        share = meta.amount / largest[meta.asset]
        profit[s] -= share
        profit[r] += share
    return profit


def profit_score(g: CashFlowGraph) -> np.ndarray:
    return np.clip(raw_profit(g), -1.0, 1.0)


def feature_matrix(g: CashFlowGraph, db: Mapping[str, bool]) -> np.ndarray:
    return np.hstack(
        [
            node_type(g, db),
            transfer_frequency(g),
            transfer_diversity(g),
            profit_score(g)[:, None],
        ]
    )


def assemble_features(g: CashFlowGraph, db: Mapping[str, bool]) -> CashFlowGraph:
    """Return a copy of ``g`` carrying its ``|V| x 8`` feature matrix."""
    return g.with_features(feature_matrix(g, db))


def columns_for(families) -> tuple[int, ...]:
    """Feature column indices belonging to the named families, in layout order."""
    wanted = set(families)
    unknown = wanted - FAMILIES.keys()
    if unknown:
        raise ValueError(f"unknown feature families: {sorted(unknown)}")
    return tuple(c for name, cols in FAMILIES.items() if name in wanted for c in cols)
