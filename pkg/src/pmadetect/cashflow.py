"""Cash flow multigraph: one node per account, one directed edge per transfer."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyGraph, SchemaError
from .txparse import NATIVE, Transfer, canonical_address


@dataclass(frozen=True)
class EdgeMeta:
    asset: str
    amount: int


@dataclass(frozen=True, eq=False)
class CashFlowGraph:
    nodes: tuple[str, ...]  # addresses, indexed by node id
    edges: tuple[tuple[int, int], ...]  # (sender, receiver)
    edge_meta: tuple[EdgeMeta, ...]
    features: np.ndarray | None = None
    label: int | None = None

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def with_features(self, features: np.ndarray) -> "CashFlowGraph":
        features = np.array(features, dtype=np.float64)
        features.setflags(write=False)
        return replace(self, features=features)

    def with_label(self, label: int | None) -> "CashFlowGraph":
        return replace(self, label=label)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CashFlowGraph):
            return NotImplemented
        if (self.nodes, self.edges, self.edge_meta, self.label) != (
            other.nodes,
            other.edges,
            other.edge_meta,
            other.label,
        ):
            return False
        if self.features is None or other.features is None:
            return self.features is None and other.features is None
        return np.array_equal(self.features, other.features)


@dataclass(frozen=True)
class GraphStats:
    node_count: int
    edge_count: int
    asset_count: int
    max_node_degree: int


def construct_graph(transfers: Iterable[Transfer], label: int | None = None) -> CashFlowGraph:
    """Build the multigraph; node ids follow first appearance of each address."""
    index: dict[str, int] = {}
    edges = []
    meta = []
    for t in transfers:
        s = index.setdefault(t.sender, len(index))
        r = index.setdefault(t.receiver, len(index))
        edges.append((s, r))
        meta.append(EdgeMeta(t.asset, t.amount))
    if not edges:
        raise EmptyGraph("transaction has no asset transfers")
    return CashFlowGraph(tuple(index), tuple(edges), tuple(meta), label=label)


def graph_stats(g: CashFlowGraph) -> GraphStats:
    degree = np.zeros(g.num_nodes, dtype=np.int64)
    for s, r in g.edges:
        degree[s] += 1
        degree[r] += 1
    return GraphStats(
        node_count=g.num_nodes,
        edge_count=g.num_edges,
        asset_count=len({m.asset for m in g.edge_meta}),
        max_node_degree=int(degree.max()) if g.num_nodes else 0,
    )


def graph_transfers(g: CashFlowGraph) -> list[Transfer]:
    return [
        Transfer(g.nodes[s], g.nodes[r], m.asset, m.amount) for (s, r), m in zip(g.edges, g.edge_meta)
    ]


# --- serialization -----------------------------------------------------------


def graph_to_dict(g: CashFlowGraph) -> dict:
    return {
        "nodes": [{"address": a} for a in g.nodes],
        "edges": [
            {"s": s, "r": r, "asset": m.asset, "amount": str(m.amount)}
            for (s, r), m in zip(g.edges, g.edge_meta)
        ],
        "features": None if g.features is None else g.features.tolist(),
        "label": g.label,
    }


def graph_from_dict(doc: dict) -> CashFlowGraph:
    try:
        nodes = tuple(canonical_address(n["address"]) for n in doc["nodes"])
        edges = []
        meta = []
        for e in doc["edges"]:
            s, r = int(e["s"]), int(e["r"])
            if not (0 <= s < len(nodes) and 0 <= r < len(nodes)):
                raise SchemaError("edges", f"edge endpoint out of range: {s}->{r}")
            asset = e["asset"] if e["asset"] == NATIVE else canonical_address(e["asset"])
            amount = int(e["amount"])
            if amount <= 0:
                raise SchemaError("edges.amount", "edge amounts must be positive")
            edges.append((s, r))
            meta.append(EdgeMeta(asset, amount))
    except KeyError as exc:
        raise SchemaError(str(exc.args[0])) from None
    except (TypeError, ValueError) as exc:
        raise SchemaError("graph", str(exc)) from None
    if not edges:
        raise EmptyGraph("serialized graph has no edges")
    g = CashFlowGraph(nodes, tuple(edges), tuple(meta), label=doc.get("label"))
    feats = doc.get("features")
    if feats is not None:
        arr = np.asarray(feats, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != len(nodes):
            raise SchemaError("features", f"feature matrix shape {arr.shape} does not match {len(nodes)} nodes")
        g = g.with_features(arr)
    return g


def dumps_graph(g: CashFlowGraph) -> str:
    return json.dumps(graph_to_dict(g))


def loads_graph(text: str | bytes) -> CashFlowGraph:
    return graph_from_dict(json.loads(text))


def permute_nodes(g: CashFlowGraph, perm: Sequence[int]) -> CashFlowGraph:
    """Relabel node ``i`` as ``perm[i]``; edge order and features follow."""
    perm = list(perm)
    nodes = [None] * g.num_nodes
    for old, new in enumerate(perm):
        nodes[new] = g.nodes[old]
    edges = tuple((perm[s], perm[r]) for s, r in g.edges)
    out = CashFlowGraph(tuple(nodes), edges, g.edge_meta, label=g.label)
    if g.features is not None:
        feats = np.empty_like(g.features)
        feats[perm] = g.features
        out = out.with_features(feats)
    return out
