"""Disjoint-union batching of cash flow graphs for message passing.

All graphs in a batch are stacked into one block-diagonal graph.  Message
operators are sparse ``N x N`` matrices whose entry ``[v, u]`` is the number
of messages flowing from ``u`` into ``v`` (parallel transfers count).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..cashflow import CashFlowGraph
from ..errors import EmptyGraph

DIRECTIONS = ("symmetrized", "forward_edges")


@dataclass(eq=False)
class GraphBatch:
    adj: sp.csr_matrix  # [dst, src] message multiplicities
    graph_index: np.ndarray  # graph id per node
    num_graphs: int
    x: np.ndarray | None = None

    @property
    def num_nodes(self) -> int:
        return self.adj.shape[0]

    @cached_property
    def node_counts(self) -> np.ndarray:
        return np.bincount(self.graph_index, minlength=self.num_graphs)

    @cached_property
    def pool(self) -> sp.csr_matrix:
        """``B x N`` mean-readout operator."""
        n = self.num_nodes
        weights = 1.0 / self.node_counts[self.graph_index]
        return sp.csr_matrix((weights, (self.graph_index, np.arange(n))), shape=(self.num_graphs, n))

    @cached_property
    def gcn_norm(self) -> sp.csr_matrix:
        """``D_in^-1/2 (A + I) D_out^-1/2``; symmetric normalization when A is symmetric."""
        a_hat = (self.adj + sp.identity(self.num_nodes, format="csr")).tocsr()
        d_in = np.asarray(a_hat.sum(axis=1)).ravel()
        d_out = np.asarray(a_hat.sum(axis=0)).ravel()
        return (sp.diags(d_in**-0.5) @ a_hat @ sp.diags(d_out**-0.5)).tocsr()

    @cached_property
    def mean_adj(self) -> sp.csr_matrix:
        """Row-normalized adjacency; nodes without neighbours get an all-zero row."""
        deg = np.asarray(self.adj.sum(axis=1)).ravel()
        inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
        return (sp.diags(inv) @ self.adj).tocsr()

    @cached_property
    def attention_mask(self) -> sp.csr_matrix:
        """Neighbours plus self, with multiplicities, sorted by destination row."""
        m = (self.adj + sp.identity(self.num_nodes, format="csr")).tocsr()
        m.sort_indices()
        return m


def batch_graphs(graphs: Sequence[CashFlowGraph], direction: str = "symmetrized") -> GraphBatch:
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    if not graphs:
        raise EmptyGraph("empty batch")
    rows, cols, index = [], [], []
    offset = 0
    for gid, g in enumerate(graphs):
        if g.num_nodes == 0:
            raise EmptyGraph(f"graph {gid} has no nodes")
        for s, r in g.edges:
            rows.append(r + offset)
            cols.append(s + offset)
            if direction == "symmetrized":
                rows.append(s + offset)
                cols.append(r + offset)
        index.extend([gid] * g.num_nodes)
        offset += g.num_nodes
    adj = sp.csr_matrix(
        (np.ones(len(rows)), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(offset, offset),
    )
    adj.sum_duplicates()
    x = None
    if all(g.features is not None for g in graphs):
        x = np.vstack([g.features for g in graphs])
    return GraphBatch(adj=adj, graph_index=np.asarray(index, dtype=np.int64), num_graphs=len(graphs), x=x)
