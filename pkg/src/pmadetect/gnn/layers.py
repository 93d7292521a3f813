"""Graph layers with explicit forward and backward passes.

Every ``*_forward`` returns ``(out, cache)``; the matching ``*_backward``
takes that cache and the upstream gradient and returns ``(d_input, grads)``
where ``grads`` is keyed like the layer's parameter dict.  Activations are
applied by the model, not here.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from .batch import GraphBatch

LEAKY_SLOPE = 0.2


def _check(h: np.ndarray, w: np.ndarray, name: str = "W") -> None:
    if h.ndim != 2 or w.ndim != 2 or h.shape[1] != w.shape[0]:
        raise ShapeError(f"input of shape {h.shape} does not match {name} of shape {w.shape}")


def _check_bias(b: np.ndarray, w: np.ndarray) -> None:
    if b.shape != (w.shape[1],):
        raise ShapeError(f"bias of shape {b.shape} does not match output width {w.shape[1]}")


def _check_rows(batch: GraphBatch, h: np.ndarray) -> None:
    if h.shape[0] != batch.num_nodes:
        raise ShapeError(f"{h.shape[0]} embedding rows for {batch.num_nodes} nodes")


def param_shapes(arch: str, d_in: int, d_out: int) -> dict[str, tuple[int, ...]]:
    if arch in ("mlp", "gcn"):
        return {"W": (d_in, d_out), "b": (d_out,)}
    if arch == "graphsage":
        return {"W_self": (d_in, d_out), "W_neigh": (d_in, d_out), "b": (d_out,)}
    if arch == "gin":
        return {"W_a": (d_in, d_out), "b_a": (d_out,), "W_b": (d_out, d_out), "b_b": (d_out,)}
    if arch == "gat":
        return {"W": (d_in, d_out), "att": (2 * d_out,), "b": (d_out,)}
    raise ValueError(f"unknown architecture {arch!r}")


# --- MLP (edge-blind) ---------------------------------------------------------


def mlp_forward(batch, h, p):
    _check(h, p["W"])
    _check_bias(p["b"], p["W"])
    return h @ p["W"] + p["b"], h


def mlp_backward(batch, h, p, d):
    return d @ p["W"].T, {"W": h.T @ d, "b": d.sum(axis=0)}


# --- GCN -----------------------------------------------------------------------


def gcn_forward(batch, h, p):
    _check(h, p["W"])
    _check_bias(p["b"], p["W"])
    _check_rows(batch, h)
    agg = batch.gcn_norm @ h
    return agg @ p["W"] + p["b"], agg


def gcn_backward(batch, agg, p, d):
    d_agg = d @ p["W"].T
    return batch.gcn_norm.T @ d_agg, {"W": agg.T @ d, "b": d.sum(axis=0)}


# --- GraphSAGE (mean aggregator) -----------------------------------------------


def sage_forward(batch, h, p):
    _check(h, p["W_self"], "W_self")
    _check(h, p["W_neigh"], "W_neigh")
    _check_bias(p["b"], p["W_self"])
    _check_rows(batch, h)
    neigh = batch.mean_adj @ h
    return h @ p["W_self"] + neigh @ p["W_neigh"] + p["b"], (h, neigh)


def sage_backward(batch, cache, p, d):
    h, neigh = cache
    dh = d @ p["W_self"].T + batch.mean_adj.T @ (d @ p["W_neigh"].T)
    return dh, {"W_self": h.T @ d, "W_neigh": neigh.T @ d, "b": d.sum(axis=0)}


# --- GIN (eps = 0, two-layer perceptron) ------------------------------------------


def gin_forward(batch, h, p):
    _check(h, p["W_a"], "W_a")
    _check_rows(batch, h)
    agg = h + batch.adj @ h
    u = agg @ p["W_a"] + p["b_a"]
    a = np.maximum(u, 0.0)
    _check(a, p["W_b"], "W_b")
    return a @ p["W_b"] + p["b_b"], (agg, u, a)


def gin_backward(batch, cache, p, d):
    agg, u, a = cache
    da = d @ p["W_b"].T
    du = da * (u > 0)
    d_agg = du @ p["W_a"].T
    grads = {"W_a": agg.T @ du, "b_a": du.sum(axis=0), "W_b": a.T @ d, "b_b": d.sum(axis=0)}
    return d_agg + batch.adj.T @ d_agg, grads


# --- GAT (single head) ---------------------------------------------------------


def gat_forward(batch, h, p, slope: float = LEAKY_SLOPE):
    w, att = p["W"], p["att"]
    _check(h, w)
    _check_bias(p["b"], w)
    _check_rows(batch, h)
    d_out = w.shape[1]
    if att.shape != (2 * d_out,):
        raise ShapeError(f"attention vector of shape {att.shape}, expected {(2 * d_out,)}")
    mask = batch.attention_mask
    dst = np.repeat(np.arange(batch.num_nodes), np.diff(mask.indptr))
    src = mask.indices
    z = h @ w
    s_src = z @ att[:d_out]
    s_dst = z @ att[d_out:]
    e = s_src[src] + s_dst[dst]
    logits = np.where(e > 0, e, slope * e)
    starts = mask.indptr[:-1]
    row_max = np.maximum.reduceat(logits, starts)
    ex = mask.data * np.exp(logits - row_max[dst])
    alpha = ex / np.add.reduceat(ex, starts)[dst]
    attn = mask.copy()
    attn.data = alpha
    out = attn @ z + p["b"]
    return out, (h, z, e, alpha, attn, src, dst, slope)


def gat_backward(batch, cache, p, d):
    h, z, e, alpha, attn, src, dst, slope = cache
    w, att = p["W"], p["att"]
    d_out = w.shape[1]
    n = batch.num_nodes
    dz = attn.T @ d
    d_alpha = np.einsum("ij,ij->i", d[dst], z[src])
    starts = attn.indptr[:-1]
    weighted = np.add.reduceat(alpha * d_alpha, starts)
    d_logits = alpha * (d_alpha - weighted[dst])
    de = d_logits * np.where(e > 0, 1.0, slope)
    ds_src = np.bincount(src, weights=de, minlength=n)
    ds_dst = np.bincount(dst, weights=de, minlength=n)
    a_src, a_dst = att[:d_out], att[d_out:]
    dz = dz + np.outer(ds_src, a_src) + np.outer(ds_dst, a_dst)
    grads = {
        "W": h.T @ dz,
        "att": np.concatenate([z.T @ ds_src, z.T @ ds_dst]),
        "b": d.sum(axis=0),
    }
    return dz @ w.T, grads


FORWARD = {
    "mlp": mlp_forward,
    "gcn": gcn_forward,
    "graphsage": sage_forward,
    "gin": gin_forward,
    "gat": gat_forward,
}
BACKWARD = {
    "mlp": mlp_backward,
    "gcn": gcn_backward,
    "graphsage": sage_backward,
    "gin": gin_backward,
    "gat": gat_backward,
}
