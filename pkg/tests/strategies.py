"""Hypothesis strategies and random generators shared by the tests."""

import numpy as np
from hypothesis import strategies as st

from pmadetect.txparse import NATIVE, Transfer

ADDRESSES = ["0x" + f"{i:040x}" for i in range(1, 13)]
ASSETS = [NATIVE, "0x" + "aa" * 20, "0x" + "bb" * 20]


@st.composite
def transfer_lists(draw, max_nodes=6, max_edges=8, max_assets=2, max_amount=10**30):
    n_nodes = draw(st.integers(2, max_nodes))
    n_assets = draw(st.integers(1, max_assets))
    nodes = ADDRESSES[:n_nodes]
    edges = draw(
        st.lists(
            st.tuples(
                st.sampled_from(nodes),
                st.sampled_from(nodes),
                st.sampled_from(ASSETS[:n_assets]),
                st.integers(1, max_amount),
            ),
            min_size=1,
            max_size=max_edges,
        )
    )
    return [Transfer(*e) for e in edges]


def random_small_transfers(rng: np.random.Generator, max_nodes=6, max_edges=8, max_assets=2):
    n_nodes = int(rng.integers(2, max_nodes + 1))
    n_edges = int(rng.integers(1, max_edges + 1))
    n_assets = int(rng.integers(1, max_assets + 1))
    out = []
    for _ in range(n_edges):
        s, r = rng.integers(0, n_nodes, size=2)
        amount = int(rng.integers(1, 10**6)) * 10 ** int(rng.integers(0, 19))
        out.append(Transfer(ADDRESSES[s], ADDRESSES[r], ASSETS[rng.integers(0, n_assets)], amount))
    return out


def random_db(rng: np.random.Generator):
    db = {}
    for a in ADDRESSES:
        kind = rng.integers(0, 3)
        if kind < 2:
            db[a] = bool(kind)
    return db
