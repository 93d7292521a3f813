"""Seeded synthetic cash flow graphs with a planted class signal.

Each family plants the class difference in a single feature family and keeps
every other family identically distributed across classes, so removing the
planted family leaves the classes indistinguishable:

profit_cycle
    A closed relay loop of one asset.  Benign loops pass on roughly what they
    receive; positive loops have one node that forwards a small fraction of
    the amount it gets back (profit score above 0.8).
frequency_burst
    A back-and-forth pair plus a payout chain.  Positives repeat the pair's
    swaps several times; net flows and asset sets are unchanged.
diversity_spread
    Two collection hubs.  In positives one hub collects a different asset
    from every sender.
structure_only
    Sender/receiver pairs of opaque and transparent contracts.  Positives pair
    like with like, negatives pair opposite kinds; per-node features have the
    same distribution in both classes, only the wiring differs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cashflow import construct_graph
from ..errors import ConfigError
from ..features import AccountDb, assemble_features
from ..txparse import NATIVE, TRANSFER_SIG, CallKind, CallTrace, EventLog, RawTransaction, Transfer
from .dataset import Dataset

FAMILIES = ("profit_cycle", "frequency_burst", "diversity_spread", "structure_only")
# smallest graph each family can express
MIN_NODES = {"profit_cycle": 3, "frequency_burst": 3, "diversity_spread": 6, "structure_only": 4}


@dataclass(frozen=True)
class SynthConfig:
    count_per_class: int = 300
    min_nodes: int = 4
    max_nodes: int = 12
    family: str = "profit_cycle"
    seed: int = 0
    negative_count: int | None = None  # defaults to count_per_class

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown signal family {self.family!r}; choose from {FAMILIES}")
        if self.count_per_class < 1 or (self.negative_count is not None and self.negative_count < 1):
            raise ConfigError("class counts must be >= 1")
        if self.min_nodes > self.max_nodes:
            raise ConfigError(f"empty node range [{self.min_nodes}, {self.max_nodes}]")
        if self.max_nodes < MIN_NODES[self.family]:
            raise ConfigError(f"{self.family} needs at least {MIN_NODES[self.family]} nodes")


class _Builder:
    def __init__(self, rng: np.random.Generator, db_entries: dict):
        self.rng = rng
        self.db = db_entries

    def address(self) -> str:
        return "0x" + self.rng.bytes(20).hex()

    def account(self, kind: str | None = None) -> str:
        """New account; ``kind`` is 'eoa', 'opaque' or 'transparent' (random if None)."""
        addr = self.address()
        if kind is None:
            kind = self.rng.choice(["eoa", "transparent", "opaque"], p=[0.4, 0.35, 0.25])
        if kind != "eoa":
            self.db[addr] = kind == "transparent"
        return addr

    def asset(self) -> str:
        return NATIVE if self.rng.random() < 0.3 else self.address()

    def scale(self) -> int:
        return 10 ** int(self.rng.integers(6, 19))

    def amount(self, ratio: float, scale: int) -> int:
        return max(1, int(round(ratio * 1_000_000)) * scale)


def _profit_cycle(b: _Builder, n: int, positive: bool) -> list[Transfer]:
    nodes = [b.account() for _ in range(n)]
    asset, scale = b.asset(), b.scale()
    ratios = b.rng.uniform(0.9, 1.0, size=n)
    skim = b.rng.uniform(0.02, 0.1)
    if positive:
        ratios[0] = skim  # v0 -> v1 forwards a sliver
        ratios[-1] = 1.0  # v_{n-1} -> v0 pays back the largest amount
    return [Transfer(nodes[i], nodes[(i + 1) % n], asset, b.amount(ratios[i], scale)) for i in range(n)]


def _frequency_burst(b: _Builder, n: int, positive: bool) -> list[Transfer]:
    a, partner = b.account(), b.account()
    chain = [b.account() for _ in range(n - 2)]
    asset, scale = b.asset(), b.scale()
    swap = b.amount(b.rng.uniform(0.5, 1.0), scale)
    repeats = int(b.rng.integers(3, 7)) if positive else 1
    out = []
    for _ in range(repeats):
        out.append(Transfer(a, partner, asset, swap))
        out.append(Transfer(partner, a, asset, swap))
    hops = [a, *chain]
    payout = b.amount(b.rng.uniform(0.5, 1.0), scale)
    for s, r in zip(hops, hops[1:]):
        out.append(Transfer(s, r, asset, payout))
    return out


def _diversity_spread(b: _Builder, n: int, positive: bool) -> list[Transfer]:
    k = (n - 2) // 2
    hubs = [b.account(), b.account()]
    shared = [b.asset(), b.asset()]
    out = []
    for h, hub in enumerate(hubs):
        spread = positive and h == 0
        assets = [b.address() for _ in range(k)] if spread else [shared[h]] * k
        for asset in assets:
            # one amount per asset keeps every normalized transfer at exactly 1
            out.append(Transfer(b.account(), hub, asset, 10**18))
    return out


def _structure_only(b: _Builder, n: int, positive: bool) -> list[Transfer]:
    j = max(1, n // 4)
    asset, scale = b.asset(), b.scale()
    if positive:
        pairs = [("opaque", "opaque")] * j + [("transparent", "transparent")] * j
    else:
        pairs = [("opaque", "transparent")] * j + [("transparent", "opaque")] * j
    order = b.rng.permutation(len(pairs))
    out = []
    for idx in order:
        s_kind, r_kind = pairs[idx]
        sender, receiver = b.account(s_kind), b.account(r_kind)
        out.append(Transfer(sender, receiver, asset, b.amount(b.rng.uniform(0.1, 1.0), scale)))
    return out


_GENERATORS = {
    "profit_cycle": _profit_cycle,
    "frequency_burst": _frequency_burst,
    "diversity_spread": _diversity_spread,
    "structure_only": _structure_only,
}


def synth_transfers(family: str, rng: np.random.Generator, n_nodes: int, positive: bool, db: dict) -> list[Transfer]:
    return _GENERATORS[family](_Builder(rng, db), n_nodes, positive)


def synth_dataset(cfg: SynthConfig) -> Dataset:
    """Featurized, labeled graphs; positives and negatives are interleaved."""
    cfg.validate()
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    low = max(cfg.min_nodes, MIN_NODES[cfg.family])
    n_neg = cfg.negative_count if cfg.negative_count is not None else cfg.count_per_class
    schedule = [lab for pair in _interleave(cfg.count_per_class, n_neg) for lab in pair]

    db_entries: dict[str, bool] = {}
    raw = []
    for label in schedule:
        n = int(rng.integers(low, cfg.max_nodes + 1))
        transfers = synth_transfers(cfg.family, rng, n, bool(label), db_entries)
        chain = "ethereum" if rng.random() < 0.5 else "bsc"
        raw.append((construct_graph(transfers, label=label), chain))

    db = AccountDb(db_entries)
    graphs = [assemble_features(g, db) for g, _ in raw]
    names = [f"tx_{i:05d}" for i in range(len(graphs))]
    return Dataset(graphs=graphs, chains=[c for _, c in raw], names=names, db=db)


def _interleave(n_pos: int, n_neg: int):
    for i in range(max(n_pos, n_neg)):
        pair = []
        if i < n_pos:
            pair.append(1)
        if i < n_neg:
            pair.append(0)
        yield pair


# --- random graphs and fixtures for benchmarking ---------------------------------


def random_transfers(rng: np.random.Generator, n_nodes: int, n_edges: int, n_assets: int = 3) -> list[Transfer]:
    """Random multigraph transfers touching every one of ``n_nodes`` accounts."""
    if n_nodes < 2 or n_edges < n_nodes - 1:
        raise ConfigError("need n_nodes >= 2 and n_edges >= n_nodes - 1")
    accounts = ["0x" + rng.bytes(20).hex() for _ in range(n_nodes)]
    assets = [NATIVE] + ["0x" + rng.bytes(20).hex() for _ in range(n_assets - 1)]
    out = []
    # a random spanning path first so every account appears
    perm = rng.permutation(n_nodes)
    for i in range(n_nodes - 1):
        out.append((perm[i], perm[i + 1]))
    while len(out) < n_edges:
        s, r = rng.integers(0, n_nodes, size=2)
        out.append((s, r))
    return [
        Transfer(accounts[s], accounts[r], assets[rng.integers(0, n_assets)], int(rng.integers(1, 10**12)) * 10**6)
        for s, r in out
    ]


def transfers_to_transaction(transfers: list[Transfer], tx_hash: str, chain: str = "ethereum") -> RawTransaction:
    """Encode transfers as the call traces and Transfer logs that would produce them."""
    traces = []
    logs = []
    for pos, t in enumerate(transfers):
        if t.asset == NATIVE:
            traces.append(CallTrace(t.sender, t.receiver, t.amount, depth=1, call_kind=CallKind.CALL, position=pos))
        else:
            logs.append(
                EventLog(
                    emitter=t.asset,
                    topics=(
                        TRANSFER_SIG,
                        bytes(12) + bytes.fromhex(t.sender[2:]),
                        bytes(12) + bytes.fromhex(t.receiver[2:]),
                    ),
                    data=t.amount.to_bytes(32, "big"),
                    position=pos,
                )
            )
    return RawTransaction(tx_hash=tx_hash, chain=chain, traces=tuple(traces), logs=tuple(logs))
