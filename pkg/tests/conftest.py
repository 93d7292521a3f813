import json

import numpy as np
import pytest

from pmadetect.features import AccountDb
from pmadetect.gnn import Checkpoint, ModelConfig, init_params
from pmadetect.txparse import TRANSFER_SIG, transaction_from_dict

EOA1 = "0x" + "e1" * 20
EOA2 = "0x" + "e2" * 20
CA1 = "0x" + "c1" * 20
CA2 = "0x" + "c2" * 20
CA3 = "0x" + "c3" * 20
USDT = "0xdac17f958d2ee523a2206206994597c13d831ec7"
TX_HASH = "0x" + "ab" * 32


def _word(address: str) -> str:
    return "0x" + "00" * 12 + address[2:]


def _trace(src, dst, value, pos, depth=1, kind="CALL"):
    return {"from": src, "to": dst, "value": hex(value), "depth": depth, "call_kind": kind, "position": pos}


def _usdt(src, dst, amount, pos):
    return {
        "address": USDT,
        "topics": ["0x" + TRANSFER_SIG.hex(), _word(src), _word(dst)],
        "data": "0x" + amount.to_bytes(32, "big").hex(),
        "position": pos,
    }


def worked_example_doc() -> dict:
    """Seven transfers: 0.1 ETH in, swapped to 120 USDT, swapped back to 0.11 ETH."""
    return {
        "tx_hash": TX_HASH,
        "chain": "ethereum",
        "call_traces": [
            _trace(EOA1, CA1, 10**17, 0, depth=0),
            _trace(CA1, CA2, 10**17, 1),
            _trace(CA3, EOA2, 11 * 10**16, 5),
            _trace(EOA2, EOA1, 11 * 10**16, 6),
        ],
        "event_logs": [
            _usdt(CA2, CA1, 120 * 10**6, 2),
            _usdt(CA1, EOA2, 120 * 10**6, 3),
            _usdt(EOA2, CA3, 120 * 10**6, 4),
        ],
    }


@pytest.fixture
def example_doc():
    return worked_example_doc()


@pytest.fixture
def example_bytes():
    return json.dumps(worked_example_doc()).encode("utf-8")


@pytest.fixture
def example_tx():
    return transaction_from_dict(worked_example_doc())


@pytest.fixture
def example_db():
    return AccountDb({CA1: False, CA2: True, CA3: True})


@pytest.fixture
def empty_tx_bytes():
    doc = {"tx_hash": TX_HASH, "chain": "ethereum", "call_traces": [], "event_logs": []}
    return json.dumps(doc).encode("utf-8")


@pytest.fixture
def small_checkpoint():
    cfg = ModelConfig(arch="graphsage")
    return Checkpoint(cfg, init_params(cfg, 3))


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1234))
