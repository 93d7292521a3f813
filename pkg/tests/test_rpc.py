import pytest

from mock_node import MockNode, transfer_log
from pmadetect.errors import NetworkError, NotFound, UnsupportedNode
from pmadetect.rpc import RpcClient, fetch_transaction, flatten_call_tree
from pmadetect.txparse import NATIVE, CallKind, Transfer, extract_transfers

from conftest import CA1, CA2, CA3, EOA1, EOA2, TX_HASH, USDT

TRACE = {
    "type": "CALL",
    "from": EOA1,
    "to": CA1,
    "value": hex(10**17),
    "calls": [
        {"type": "CALL", "from": CA1, "to": CA2, "value": hex(10**17)},
        {
            "type": "CALL",
            "from": CA1,
            "to": CA3,
            "value": "0x5",
            "error": "execution reverted",
            "calls": [{"type": "CALL", "from": CA3, "to": EOA2, "value": "0x9"}],
        },
        {"type": "STATICCALL", "from": CA1, "to": USDT},
        {"type": "CREATE2", "from": CA1, "value": "0x3", "to": CA3},
    ],
}
LOGS = [transfer_log(USDT, CA2, CA1, 120 * 10**6)]


def test_flatten_depth_first_and_drops_reverted():
    rows = flatten_call_tree(TRACE)
    assert [(r["from"], r["to"], r["depth"]) for r in rows] == [
        (EOA1, CA1, 0),
        (CA1, CA2, 1),
        (CA1, USDT, 1),
        (CA1, CA3, 1),
    ]
    assert rows[2]["value"] == "0x0"


def test_fetch_transaction_matches_fixture_decoding():
    with MockNode({TX_HASH: (TRACE, LOGS)}) as node:
        tx = fetch_transaction(node.url, TX_HASH)
    assert [r["method"] for r in node.requests] == ["eth_getTransactionReceipt", "debug_traceTransaction"]
    assert node.requests[1]["params"][1] == {"tracer": "callTracer"}
    assert tx.traces[3].call_kind is CallKind.CREATE
    assert extract_transfers(tx) == [
        Transfer(EOA1, CA1, NATIVE, 10**17),
        Transfer(CA1, CA2, NATIVE, 10**17),
        Transfer(CA1, CA3, NATIVE, 3),
        Transfer(CA2, CA1, USDT, 120 * 10**6),
    ]


def test_unknown_hash():
    with MockNode({}) as node:
        with pytest.raises(NotFound):
            fetch_transaction(node.url, TX_HASH)


def test_node_without_debug_namespace():
    with MockNode({TX_HASH: (TRACE, LOGS)}) as node:
        del node.handlers["debug_traceTransaction"]
        with pytest.raises(UnsupportedNode):
            fetch_transaction(node.url, TX_HASH)


def test_server_errors_are_network_errors():
    with MockNode({}) as node:
        node.http_status = 503
        with pytest.raises(NetworkError) as info:
            RpcClient(node.url).call("eth_blockNumber", [])
    assert info.value.phase == "parse"


def test_unreachable_endpoint():
    with pytest.raises(NetworkError):
        RpcClient("http://127.0.0.1:9", timeout=2).call("eth_blockNumber", [])
