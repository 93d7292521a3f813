"""Minimal archive-node client: replays a transaction with the call tracer.

Two standard JSON-RPC calls are made per transaction:

* ``eth_getTransactionReceipt`` for the event logs (and to detect unknown hashes)
* ``debug_traceTransaction`` with ``{"tracer": "callTracer"}`` for the call tree

The nested call tree is flattened depth-first into :class:`CallTrace` rows, so
the result is identical to what ``parse_fixture`` yields on the equivalent
fixture document.
"""

from __future__ import annotations

import itertools
import threading

import requests

from .errors import NetworkError, NotFound, SchemaError, UnsupportedNode
from .txparse import RawTransaction, transaction_from_dict

METHOD_NOT_FOUND = -32601


class RpcClient:
    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint
        self.timeout = timeout
        self._session = requests.Session()
        self._ids = itertools.count(1)
        self._lock = threading.Lock()

    def close(self) -> None:
        self._session.close()

    def call(self, method: str, params: list):
        with self._lock:
            req_id = next(self._ids)
        body = {"jsonrpc": "2.0", "id": req_id, "method": method, "params": params}
        try:
            resp = self._session.post(self.endpoint, json=body, timeout=self.timeout)
        except requests.RequestException as exc:
            raise NetworkError(f"{method}: {exc}") from exc
        if resp.status_code >= 500:
            raise NetworkError(f"{method}: HTTP {resp.status_code}")
        try:
            payload = resp.json()
        except ValueError:
            raise NetworkError(f"{method}: non-JSON response (HTTP {resp.status_code})") from None
        err = payload.get("error")
        if err:
            code = err.get("code")
            msg = err.get("message", "")
            if code == METHOD_NOT_FOUND or "not supported" in msg or "does not exist" in msg:
                raise UnsupportedNode(f"{method}: {msg}")
            if "not found" in msg.lower():
                raise NotFound(f"{method}: {msg}")
            raise NetworkError(f"{method}: RPC error {code}: {msg}")
        return payload.get("result")


def flatten_call_tree(frame: dict, depth: int = 0, out: list | None = None) -> list[dict]:
    """Depth-first flattening of a callTracer frame into fixture trace rows.

    Reverted frames (those with an ``error`` field) moved no value and are
    dropped along with their subcalls.
    """
    if out is None:
        out = []
    if frame.get("error"):
        return out
    out.append(
        {
            "from": frame["from"],
            "to": frame.get("to") or "0x" + "0" * 40,
            "value": frame.get("value") or "0x0",
            "depth": depth,
            "call_kind": frame.get("type", "CALL"),
        }
    )
    for child in frame.get("calls") or ():
        flatten_call_tree(child, depth + 1, out)
    return out


def fixture_from_rpc(tx_hash: str, chain: str, trace: dict, receipt: dict) -> dict:
    logs = [
        {"address": lg["address"], "topics": lg.get("topics", []), "data": lg.get("data", "0x")}
        for lg in receipt.get("logs") or ()
    ]
    return {
        "tx_hash": tx_hash,
        "chain": chain,
        "call_traces": flatten_call_tree(trace) if trace else [],
        "event_logs": logs,
    }


def fetch_transaction(endpoint: str | RpcClient, tx_hash: str, chain: str = "ethereum") -> RawTransaction:
    """Replay ``tx_hash`` on an archive node and decode it like a fixture."""
    client = endpoint if isinstance(endpoint, RpcClient) else RpcClient(endpoint)
    try:
        receipt = client.call("eth_getTransactionReceipt", [tx_hash])
        if receipt is None:
            raise NotFound(f"unknown transaction {tx_hash}")
        trace = client.call("debug_traceTransaction", [tx_hash, {"tracer": "callTracer"}])
        if trace is not None and not isinstance(trace, dict):
            raise UnsupportedNode("debug_traceTransaction did not return a callTracer frame")
        try:
            return transaction_from_dict(fixture_from_rpc(tx_hash, chain, trace, receipt))
        except KeyError as exc:
            raise SchemaError(str(exc.args[0]), f"RPC response lacks field {exc.args[0]}") from None
    finally:
        if client is not endpoint:
            client.close()
