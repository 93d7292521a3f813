"""Transaction fixtures: decoding, serialization and transfer filtering.

A fixture is the JSON form of one replayed transaction: its flattened call
traces and its receipt logs.  Value-bearing calls become native transfers and
ERC20 ``Transfer`` events become token transfers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable

from .errors import MalformedEvent, ParseError, RangeError, SchemaError

# keccak256("Transfer(address,address,uint256)")
TRANSFER_SIG = bytes.fromhex("ddf252ad1be2c89b69c2b068fc378daa952ba7f163c4a11628f55a4df523b3ef")

NATIVE = "native"
UINT256_MAX = (1 << 256) - 1
CHAINS = ("ethereum", "bsc")


class CallKind(str, Enum):
    CALL = "CALL"
    DELEGATECALL = "DELEGATECALL"
    STATICCALL = "STATICCALL"
    CREATE = "CREATE"
    OTHER = "OTHER"

    @classmethod
    def from_name(cls, name: str) -> "CallKind":
        name = name.upper()
        if name == "CREATE2":
            return cls.CREATE
        try:
            return cls(name)
        except ValueError:
            return cls.OTHER


VALUE_KINDS = frozenset({CallKind.CALL, CallKind.CREATE})


def canonical_address(value: str) -> str:
    """Return ``value`` as a lowercase 0x-prefixed 20-byte hex string."""
    if not isinstance(value, str):
        raise ValueError(f"address must be a string, got {type(value).__name__}")
    body = value[2:] if value[:2].lower() == "0x" else value
    if len(body) != 40:
        raise ValueError(f"address must be 20 bytes: {value!r}")
    try:
        int(body, 16)
    except ValueError:
        raise ValueError(f"address is not hexadecimal: {value!r}") from None
    return "0x" + body.lower()


def address_from_word(word: bytes) -> str:
    """Address held in the low 20 bytes of an ABI-encoded 32-byte word."""
    return "0x" + word[-20:].hex()


def is_token(asset: str) -> bool:
    return asset != NATIVE


@dataclass(frozen=True)
class CallTrace:
    caller: str
    callee: str
    value: int
    depth: int = 0
    call_kind: CallKind = CallKind.CALL
    position: int | None = None


@dataclass(frozen=True)
class EventLog:
    emitter: str
    topics: tuple[bytes, ...]
    data: bytes
    position: int | None = None


@dataclass(frozen=True)
class RawTransaction:
    tx_hash: str
    chain: str = "ethereum"
    traces: tuple[CallTrace, ...] = ()
    logs: tuple[EventLog, ...] = ()
    label: int | None = None


@dataclass(frozen=True)
class Transfer:
    sender: str
    receiver: str
    asset: str  # NATIVE or the ERC20 contract address
    amount: int


# --- fixture decoding --------------------------------------------------------


def _hex_int(raw: Any, name: str) -> int:
    if isinstance(raw, bool) or not isinstance(raw, (str, int)):
        raise SchemaError(name, f"{name} must be a 0x-prefixed hex string")
    if isinstance(raw, int):
        value = raw
    else:
        if not raw.lower().startswith("0x"):
            raise SchemaError(name, f"{name} must be a 0x-prefixed hex string: {raw!r}")
        digits = raw[2:]
        if len(digits) > 64:
            raise RangeError(f"{name} exceeds 256 bits: {len(digits)} hex digits")
        try:
            value = int(digits, 16) if digits else 0
        except ValueError:
            raise SchemaError(name, f"{name} is not hexadecimal: {raw!r}") from None
    if value < 0:
        raise RangeError(f"{name} is negative")
    if value > UINT256_MAX:
        raise RangeError(f"{name} exceeds 256 bits")
    return value


def _hex_bytes(raw: Any, name: str, size: int | None = None) -> bytes:
    if not isinstance(raw, str) or not raw.lower().startswith("0x"):
        raise SchemaError(name, f"{name} must be a 0x-prefixed hex string")
    try:
        out = bytes.fromhex(raw[2:])
    except ValueError:
        raise SchemaError(name, f"{name} is not valid hex: {raw!r}") from None
    if size is not None and len(out) != size:
        raise SchemaError(name, f"{name} must be {size} bytes, got {len(out)}")
    return out


def _require(obj: dict, key: str, where: str) -> Any:
    if not isinstance(obj, dict):
        raise SchemaError(where, f"{where} must be an object")
    if key not in obj:
        raise SchemaError(f"{where}.{key}" if where else key)
    return obj[key]


def _address(obj: dict, key: str, where: str) -> str:
    raw = _require(obj, key, where)
    try:
        return canonical_address(raw)
    except ValueError as exc:
        raise SchemaError(f"{where}.{key}", str(exc)) from None


def _position(obj: dict, where: str) -> int | None:
    pos = obj.get("position")
    if pos is None:
        return None
    if isinstance(pos, bool) or not isinstance(pos, int) or pos < 0:
        raise SchemaError(f"{where}.position", "position must be a non-negative integer")
    return pos


def transaction_from_dict(doc: dict) -> RawTransaction:
    """Validate a decoded fixture object and build a :class:`RawTransaction`."""
    if not isinstance(doc, dict):
        raise SchemaError("<root>", "fixture must be a JSON object")
    tx_hash = "0x" + _hex_bytes(_require(doc, "tx_hash", ""), "tx_hash", 32).hex()
    chain = _require(doc, "chain", "")
    if chain not in CHAINS:
        raise SchemaError("chain", f"chain must be one of {CHAINS}, got {chain!r}")

    raw_traces = _require(doc, "call_traces", "")
    if not isinstance(raw_traces, list):
        raise SchemaError("call_traces", "call_traces must be an array")
    traces = []
    for i, t in enumerate(raw_traces):
        where = f"call_traces[{i}]"
        depth = _require(t, "depth", where)
        if isinstance(depth, bool) or not isinstance(depth, int) or depth < 0:
            raise SchemaError(f"{where}.depth", "depth must be a non-negative integer")
        kind = _require(t, "call_kind", where)
        if not isinstance(kind, str):
            raise SchemaError(f"{where}.call_kind", "call_kind must be a string")
        traces.append(
            CallTrace(
                caller=_address(t, "from", where),
                callee=_address(t, "to", where),
                value=_hex_int(_require(t, "value", where), f"{where}.value"),
                depth=depth,
                call_kind=CallKind.from_name(kind),
                position=_position(t, where),
            )
        )

    raw_logs = _require(doc, "event_logs", "")
    if not isinstance(raw_logs, list):
        raise SchemaError("event_logs", "event_logs must be an array")
    logs = []
    for i, lg in enumerate(raw_logs):
        where = f"event_logs[{i}]"
        topics_raw = _require(lg, "topics", where)
        if not isinstance(topics_raw, list) or len(topics_raw) > 4:
            raise SchemaError(f"{where}.topics", "topics must be an array of at most 4 words")
        topics = tuple(_hex_bytes(w, f"{where}.topics[{j}]", 32) for j, w in enumerate(topics_raw))
        logs.append(
            EventLog(
                emitter=_address(lg, "address", where),
                topics=topics,
                data=_hex_bytes(_require(lg, "data", where), f"{where}.data"),
                position=_position(lg, where),
            )
        )

    label = doc.get("label")
    if label is not None and (isinstance(label, bool) or label not in (0, 1)):
        raise SchemaError("label", "label must be 0 or 1")
    return RawTransaction(tx_hash, chain, tuple(traces), tuple(logs), label)


def parse_fixture(raw_bytes: bytes) -> RawTransaction:
    """Decode a UTF-8 JSON fixture document.

    Raises ParseError (with byte offset) on undecodable input, SchemaError
    naming the offending field, and RangeError for amounts above 2**256-1.
    """
    if isinstance(raw_bytes, str):
        raw_bytes = raw_bytes.encode("utf-8")
    try:
        text = raw_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError("fixture is not valid UTF-8", offset=exc.start) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise ParseError(f"malformed JSON: {exc.msg}", offset=offset) from None
    return transaction_from_dict(doc)


def transaction_to_dict(tx: RawTransaction) -> dict:
    traces = []
    for t in tx.traces:
        item = {
            "from": t.caller,
            "to": t.callee,
            "value": hex(t.value),
            "depth": t.depth,
            "call_kind": t.call_kind.value,
        }
        if t.position is not None:
            item["position"] = t.position
        traces.append(item)
    logs = []
    for lg in tx.logs:
        item = {
            "address": lg.emitter,
            "topics": ["0x" + w.hex() for w in lg.topics],
            "data": "0x" + lg.data.hex(),
        }
        if lg.position is not None:
            item["position"] = lg.position
        logs.append(item)
    doc = {"tx_hash": tx.tx_hash, "chain": tx.chain, "call_traces": traces, "event_logs": logs}
    if tx.label is not None:
        doc["label"] = tx.label
    return doc


def serialize_fixture(tx: RawTransaction) -> bytes:
    return json.dumps(transaction_to_dict(tx), indent=2).encode("utf-8")


# --- transfer filtering ------------------------------------------------------


def decode_transfer_event(log: EventLog) -> Transfer | None:
    """Decode an ERC20 ``Transfer`` log, or return None for any other event.

    A log whose first topic is the Transfer signature but which lacks the two
    indexed address topics or a single-word amount raises MalformedEvent.
    """
    if not log.topics or log.topics[0] != TRANSFER_SIG:
        return None
    if len(log.topics) < 3:
        raise MalformedEvent(f"Transfer event from {log.emitter} has {len(log.topics)} topics, expected 3")
    if len(log.data) != 32:
        raise MalformedEvent(f"Transfer event from {log.emitter} has {len(log.data)} data bytes, expected 32")
    return Transfer(
        sender=address_from_word(log.topics[1]),
        receiver=address_from_word(log.topics[2]),
        asset=log.emitter,
        amount=int.from_bytes(log.data, "big"),
    )


def _ordered_records(tx: RawTransaction) -> Iterable[CallTrace | EventLog]:
    records: list[CallTrace | EventLog] = [*tx.traces, *tx.logs]
    if records and all(r.position is not None for r in records):
        # stable: ties keep traces-then-logs order
        return sorted(records, key=lambda r: r.position)
    return records


def extract_transfers(tx: RawTransaction, diagnostics: list | None = None) -> list[Transfer]:
    """Native and ERC20 transfers of ``tx`` in execution order.

    Only CALL/CREATE frames with a positive value count as native transfers.
    Zero-amount token transfers are dropped.  Malformed Transfer logs are
    skipped and, if ``diagnostics`` is given, appended to it.
    """
    out: list[Transfer] = []
    log_index = {id(lg): i for i, lg in enumerate(tx.logs)}
    for rec in _ordered_records(tx):
        if isinstance(rec, CallTrace):
            if rec.value > 0 and rec.call_kind in VALUE_KINDS:
                out.append(Transfer(rec.caller, rec.callee, NATIVE, rec.value))
            continue
        try:
            transfer = decode_transfer_event(rec)
        except MalformedEvent as exc:
            exc.log_index = log_index[id(rec)]
            if diagnostics is not None:
                diagnostics.append(exc)
            continue
        if transfer is not None and transfer.amount > 0:
            out.append(transfer)
    return out


def transfers_to_dicts(transfers: Iterable[Transfer]) -> list[dict]:
    return [
        {"sender": t.sender, "receiver": t.receiver, "asset": t.asset, "amount": str(t.amount)}
        for t in transfers
    ]

