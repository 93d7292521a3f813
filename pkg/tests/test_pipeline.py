import json

import pytest

from mock_node import MockNode, transfer_log
from pmadetect.cashflow import GraphStats, construct_graph, graph_stats
from pmadetect.errors import ParseError
from pmadetect.features import assemble_features
from pmadetect.gnn import infer
from pmadetect.pipeline import Classifier, PipelineError, classify_pipeline, error_document
from pmadetect.txparse import extract_transfers, parse_fixture

from conftest import CA1, CA2, EOA1, TX_HASH, USDT


def test_worked_example_response(example_bytes, example_db, small_checkpoint):
    r = classify_pipeline(example_bytes, small_checkpoint, example_db)
    assert r.graph_stats == GraphStats(5, 7, 2, 4)
    assert r.tx_hash == TX_HASH
    t = r.timing
    assert min(t.parse_ms, t.build_ms, t.classify_ms, t.total_ms) > 0
    assert t.total_ms >= t.parse_ms + t.build_ms + t.classify_ms - 1e-3
    assert not r.no_transfers


def test_pipeline_equals_library_composition(example_bytes, example_db, small_checkpoint):
    r = classify_pipeline(example_bytes, small_checkpoint, example_db)
    g = assemble_features(construct_graph(extract_transfers(parse_fixture(example_bytes))), example_db)
    pred = infer(g, small_checkpoint.params, small_checkpoint.config)
    assert (r.prediction, r.score) == (pred.label, pred.score)
    assert r.graph_stats == graph_stats(g)


def test_transfer_free_transaction(empty_tx_bytes, small_checkpoint):
    r = classify_pipeline(empty_tx_bytes, small_checkpoint)
    assert r.prediction == 0 and r.no_transfers
    assert r.graph_stats == GraphStats(0, 0, 0, 0)


def test_corrupt_fixture_names_parse_phase(small_checkpoint):
    with pytest.raises(ParseError) as info:
        classify_pipeline(b"{not json", small_checkpoint)
    doc = error_document(info.value)
    assert doc["error"]["phase"] == "parse"
    assert doc["error"]["type"] == "ParseError"


def test_unexpected_errors_are_wrapped(small_checkpoint):
    clf = Classifier(small_checkpoint)
    with pytest.raises(PipelineError) as info:
        clf._run(lambda: 1 / 0)
    assert info.value.phase == "parse"
    assert error_document(info.value)["error"]["type"] == "ZeroDivisionError"


def test_classify_from_archive_node(small_checkpoint):
    trace = {"type": "CALL", "from": EOA1, "to": CA1, "value": "0x10"}
    logs = [transfer_log(USDT, CA1, CA2, 5)]
    with MockNode({TX_HASH: (trace, logs)}) as node:
        r = classify_pipeline((TX_HASH, node.url), small_checkpoint)
    assert r.graph_stats == GraphStats(3, 2, 2, 2)


def test_hash_without_endpoint(small_checkpoint):
    with pytest.raises(PipelineError):
        Classifier(small_checkpoint).classify_hash(TX_HASH)


def test_response_serializes(example_bytes, small_checkpoint):
    doc = json.loads(json.dumps(classify_pipeline(example_bytes, small_checkpoint).to_dict()))
    assert set(doc) == {"tx_hash", "prediction", "score", "timing", "graph_stats", "no_transfers", "malformed_events"}
    assert set(doc["timing"]) == {"parse_ms", "build_ms", "classify_ms", "total_ms"}
    assert set(doc["graph_stats"]) == {"node_count", "edge_count", "asset_count", "max_node_degree"}
