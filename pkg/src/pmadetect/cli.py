"""Command-line front end.

Every long option can also be supplied through the environment as
``PMADETECT_<OPTION>`` (upper case, dashes become underscores), e.g.
``PMADETECT_MODEL=m.ckpt pmadetect classify --fixture tx.json``.  Explicit
flags win over the environment.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cashflow import construct_graph, dumps_graph, loads_graph
from .errors import ConfigError, PMAError
from .features import AccountDb, FAMILIES, assemble_features
from .gnn import ARCHITECTURES, Checkpoint, ModelConfig, TrainConfig, infer, init_params, train
from .gnn.batch import DIRECTIONS
from .pipeline import Classifier, error_document
from .txparse import extract_transfers, parse_fixture, serialize_fixture, transfers_to_dicts

ENV_PREFIX = "PMADETECT_"
log = logging.getLogger("pmadetect")


# --- helpers ---------------------------------------------------------------------


def _int_grid(text: str) -> list[int]:
    """``20:100:10`` (inclusive range) or ``20,40,60``."""
    try:
        if ":" in text:
            start, stop, step = (int(p) for p in text.split(":"))
            if step <= 0:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:STOP:STEP or a comma list, got {text!r}") from None


def _read_bytes(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load_db(path: str | None) -> AccountDb:
    return AccountDb.load(path) if path else AccountDb()


def _model_config(args) -> ModelConfig:
    return ModelConfig(arch=args.arch, num_layers=args.layers, hidden_dim=args.hidden, direction=args.direction)


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        train_size_per_class=args.train_size,
        learning_rate=args.lr,
        seed=args.seed,
    )


def _load_dataset(args):
    from .harness import Dataset

    return Dataset.load(args.data, _load_db(args.db) if args.db else None)


# --- subcommands -----------------------------------------------------------------


def cmd_parse(args) -> int:
    diagnostics: list = []
    tx = parse_fixture(_read_bytes(args.fixture))
    transfers = extract_transfers(tx, diagnostics)
    doc = {"tx_hash": tx.tx_hash, "transfers": transfers_to_dicts(transfers)}
    if diagnostics:
        doc["malformed_events"] = [str(d) for d in diagnostics]
    _emit(json.dumps(doc, indent=2), args.out)
    return 0


def cmd_build(args) -> int:
    tx = parse_fixture(_read_bytes(args.fixture))
    g = construct_graph(extract_transfers(tx), label=args.label)
    if args.db:
        g = assemble_features(g, _load_db(args.db))
    _emit(dumps_graph(g), args.out)
    return 0


def cmd_featurize(args) -> int:
    g = loads_graph(_read_bytes(args.graph))
    _emit(dumps_graph(assemble_features(g, _load_db(args.db))), args.out)
    return 0


def cmd_synth(args) -> int:
    from .harness import SynthConfig, synth_dataset

    cfg = SynthConfig(
        count_per_class=args.count,
        negative_count=args.negatives,
        min_nodes=args.min_nodes,
        max_nodes=args.max_nodes,
        family=args.family,
        seed=args.seed,
    )
    ds = synth_dataset(cfg)
    ds.save(args.out)
    print(f"wrote {len(ds)} graphs to {args.out}")
    return 0


def cmd_train(args) -> int:
    from .harness import split_dataset
    from .plots import plot_losses
    from .reports import loss_csv, write_text

    ds = _load_dataset(args)
    tcfg = _train_config(args)
    mcfg = _model_config(args)
    train_set, _ = split_dataset(ds, tcfg.train_size_per_class, tcfg.seed)
    result = train(train_set.graphs, train_set.labels, mcfg, tcfg)
    ckpt = Checkpoint(mcfg, result.params, tcfg.to_dict())
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    ckpt.save(out)
    loss_path = Path(args.loss_csv) if args.loss_csv else out.with_suffix(".loss.csv")
    write_text(loss_path, loss_csv(result.losses))
    if not args.no_plots:
        plot_losses(result.losses, loss_path.with_suffix(".png"))
    print(f"checkpoint {out} sha256={ckpt.digest()} final_loss={result.losses[-1]:.6f}")
    return 0


def cmd_eval(args) -> int:
    from .harness import evaluate, split_dataset
    from .reports import metrics_csv, write_text

    ckpt = Checkpoint.load(args.model)
    ds = _load_dataset(args)
    if args.all:
        test = ds
    else:
        tc = ckpt.train_config or {}
        size = args.train_size or tc.get("train_size_per_class")
        seed = args.seed if args.seed is not None else tc.get("seed")
        if size is None or seed is None:
            raise ConfigError("checkpoint lacks its training split; pass --train-size and --seed or --all")
        _, test = split_dataset(ds, int(size), int(seed))
    metrics, _ = evaluate(test, ckpt.params, ckpt.config)
    text = metrics_csv([(Path(args.model).stem, metrics)])
    if args.out:
        write_text(args.out, text)
    sys.stdout.write(text)
    return 0


def cmd_ablate(args) -> int:
    from .harness import AblationMask, ablation_run
    from .plots import plot_ablation
    from .reports import ablation_csv, write_text

    ds = _load_dataset(args)
    mcfg, tcfg = _model_config(args), _train_config(args)
    masks = [AblationMask()]
    for family in args.drop or FAMILIES:
        masks.append(AblationMask.without(family))
    rows = [(m.name, m.columns, ablation_run(ds, m, mcfg, tcfg)) for m in masks]
    text = ablation_csv(rows)
    out = Path(args.out)
    write_text(out, text)
    if not args.no_plots:
        plot_ablation([(name, m) for name, _, m in rows], out.with_suffix(".png"))
    sys.stdout.write(text)
    return 0


def cmd_sweep(args) -> int:
    from .harness import sweep
    from .plots import plot_sweep
    from .reports import sweep_csv, write_text

    ds = _load_dataset(args)
    cells = sweep(ds, args.epochs_grid, args.train_sizes, _model_config(args), _train_config(args))
    out = Path(args.out)
    write_text(out, sweep_csv(cells))
    if not args.no_plots:
        plot_sweep(cells, out.with_suffix(".png"))
    print(f"wrote {len(cells)} cells to {out}")
    return 0


def cmd_classify(args) -> int:
    clf = Classifier.load(args.model, args.db, args.rpc)
    if args.fixture:
        response = clf.classify_fixture(_read_bytes(args.fixture))
    elif args.tx_hash:
        response = clf.classify_hash(args.tx_hash, chain=args.chain)
    else:
        raise ConfigError("classify needs --fixture or --tx-hash")
    print(json.dumps(response.to_dict(), indent=2))
    return 0


def cmd_serve(args) -> int:
    from .service import make_server

    clf = Classifier.load(args.model, args.db, args.rpc)
    server = make_server(args.host, args.port, clf, args.max_body)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port} (POST /classify, GET /health)", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def run_bench(n_graphs: int, n_nodes: int, checkpoint: Checkpoint, seed: int = 0, n_edges: int | None = None) -> dict:
    """Latency of the classify phase over featurized graphs, plus the fixture pipeline."""
    from .harness.synth import random_transfers, transfers_to_transaction

    rng = np.random.Generator(np.random.PCG64(seed))
    n_edges = n_edges or 2 * n_nodes
    db = AccountDb()
    fixtures, graphs = [], []
    for i in range(n_graphs):
        transfers = random_transfers(rng, n_nodes, n_edges)
        g = assemble_features(construct_graph(transfers), db)
        graphs.append(g)
        if len(fixtures) < min(n_graphs, 100):
            tx = transfers_to_transaction(transfers, "0x" + f"{i:064x}")
            fixtures.append(serialize_fixture(tx))
    params, config = checkpoint.params, checkpoint.config
    infer(graphs[0], params, config)  # warm caches
    classify_ms = np.empty(n_graphs)
    for i, g in enumerate(graphs):
        t0 = time.perf_counter_ns()
        infer(g, params, config)
        classify_ms[i] = (time.perf_counter_ns() - t0) / 1e6
    clf = Classifier(checkpoint, db)
    total_ms = np.array([clf.classify_fixture(raw).timing.total_ms for raw in fixtures])
    return {
        "graphs": n_graphs,
        "nodes": n_nodes,
        "edges": n_edges,
        "arch": config.arch,
        "classify_ms_p50": float(np.percentile(classify_ms, 50)),
        "classify_ms_p95": float(np.percentile(classify_ms, 95)),
        "classify_ms_mean": float(classify_ms.mean()),
        "pipeline_samples": len(fixtures),
        "pipeline_ms_p50": float(np.percentile(total_ms, 50)),
        "pipeline_ms_max": float(total_ms.max()),
        "pipeline_ms_mean": float(total_ms.mean()),
    }


def cmd_bench(args) -> int:
    if args.model:
        ckpt = Checkpoint.load(args.model)
    else:
        cfg = _model_config(args)
        ckpt = Checkpoint(cfg, init_params(cfg, args.seed))
    report = run_bench(args.graphs, args.nodes, ckpt, args.seed, args.edges)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for key, value in report.items():
            print(f"{key:>18}: {value:.4f}" if isinstance(value, float) else f"{key:>18}: {value}")
    return 0


# --- parser ----------------------------------------------------------------------


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--arch", default="graphsage", choices=ARCHITECTURES)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--hidden", type=int, default=16)
    p.add_argument("--direction", default="symmetrized", choices=DIRECTIONS)


def _train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--train-size", type=int, default=100, help="training graphs per class")
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=42)


def _data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="dataset directory (manifest.csv + graphs/)")
    p.add_argument("--db", help="account DB JSON; defaults to the dataset's account_db.json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmadetect",
        description="Cash flow graph classification of price manipulation transactions.",
        epilog=f"Any --option may be set via the environment as {ENV_PREFIX}OPTION "
        f"(e.g. {ENV_PREFIX}MODEL, {ENV_PREFIX}TRAIN_SIZE). Flags take precedence.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("parse", help="fixture -> transfer list (JSON)")
    p.add_argument("--fixture", required=True, help="fixture JSON path or '-' for stdin")
    p.add_argument("--out")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("build", help="fixture -> cash flow graph file")
    p.add_argument("--fixture", required=True)
    p.add_argument("--db", help="also attach features using this account DB")
    p.add_argument("--label", type=int, choices=(0, 1))
    p.add_argument("--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("featurize", help="graph + account DB -> featurized graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--db")
    p.add_argument("--out")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("synth", help="generate a labeled synthetic dataset directory")
    p.add_argument("--family", default="profit_cycle", choices=("profit_cycle", "frequency_burst", "diversity_spread", "structure_only"))
    p.add_argument("--count", type=int, default=300, help="positives (and negatives unless --negatives)")
    p.add_argument("--negatives", type=int)
    p.add_argument("--min-nodes", type=int, default=4)
    p.add_argument("--max-nodes", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="dataset -> checkpoint + loss CSV")
    _data_flags(p)
    _model_flags(p)
    _train_flags(p)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--loss-csv", help="defaults to <out>.loss.csv")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="checkpoint + dataset -> metrics CSV")
    _data_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--all", action="store_true", help="score every graph instead of the held-out split")
    p.add_argument("--train-size", type=int, help="override the split recorded in the checkpoint")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="retrain without each feature family -> metrics CSV")
    _data_flags(p)
    _model_flags(p)
    _train_flags(p)
    p.add_argument("--drop", nargs="+", choices=FAMILIES, help="families to ablate (default: each)")
    p.add_argument("--out", required=True)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("sweep", help="epochs x train-size grid -> grid CSV + heatmaps")
    _data_flags(p)
    _model_flags(p)
    _train_flags(p)
    p.add_argument("--epochs-grid", type=_int_grid, default=_int_grid("20:100:10"))
    p.add_argument("--train-sizes", type=_int_grid, default=_int_grid("20:100:10"))
    p.add_argument("--out", required=True)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("classify", help="classify one transaction")
    p.add_argument("--model", required=True)
    p.add_argument("--fixture")
    p.add_argument("--tx-hash")
    p.add_argument("--rpc", help="archive node JSON-RPC endpoint")
    p.add_argument("--chain", default="ethereum")
    p.add_argument("--db")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("serve", help="run the HTTP classification service")
    p.add_argument("--model", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--db")
    p.add_argument("--rpc")
    p.add_argument("--max-body", type=int, default=4 * 1024 * 1024, help="bytes")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("bench", help="classification latency over random graphs")
    p.add_argument("--graphs", type=int, default=1000)
    p.add_argument("--nodes", type=int, default=100)
    p.add_argument("--edges", type=int, help="default 2 * nodes")
    p.add_argument("--model", help="checkpoint; a freshly initialized model otherwise")
    _model_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    for sp in sub.choices.values():
        _apply_env(sp)
    return parser


def _apply_env(parser: argparse.ArgumentParser) -> None:
    """Let PMADETECT_<OPTION> supply defaults; string defaults pass through ``type``."""
    for action in parser._actions:
        longs = [s for s in action.option_strings if s.startswith("--")]
        if not longs or action.dest == "help":
            continue
        key = ENV_PREFIX + longs[0][2:].upper().replace("-", "_")
        if key not in os.environ:
            continue
        value = os.environ[key]
        if isinstance(action, argparse._StoreTrueAction):
            action.default = value.lower() in ("1", "true", "yes", "on")
        elif action.nargs in ("+", "*"):
            action.default = value.split()
        else:
            action.default = value
        action.required = False


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except PMAError as exc:
        doc = error_document(exc)["error"]
        print(f"error [{doc['phase']}] {doc['type']}: {doc['message']}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error [io] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
