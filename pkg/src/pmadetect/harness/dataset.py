"""Labeled graph collections and their on-disk directory layout.

    <dir>/manifest.csv      file,label,chain
    <dir>/graphs/<name>.json
    <dir>/account_db.json   optional; used to featurize graphs stored without features
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..cashflow import CashFlowGraph, dumps_graph, loads_graph
from ..errors import ConfigError, SchemaError
from ..features import AccountDb, assemble_features

MANIFEST = "manifest.csv"
DB_FILE = "account_db.json"


@dataclass
class Dataset:
    graphs: list[CashFlowGraph]
    chains: list[str] = field(default_factory=list)
    names: list[str] = field(default_factory=list)
    db: AccountDb | None = None

    def __post_init__(self):
        if not self.names:
            self.names = [f"tx_{i:05d}" for i in range(len(self.graphs))]
        if not self.chains:
            self.chains = ["ethereum"] * len(self.graphs)

    def __len__(self) -> int:
        return len(self.graphs)

    @property
    def labels(self) -> np.ndarray:
        if any(g.label is None for g in self.graphs):
            raise ConfigError("dataset contains unlabeled graphs")
        return np.array([g.label for g in self.graphs], dtype=np.int64)

    def subset(self, indices) -> "Dataset":
        idx = [int(i) for i in indices]
        return Dataset(
            graphs=[self.graphs[i] for i in idx],
            chains=[self.chains[i] for i in idx],
            names=[self.names[i] for i in idx],
            db=self.db,
        )

    def save(self, directory: str | Path) -> Path:
        root = Path(directory)
        (root / "graphs").mkdir(parents=True, exist_ok=True)
        with open(root / MANIFEST, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["file", "label", "chain"])
            for name, g, chain in zip(self.names, self.graphs, self.chains):
                rel = f"graphs/{name}.json"
                (root / rel).write_text(dumps_graph(g), encoding="utf-8")
                writer.writerow([rel, "" if g.label is None else g.label, chain])
        if self.db is not None:
            self.db.save(root / DB_FILE)
        return root

    @classmethod
    def load(cls, directory: str | Path, db: AccountDb | None = None) -> "Dataset":
        """Read a dataset directory, featurizing graphs that were stored bare."""
        root = Path(directory)
        if not (root / MANIFEST).exists():
            raise ConfigError(f"{root} has no {MANIFEST}")
        if db is None and (root / DB_FILE).exists():
            db = AccountDb.load(root / DB_FILE)
        graphs, chains, names = [], [], []
        with open(root / MANIFEST, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                try:
                    path = root / row["file"]
                    label = int(row["label"]) if row["label"] != "" else None
                    chain = row["chain"]
                except KeyError as exc:
                    raise SchemaError(f"{MANIFEST}.{exc.args[0]}") from None
                g = loads_graph(path.read_text(encoding="utf-8"))
                if label is not None:
                    g = g.with_label(label)
                if g.features is None:
                    g = assemble_features(g, db if db is not None else AccountDb())
                graphs.append(g)
                chains.append(chain)
                names.append(Path(row["file"]).stem)
        return cls(graphs, chains, names, db)
