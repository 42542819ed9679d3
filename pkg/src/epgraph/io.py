"""Dataset bundle I/O.

A bundle is a directory holding:

    meta.json      name, num_nodes, num_edges, feature_dim, num_classes
    edges.csv      two integer columns, one undirected edge per line, 0-indexed
    features.csv   num_nodes rows x feature_dim columns of reals
    labels.csv     node_id, class_index (one line per labeled node)
    splits.json    arrays "train", "val", "test" of node ids

``meta.num_edges`` must equal the raw line count of edges.csv. The loader
symmetrizes and deduplicates edges and drops self-loops, so the in-memory
graph may report fewer edges than the raw file; both counts stay observable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, validate_features

__all__ = ["BundleError", "LabelSet", "DatasetBundle", "load_bundle", "write_bundle"]

_META_FIELDS = ("name", "num_nodes", "num_edges", "feature_dim", "num_classes")


class BundleError(ValueError):
    """Malformed or inconsistent dataset bundle."""


@dataclass(frozen=True)
class LabelSet:
    """Per-node class labels plus disjoint train/validation/test masks.

    ``labels[v] == -1`` marks an unlabeled node; every node that appears in a
    mask must carry a valid label in [0, num_classes).
    """

    labels: np.ndarray
    num_classes: int
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def mask(self, which: str) -> np.ndarray:
        try:
            return getattr(self, which)
        except AttributeError:
            raise ValueError(f"unknown mask {which!r}; expected train/val/test") from None

    def validate(self, num_nodes: int) -> None:
        if self.labels.shape != (num_nodes,):
            raise BundleError("labels: wrong length")
        lab = self.labels[self.labels >= 0]
        if lab.size and lab.max() >= self.num_classes:
            raise BundleError("labels: class_index out of range")
        seen = np.zeros(num_nodes, dtype=bool)
        for name in ("train", "val", "test"):
            ids = self.mask(name)
            if ids.size == 0:
                continue
            if ids.min() < 0 or ids.max() >= num_nodes:
                raise BundleError(f"splits.{name}: node id out of range")
            if np.unique(ids).size != ids.size:
                raise BundleError(f"splits.{name}: duplicate node ids")
            if np.any(seen[ids]):
                raise BundleError(f"splits.{name}: overlaps another split")
            seen[ids] = True
            if np.any(self.labels[ids] < 0):
                raise BundleError(f"splits.{name}: contains unlabeled nodes")


@dataclass(frozen=True)
class DatasetBundle:
    """A graph, its feature matrix, and labels/splits, loaded as one unit."""

    graph: Graph
    features: np.ndarray
    labels: LabelSet
    name: str
    raw_edge_count: int

    def validate(self) -> None:
        self.graph.validate()
        validate_features(self.graph, self.features)
        self.labels.validate(self.graph.num_nodes)


def _read_meta(path: Path) -> dict:
    meta_path = path / "meta.json"
    try:
        with open(meta_path) as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        raise BundleError(f"missing {meta_path}") from None
    except json.JSONDecodeError as exc:
        raise BundleError(f"meta.json: invalid JSON ({exc})") from None
    for key in _META_FIELDS:
        if key not in meta:
            raise BundleError(f"meta.json: missing field {key!r}")
    for key in _META_FIELDS[1:]:
        if not isinstance(meta[key], int) or meta[key] < 0:
            raise BundleError(f"meta.json: field {key!r} must be a nonnegative integer")
    return meta


def _read_int_csv(path: Path, cols: int) -> np.ndarray:
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise BundleError(f"missing {path}") from None
    if not text.strip():
        return np.zeros((0, cols), dtype=np.int64)
    try:
        arr = np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2)
    except ValueError as exc:
        raise BundleError(f"{path.name}: {exc}") from None
    if arr.shape[1] != cols:
        raise BundleError(f"{path.name}: expected {cols} columns, found {arr.shape[1]}")
    return arr


def load_bundle(path) -> DatasetBundle:
    """Load and validate a dataset bundle directory.

    Raises BundleError naming the offending file/field on any malformed or
    inconsistent input.
    """
    path = Path(path)
    if not path.is_dir():
        raise BundleError(f"bundle directory not found: {path}")
    meta = _read_meta(path)
    n = meta["num_nodes"]
    if n == 0:
        raise BundleError("meta.json: num_nodes must be positive")

    raw_edges = _read_int_csv(path / "edges.csv", 2)
    if raw_edges.shape[0] != meta["num_edges"]:
        raise BundleError(
            f"meta.json: num_edges={meta['num_edges']} but edges.csv has "
            f"{raw_edges.shape[0]} lines"
        )
    if raw_edges.size and (raw_edges.min() < 0 or raw_edges.max() >= n):
        raise BundleError("edges.csv: node id out of range")
    graph = Graph.from_edges(n, raw_edges)

    try:
        features = np.loadtxt(path / "features.csv", delimiter=",", dtype=np.float64, ndmin=2)
    except FileNotFoundError:
        raise BundleError(f"missing {path / 'features.csv'}") from None
    except ValueError as exc:
        raise BundleError(f"features.csv: {exc}") from None
    if features.shape != (n, meta["feature_dim"]):
        raise BundleError(
            f"features.csv: expected shape ({n}, {meta['feature_dim']}), "
            f"found {features.shape}"
        )
    if not np.all(np.isfinite(features)):
        raise BundleError("features.csv: non-finite value")

    label_rows = _read_int_csv(path / "labels.csv", 2)
    labels = np.full(n, -1, dtype=np.int64)
    if label_rows.size:
        if label_rows[:, 0].min() < 0 or label_rows[:, 0].max() >= n:
            raise BundleError("labels.csv: node_id out of range")
        if label_rows[:, 1].min() < 0 or label_rows[:, 1].max() >= meta["num_classes"]:
            raise BundleError("labels.csv: class_index out of range")
        labels[label_rows[:, 0]] = label_rows[:, 1]

    splits_path = path / "splits.json"
    try:
        with open(splits_path) as fh:
            splits = json.load(fh)
    except FileNotFoundError:
        raise BundleError(f"missing {splits_path}") from None
    except json.JSONDecodeError as exc:
        raise BundleError(f"splits.json: invalid JSON ({exc})") from None
    masks = {}
    for key in ("train", "val", "test"):
        if key not in splits:
            raise BundleError(f"splits.json: missing array {key!r}")
        masks[key] = np.asarray(sorted(splits[key]), dtype=np.int64)

    label_set = LabelSet(
        labels=labels,
        num_classes=meta["num_classes"],
        train=masks["train"],
        val=masks["val"],
        test=masks["test"],
    )
    bundle = DatasetBundle(
        graph=graph,
        features=features,
        labels=label_set,
        name=str(meta["name"]),
        raw_edge_count=int(raw_edges.shape[0]),
    )
    bundle.validate()
    return bundle


def _fmt(value: float) -> str:
    # shortest round-trip decimal form, reproducible across runs
    return repr(float(value))


def write_bundle(bundle: DatasetBundle, path) -> None:
    """Write a bundle directory in the on-disk format read by load_bundle.

    Edges are written deduplicated and lexicographically sorted, so
    write(load(p)) is stable and re-reads field-for-field equal.
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    g = bundle.graph
    edges = g.edge_list()
    meta = {
        "name": bundle.name,
        "num_nodes": g.num_nodes,
        "num_edges": int(edges.shape[0]),
        "feature_dim": int(bundle.features.shape[1]),
        "num_classes": bundle.labels.num_classes,
    }
    with open(path / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(path / "edges.csv", "w") as fh:
        for u, v in edges:
            fh.write(f"{u},{v}\n")
    with open(path / "features.csv", "w") as fh:
        for row in bundle.features:
            fh.write(",".join(_fmt(v) for v in row))
            fh.write("\n")
    with open(path / "labels.csv", "w") as fh:
        for v in range(g.num_nodes):
            if bundle.labels.labels[v] >= 0:
                fh.write(f"{v},{bundle.labels.labels[v]}\n")
    with open(path / "splits.json", "w") as fh:
        json.dump(
            {
                "train": [int(v) for v in bundle.labels.train],
                "val": [int(v) for v in bundle.labels.val],
                "test": [int(v) for v in bundle.labels.test],
            },
            fh,
        )
        fh.write("\n")
