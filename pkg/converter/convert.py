#!/usr/bin/env python3
"""Convert Planetoid-style citation dataset files into a neutral bundle directory.

Input: a directory holding the eight standard files for one dataset,

    ind.<name>.x ind.<name>.y ind.<name>.tx ind.<name>.ty
    ind.<name>.allx ind.<name>.ally ind.<name>.graph ind.<name>.test.index

where x/tx/allx are pickled scipy sparse matrices, y/ty/ally are pickled
one-hot label arrays, graph is a pickled node->neighbors dict, and test.index
lists the shuffled positions of the test rows.

Output: a bundle directory with meta.json, edges.csv, features.csv,
labels.csv, and splits.json (all node ids 0-indexed). Conversion is
deterministic: re-running produces byte-identical files.

Usage: convert.py --src DIR --name cora --out DIR [--split paper|standard]

The "standard" split keeps the distribution's small labeled training set;
the "paper" split keeps the same 500 validation and 1000 test nodes but
trains on every remaining node.
"""

import argparse
import hashlib
import json
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp

FILE_KINDS = ("x", "y", "tx", "ty", "allx", "ally", "graph", "test.index")

# expected statistics for the shipped benchmarks (nodes, feature_dim, classes)
EXPECTED = {
    "cora": {"num_nodes": 2708, "feature_dim": 1433, "num_classes": 7},
    "citeseer": {"num_nodes": 3327, "feature_dim": 3703, "num_classes": 6},
    "pubmed": {"num_nodes": 19717, "feature_dim": 500, "num_classes": 3},
}


class ConversionError(Exception):
    pass


def _load_pickle(path: Path):
    try:
        with open(path, "rb") as fh:
            return pickle.load(fh, encoding="latin1")
    except FileNotFoundError:
        raise ConversionError(f"missing source file: {path}")
    except Exception as exc:
        raise ConversionError(f"corrupt source file {path}: {exc}")


def _parse_index_file(path: Path):
    try:
        return [int(line) for line in path.read_text().split()]
    except FileNotFoundError:
        raise ConversionError(f"missing source file: {path}")
    except ValueError as exc:
        raise ConversionError(f"corrupt source file {path}: {exc}")


def load_planetoid(src: Path, name: str):
    """Assemble the full (features, one-hot labels, adjacency dict, splits)."""
    objs = {}
    for kind in FILE_KINDS:
        path = src / f"ind.{name}.{kind}"
        objs[kind] = _parse_index_file(path) if kind == "test.index" else _load_pickle(path)

    x, y = objs["x"], objs["y"]
    tx, ty = objs["tx"], objs["ty"]
    allx, ally = objs["allx"], objs["ally"]
    graph = objs["graph"]
    test_idx = np.asarray(objs["test.index"], dtype=np.int64)
    if test_idx.size == 0:
        raise ConversionError(f"empty test index for {name}")
    present = np.sort(test_idx)

    # some distributions omit isolated test nodes from tx/ty; pad the gaps
    # with zero rows so positions line up (the padded nodes keep all-zero
    # labels and stay outside the test mask, as in the standard loaders)
    full = np.arange(present.min(), present.max() + 1)
    if full.size != test_idx.size:
        tx_ext = sp.lil_matrix((full.size, x.shape[1]), dtype=np.float64)
        tx_ext[present - full.min(), :] = tx.toarray()
        tx = tx_ext.tocsr()
        ty_ext = np.zeros((full.size, y.shape[1]), dtype=ty.dtype)
        ty_ext[present - full.min(), :] = ty
        ty = ty_ext

    features = sp.vstack((allx, tx)).tolil()
    features[test_idx, :] = features[present, :]
    features = features.tocsr()
    onehot = np.vstack((ally, ty))
    onehot[test_idx, :] = onehot[present, :]

    n = features.shape[0]
    if len(graph) != n:
        raise ConversionError(
            f"node-count mismatch for {name}: graph lists {len(graph)} nodes, "
            f"feature stack has {n}"
        )
    num_train = y.shape[0]
    # validation = the 500 nodes after the labeled training block (fewer when
    # a small input runs into the test block)
    val_end = min(num_train + 500, int(present.min()), n)
    splits = {
        "train_standard": np.arange(num_train, dtype=np.int64),
        "val": np.arange(num_train, max(num_train, val_end), dtype=np.int64),
        "test": present.astype(np.int64),
    }
    return features, onehot, graph, splits


def undirected_edges(graph: dict):
    """Sorted unique undirected edges (u < v) plus the raw entry count."""
    raw = 0
    pairs = set()
    for u, nbrs in graph.items():
        raw += len(nbrs)
        for v in nbrs:
            if u == v:
                continue
            pairs.add((u, v) if u < v else (v, u))
    return sorted(pairs), raw


def build_splits(splits: dict, labels: np.ndarray, which: str):
    val, test = splits["val"], splits["test"]
    if which == "standard":
        train = splits["train_standard"]
    else:
        held = np.zeros(labels.size, dtype=bool)
        held[val] = True
        held[test] = True
        train = np.flatnonzero(~held)
    return {
        "train": np.sort(train).tolist(),
        "val": np.sort(val).tolist(),
        "test": np.sort(test).tolist(),
    }


def write_bundle(out: Path, name: str, features, onehot, graph, splits, split_choice: str):
    out.mkdir(parents=True, exist_ok=True)
    edges, raw_entries = undirected_edges(graph)
    n = features.shape[0]

    # one-hot rows that are all zero mark padded isolated nodes; they follow
    # the common convention of class 0 so every node stays usable in masks
    labels = onehot.argmax(axis=1).astype(np.int64)

    split_lists = build_splits(splits, labels, split_choice)

    meta = {
        "name": name,
        "num_nodes": int(n),
        "num_edges": len(edges),
        "feature_dim": int(features.shape[1]),
        "num_classes": int(onehot.shape[1]),
        "source_edge_entries": int(raw_entries),
        "split": split_choice,
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")

    with open(out / "edges.csv", "w") as fh:
        for u, v in edges:
            fh.write(f"{u},{v}\n")

    dense = np.asarray(features.todense(), dtype=np.float64)
    with open(out / "features.csv", "w") as fh:
        for row in dense:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")

    with open(out / "labels.csv", "w") as fh:
        for v in range(n):
            fh.write(f"{v},{labels[v]}\n")

    (out / "splits.json").write_text(json.dumps(split_lists, sort_keys=True) + "\n")
    return meta


def verify_bundle(bundle_dir: Path, expected: dict):
    """Compare a written bundle against an expected statistics row.

    Returns (passed, report). The report carries each compared field, the raw
    and deduplicated edge counts side by side, and any mismatches.
    """
    meta = json.loads((bundle_dir / "meta.json").read_text())
    edge_lines = sum(1 for line in open(bundle_dir / "edges.csv") if line.strip())
    diffs = {}
    for key, want in expected.items():
        got = meta.get(key)
        if got != want:
            diffs[key] = {"expected": want, "found": got}
    if meta.get("num_edges") != edge_lines:
        diffs["num_edges"] = {"expected": meta.get("num_edges"), "found": edge_lines}
    report = {
        "bundle": str(bundle_dir),
        "checked": {k: meta.get(k) for k in expected},
        "edges_deduplicated": edge_lines,
        "edges_raw_entries": meta.get("source_edge_entries"),
        "diffs": diffs,
        "passed": not diffs,
    }
    return report["passed"], report


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def convert(src: Path, name: str, out: Path, split_choice: str = "paper"):
    features, onehot, graph, splits = load_planetoid(src, name)
    meta = write_bundle(out, name, features, onehot, graph, splits, split_choice)
    checksums = {
        f.name: _file_digest(out / f.name)
        for f in sorted(out.iterdir())
        if f.suffix in (".csv", ".json")
    }
    return meta, checksums


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--src", required=True, help="directory with the ind.* files")
    parser.add_argument("--name", required=True, help="dataset name, e.g. cora")
    parser.add_argument("--out", required=True, help="bundle output directory")
    parser.add_argument("--split", choices=("paper", "standard"), default="paper")
    args = parser.parse_args(argv)

    try:
        meta, checksums = convert(Path(args.src), args.name, Path(args.out), args.split)
    except ConversionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    splits = json.loads((Path(args.out) / "splits.json").read_text())
    print(
        f"{meta['name']}: classes={meta['num_classes']} nodes={meta['num_nodes']} "
        f"edges={meta['num_edges']} (raw entries {meta['source_edge_entries']}) "
        f"features={meta['feature_dim']} "
        f"train={len(splits['train'])} val={len(splits['val'])} test={len(splits['test'])}"
    )
    for fname, digest in checksums.items():
        print(f"  sha256 {fname} {digest[:16]}")

    expected = EXPECTED.get(args.name)
    if expected:
        passed, report = verify_bundle(Path(args.out), expected)
        status = "pass" if passed else "FAIL"
        print(f"verification vs expected statistics: {status}")
        if not passed:
            for field, diff in report["diffs"].items():
                print(f"  {field}: expected {diff['expected']}, found {diff['found']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
