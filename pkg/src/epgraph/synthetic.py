"""Synthetic graphs and dataset bundles for demos and tests."""

from __future__ import annotations

import numpy as np

from .graph import Graph
from .io import DatasetBundle, LabelSet

__all__ = ["erdos_renyi", "planted_partition_bundle"]


def erdos_renyi(n: int, p: float, seed: int = 0) -> Graph:
    """G(n, p): each of the n(n-1)/2 possible edges appears with probability p."""
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, k=1)
    keep = rng.random(iu[0].size) < p
    edges = np.column_stack([iu[0][keep], iu[1][keep]])
    return Graph.from_edges(n, edges)


def planted_partition_bundle(
    nodes_per_class: int = 60,
    num_classes: int = 4,
    p_in: float = 0.10,
    p_out: float = 0.01,
    feature_dim: int = 48,
    signal: float = 0.35,
    noise: float = 0.05,
    train_per_class: int = 10,
    val_per_class: int = 10,
    seed: int = 0,
    name: str = "synthetic",
) -> DatasetBundle:
    """Citation-flavored benchmark: dense intra-class blocks, sparse binary features.

    Each class owns a block of feature coordinates switched on with
    probability ``signal``; every other coordinate fires with probability
    ``noise``. Remaining nodes after the train/val draws form the test set.
    """
    rng = np.random.default_rng(seed)
    n = nodes_per_class * num_classes
    labels = np.repeat(np.arange(num_classes), nodes_per_class)

    iu, ju = np.triu_indices(n, k=1)
    same = labels[iu] == labels[ju]
    prob = np.where(same, p_in, p_out)
    keep = rng.random(iu.size) < prob
    graph = Graph.from_edges(n, np.column_stack([iu[keep], ju[keep]]))

    block = feature_dim // num_classes
    probs = np.full((n, feature_dim), noise)
    for c in range(num_classes):
        rows = labels == c
        probs[np.ix_(rows, np.arange(c * block, (c + 1) * block))] = signal
    features = (rng.random((n, feature_dim)) < probs).astype(np.float64)

    train, val = [], []
    for c in range(num_classes):
        members = rng.permutation(np.flatnonzero(labels == c))
        train.extend(members[:train_per_class])
        val.extend(members[train_per_class : train_per_class + val_per_class])
    mask = np.ones(n, dtype=bool)
    mask[train] = False
    mask[val] = False
    test = np.flatnonzero(mask)

    label_set = LabelSet(
        labels=labels.astype(np.int64),
        num_classes=num_classes,
        train=np.asarray(sorted(train), dtype=np.int64),
        val=np.asarray(sorted(val), dtype=np.int64),
        test=test.astype(np.int64),
    )
    bundle = DatasetBundle(
        graph=graph,
        features=features,
        labels=label_set,
        name=name,
        raw_edge_count=graph.num_edges,
    )
    bundle.validate()
    return bundle
