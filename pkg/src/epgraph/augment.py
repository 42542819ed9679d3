"""Perturbation strategies that generate training-time graph data.

Five strategies are provided. Two perturb topology (node dropping, edge
dropping), two perturb the feature matrix elementwise or rowwise with
inverse-keep-rate rescaling, and the last one masks feature rows only
outside triangle motifs, leaving motif rows and the topology untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .motifs import MotifIndex

__all__ = [
    "STRATEGIES",
    "AugmentationPlan",
    "PerturbedGraph",
    "drop_node",
    "drop_edge",
    "dropout_features",
    "grand_drop",
    "motif_only_features",
    "augmentation_scales",
    "entropy_preserving_augment",
    "generate_batch",
    "stream",
]

STRATEGIES = ("drop_node", "drop_edge", "dropout", "grand", "entropy_preserving")


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator keyed by (seed, *key); stable across processes."""
    return np.random.default_rng((int(seed),) + tuple(int(k) for k in key))


def _check_rate(rate: float) -> float:
    rate = float(rate)
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"drop rate must be in [0, 1), got {rate}")
    return rate


@dataclass(frozen=True)
class AugmentationPlan:
    """Strategy tag + drop probability + RNG seed."""

    strategy: str
    delta: float
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(
                f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}"
            )
        _check_rate(self.delta)


@dataclass(frozen=True)
class PerturbedGraph:
    """A perturbed (graph, features) pair; node_map sends new ids to originals."""

    graph: Graph
    features: np.ndarray
    node_map: np.ndarray


def drop_node(g: Graph, x: np.ndarray, rate: float, rng: np.random.Generator) -> PerturbedGraph:
    """Delete ceil(rate * |V|) uniform nodes; return the induced subgraph."""
    rate = _check_rate(rate)
    n = g.num_nodes
    k = math.ceil(rate * n)
    if k == 0:
        return PerturbedGraph(graph=g, features=x, node_map=np.arange(n, dtype=np.int64))
    dropped = rng.choice(n, size=k, replace=False)
    keep = np.ones(n, dtype=bool)
    keep[dropped] = False
    survivors = np.flatnonzero(keep)
    new_id = -np.ones(n, dtype=np.int64)
    new_id[survivors] = np.arange(survivors.size)
    edges = g.edge_list()
    if edges.size:
        alive = keep[edges[:, 0]] & keep[edges[:, 1]]
        edges = new_id[edges[alive]]
    sub = Graph.from_edges(survivors.size, edges)
    return PerturbedGraph(graph=sub, features=x[survivors], node_map=survivors)


def drop_edge(g: Graph, rate: float, rng: np.random.Generator) -> Graph:
    """Remove ceil(rate * |E|) uniform undirected edges; node set unchanged."""
    rate = _check_rate(rate)
    edges = g.edge_list()
    k = math.ceil(rate * edges.shape[0])
    if k == 0:
        return g
    dropped = rng.choice(edges.shape[0], size=k, replace=False)
    keep = np.ones(edges.shape[0], dtype=bool)
    keep[dropped] = False
    return Graph.from_edges(g.num_nodes, edges[keep])


def dropout_features(x: np.ndarray, delta: float, rng: np.random.Generator) -> np.ndarray:
    """Zero each entry independently with probability delta, rescale kept ones."""
    delta = _check_rate(delta)
    eps = rng.random(x.shape) >= delta
    return x * (eps / (1.0 - delta))


def grand_drop(x: np.ndarray, delta: float, rng: np.random.Generator) -> np.ndarray:
    """Zero each feature row independently with probability delta, rescale kept rows."""
    delta = _check_rate(delta)
    eps = rng.random(x.shape[0]) >= delta
    return x * (eps / (1.0 - delta))[:, None]


def motif_only_features(x: np.ndarray, idx: MotifIndex) -> np.ndarray:
    """Keep only the feature rows of triangle-member nodes; zero the rest."""
    out = np.zeros_like(x)
    mask = idx.member_mask()
    out[mask] = x[mask]
    return out


def augmentation_scales(member_mask: np.ndarray, delta: float, rng: np.random.Generator) -> np.ndarray:
    """Per-row multipliers of the motif-preserving perturbation.

    Motif members get exactly 1; every other row draws keep/drop and is scaled
    to 1/(1-delta) or 0, which keeps its expectation at the original row.
    """
    delta = _check_rate(delta)
    scales = np.ones(member_mask.size, dtype=np.float64)
    rest = ~member_mask
    kept = rng.random(int(rest.sum())) >= delta
    scales[rest] = kept / (1.0 - delta)
    return scales


def entropy_preserving_augment(
    g: Graph,
    x: np.ndarray,
    idx: MotifIndex,
    delta: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Perturb features while preserving motif rows and the whole topology.

    Rows of triangle-member nodes are copied verbatim; every other row is
    independently kept (scaled by 1/(1-delta)) or zeroed. The graph itself is
    never modified.
    """
    if idx.num_nodes != g.num_nodes:
        raise ValueError("motif index was built for a different graph")
    scales = augmentation_scales(idx.member_mask(), delta, rng)
    return scales[:, None] * x


def generate_batch(
    g: Graph,
    x: np.ndarray,
    idx: MotifIndex,
    delta: float,
    k: int,
    seed: int,
    epoch: int = 0,
) -> list[np.ndarray]:
    """K independent motif-preserving perturbations with decorrelated streams.

    Draw j uses the stream keyed by (seed, epoch, j), so batches are
    reproducible bit-for-bit and independent across epochs.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    return [
        entropy_preserving_augment(g, x, idx, delta, stream(seed, epoch, j))
        for j in range(k)
    ]
