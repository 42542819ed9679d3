"""Sparse undirected graph container and the shared linear-algebra kernels.

The graph is stored in CSR form (row offsets + column indices) and is
immutable after construction: every other module treats it as a value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Graph",
    "SparseOperator",
    "normalized_adjacency",
    "spmm",
    "validate_features",
]


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph: symmetric adjacency, no self-loops, no duplicates.

    ``indptr``/``indices`` follow the CSR convention; column indices are
    strictly increasing within each row. ``num_edges`` counts undirected edges.
    """

    num_nodes: int
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_edges(cls, num_nodes: int, edges) -> "Graph":
        """Build a graph from an (m, 2) array of endpoints.

        Input edges may be listed in either direction, duplicated, or contain
        self-loops; the result is symmetrized, deduplicated, and loop-free.
        """
        if num_nodes < 0:
            raise ValueError("num_nodes must be nonnegative")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= num_nodes):
            raise ValueError("edge endpoint out of range")
        e = e[e[:, 0] != e[:, 1]]
        both = np.concatenate([e, e[:, ::-1]], axis=0)
        # unique (u, v) pairs, sorted row-major: gives sorted columns per row
        keys = np.unique(both[:, 0] * np.int64(num_nodes) + both[:, 1])
        rows = keys // num_nodes
        cols = keys % num_nodes
        indptr = np.zeros(num_nodes + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(num_nodes=num_nodes, indptr=indptr, indices=cols)

    @property
    def num_edges(self) -> int:
        """Number of undirected edges (after symmetrization/dedup)."""
        return int(self.indices.size) // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor ids of node v (a view, do not mutate)."""
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < nbrs.size and nbrs[i] == v)

    def edge_list(self) -> np.ndarray:
        """(num_edges, 2) array with u < v per row, lexicographically sorted."""
        rows = np.repeat(np.arange(self.num_nodes, dtype=np.int64), self.degrees())
        mask = rows < self.indices
        return np.column_stack([rows[mask], self.indices[mask]])

    def to_scipy(self) -> sp.csr_matrix:
        data = np.ones(self.indices.size, dtype=np.float64)
        return sp.csr_matrix(
            (data, self.indices.copy(), self.indptr.copy()),
            shape=(self.num_nodes, self.num_nodes),
        )

    def validate(self) -> None:
        """Raise ValueError if any structural invariant is violated."""
        if self.indptr.shape != (self.num_nodes + 1,) or self.indptr[0] != 0:
            raise ValueError("malformed indptr")
        if self.indptr[-1] != self.indices.size:
            raise ValueError("indptr does not cover indices")
        if np.any(np.diff(self.indptr) < 0):
            raise ValueError("indptr not monotone")
        for v in range(self.num_nodes):
            nbrs = self.neighbors(v)
            if nbrs.size:
                if np.any(np.diff(nbrs) <= 0):
                    raise ValueError(f"row {v}: columns not strictly increasing")
                if nbrs.min() < 0 or nbrs.max() >= self.num_nodes:
                    raise ValueError(f"row {v}: column out of range")
                if np.any(nbrs == v):
                    raise ValueError(f"self-loop at node {v}")
        # symmetry: (u, v) present iff (v, u) present
        a = self.to_scipy()
        if (a != a.T).nnz != 0:
            raise ValueError("adjacency not symmetric")


@dataclass(frozen=True)
class SparseOperator:
    """Symmetric |V|x|V| real operator backed by a CSR matrix."""

    matrix: sp.csr_matrix
    _check: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = self.matrix
        if m.shape[0] != m.shape[1]:
            raise ValueError("operator must be square")
        if self._check and m.nnz:
            if not np.all(np.isfinite(m.data)):
                raise ValueError("operator entries must be finite")
            asym = abs(m - m.T)
            if asym.nnz and asym.max() > 1e-12:
                raise ValueError("operator not symmetric within 1e-12")

    @property
    def shape(self):
        return self.matrix.shape

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def normalized_adjacency(g: Graph) -> SparseOperator:
    """Self-loop augmented, symmetrically degree-normalized adjacency.

    Entry (u, v) of the result is 1/sqrt((d_u + 1)(d_v + 1)) for each edge of
    the loop-augmented graph, so every row touches its own node: isolated
    nodes map to the 1x1 identity block.
    """
    a = g.to_scipy()
    a_loop = (a + sp.identity(g.num_nodes, format="csr", dtype=np.float64)).tocsr()
    inv_sqrt = 1.0 / np.sqrt(np.asarray(a_loop.sum(axis=1)).ravel())
    scaled = a_loop.multiply(inv_sqrt[:, None]).multiply(inv_sqrt[None, :]).tocsr()
    scaled.sort_indices()
    return SparseOperator(matrix=scaled)


def spmm(op: SparseOperator, m: np.ndarray) -> np.ndarray:
    """Sparse-dense product op @ m with fixed row-major accumulation order."""
    m = np.asarray(m, dtype=np.float64)
    if op.matrix.shape[1] != m.shape[0]:
        raise ValueError(
            f"dimension mismatch: operator is {op.matrix.shape}, matrix has {m.shape[0]} rows"
        )
    out = op.matrix @ m
    return np.ascontiguousarray(out)


def validate_features(g: Graph, x: np.ndarray) -> np.ndarray:
    """Check a dense feature matrix against a graph; returns float64 view/copy."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("feature matrix must be 2-D")
    if x.shape[0] != g.num_nodes:
        raise ValueError(
            f"feature rows ({x.shape[0]}) != graph nodes ({g.num_nodes})"
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("feature matrix contains non-finite values")
    return x
