"""Mixed-order feature propagation with learnable softmax weights.

The propagated features are a convex combination of powers of the normalized
adjacency applied to the input, sum_i g_i A^i X for i = 0..d, with weights
g = softmax(theta). Powers are applied by repeated sparse multiplication;
A^i is never materialized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import SparseOperator, spmm

__all__ = [
    "PropagationOperator",
    "softmax_weights",
    "mixed_order_propagate",
    "power_stack",
    "gradients_from_stack",
    "propagate_gradients",
]


@dataclass
class PropagationOperator:
    """Learnable weights theta over adjacency powers 0..order."""

    theta: np.ndarray
    operator: SparseOperator

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64).ravel()
        if self.theta.size < 1:
            raise ValueError("theta must have at least one entry (order >= 0)")
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("theta must be finite")

    @property
    def order(self) -> int:
        return self.theta.size - 1

    def weights(self) -> np.ndarray:
        return softmax_weights(self.theta)


def softmax_weights(theta) -> np.ndarray:
    """Softmax with max-subtraction; sums to 1 for any finite input."""
    theta = np.asarray(theta, dtype=np.float64).ravel()
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    e = np.exp(theta - theta.max())
    return e / e.sum()


def power_stack(op: PropagationOperator, x: np.ndarray) -> list[np.ndarray]:
    """[x, Ax, A^2 x, ..., A^d x] via repeated sparse multiplies."""
    x = np.asarray(x, dtype=np.float64)
    stack = [x]
    for _ in range(op.order):
        stack.append(spmm(op.operator, stack[-1]))
    return stack


def mixed_order_propagate(op: PropagationOperator, x: np.ndarray) -> np.ndarray:
    """sum_i g_i A^i x, accumulated iteratively."""
    g = op.weights()
    x = np.asarray(x, dtype=np.float64)
    acc = g[0] * x
    cur = x
    for i in range(1, op.order + 1):
        cur = spmm(op.operator, cur)
        acc += g[i] * cur
    return acc


def gradients_from_stack(
    op: PropagationOperator, stack: list[np.ndarray], upstream: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradients given the cached power stack of the forward pass.

    dL/dg_i is the inner product of the upstream gradient with A^i x; the
    softmax Jacobian then folds those into dL/dtheta. The input gradient uses
    the operator's symmetry: dL/dx = sum_i g_i A^i upstream.
    """
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != stack[0].shape:
        raise ValueError(
            f"upstream shape {upstream.shape} != propagate output shape {stack[0].shape}"
        )
    g = op.weights()
    dg = np.array([np.vdot(upstream, p) for p in stack])
    dtheta = g * (dg - np.dot(g, dg))
    acc = g[0] * upstream
    cur = upstream
    for i in range(1, op.order + 1):
        cur = spmm(op.operator, cur)
        acc += g[i] * cur
    return dtheta, acc


def propagate_gradients(
    op: PropagationOperator, x: np.ndarray, upstream: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(dL/dtheta, dL/dx) for L with the given upstream gradient at the output."""
    return gradients_from_stack(op, power_stack(op, x), upstream)
