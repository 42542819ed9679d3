"""Classifier, losses, manual-gradient SGD training, and a plain GCN baseline.

The classifier is a two-layer perceptron applied after mixed-order feature
propagation. Propagation commutes with the first linear layer, so the
training loop propagates the (much narrower) hidden activations instead of
raw features; the result is algebraically identical to propagating features
first and classifying after.

All gradients are computed analytically; no autodiff framework is involved.
"""

from __future__ import annotations

import json
import struct
import time
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp

from .augment import augmentation_scales, drop_edge, dropout_features, stream
from .graph import Graph, normalized_adjacency, spmm
from .io import DatasetBundle, LabelSet
from .motifs import MotifIndex
from .propagate import PropagationOperator, gradients_from_stack, power_stack

__all__ = [
    "ClassifierParams",
    "TrainConfig",
    "TrainReport",
    "TrainingDivergedError",
    "init_classifier",
    "classify",
    "predict",
    "gcn_forward",
    "sharpen",
    "average_prediction",
    "supervised_loss",
    "consistency_loss",
    "total_loss",
    "model_loss_and_grads",
    "train",
    "train_gcn",
    "evaluate",
    "save_checkpoint",
    "load_checkpoint",
]

_LOG_FLOOR = 1e-12


class TrainingDivergedError(RuntimeError):
    """Raised when the training loss stops being finite."""


@dataclass
class ClassifierParams:
    """Two-layer perceptron weights: input -> hidden (rectified) -> classes."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def copy(self) -> "ClassifierParams":
        return ClassifierParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())


TRAIN_STRATEGIES = ("entropy_preserving", "grand", "dropout", "drop_edge")


@dataclass
class TrainConfig:
    """Hyperparameters; defaults follow the reference experimental setup.

    ``strategy`` selects how the K per-epoch perturbations are generated;
    the motif-preserving default is the method under study, the others exist
    as trainable baselines for loss-curve and accuracy comparisons.
    """

    k: int = 4
    delta: float = 0.5
    order: int = 8
    lam: float = 1.0
    kappa: float = 0.5
    lr: float = 0.2
    epochs: int = 1000
    hidden: int = 32
    seed: int = 0
    strategy: str = "entropy_preserving"
    mlp_dropout: float = 0.0  # train-time dropout on the hidden layer; off by default

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError("delta must be in [0, 1)")
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError("kappa must be in (0, 1]")
        if self.lam < 0.0:
            raise ValueError("lambda must be >= 0")
        if self.order < 0 or self.hidden < 1 or self.epochs < 0:
            raise ValueError("order, hidden, epochs must be nonnegative (hidden >= 1)")
        if not 0.0 <= self.mlp_dropout < 1.0:
            raise ValueError("mlp_dropout must be in [0, 1)")
        if self.strategy not in TRAIN_STRATEGIES:
            raise ValueError(
                f"unknown training strategy {self.strategy!r}; expected one of {TRAIN_STRATEGIES}"
            )


@dataclass
class TrainReport:
    """Per-epoch curves plus the final held-out accuracy."""

    train_losses: list = field(default_factory=list)
    val_losses: list = field(default_factory=list)
    val_accs: list = field(default_factory=list)
    reg_losses: list = field(default_factory=list)
    test_accuracy: float = float("nan")
    best_epoch: int = -1
    best_val_acc: float = float("nan")
    wall_clock: float = 0.0

    def num_epochs(self) -> int:
        return len(self.train_losses)

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,val_loss,val_acc"]
        for e in range(self.num_epochs()):
            lines.append(
                f"{e},{self.train_losses[e]!r},{self.val_losses[e]!r},{self.val_accs[e]!r}"
            )
        return "\n".join(lines) + "\n"


def init_classifier(num_features: int, hidden: int, num_classes: int, rng) -> ClassifierParams:
    """Normal Glorot-scaled weights, zero biases."""
    s1 = np.sqrt(2.0 / (num_features + hidden))
    s2 = np.sqrt(2.0 / (hidden + num_classes))
    return ClassifierParams(
        w1=rng.normal(0.0, s1, size=(num_features, hidden)),
        b1=np.zeros(hidden),
        w2=rng.normal(0.0, s2, size=(hidden, num_classes)),
        b2=np.zeros(num_classes),
    )


def row_softmax(u: np.ndarray) -> np.ndarray:
    e = np.exp(u - u.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def classify(params: ClassifierParams, x_bar: np.ndarray) -> np.ndarray:
    """Row-stochastic class probabilities for (already propagated) features."""
    x_bar = np.asarray(x_bar, dtype=np.float64)
    if x_bar.shape[1] != params.w1.shape[0]:
        raise ValueError(
            f"input has {x_bar.shape[1]} columns, classifier expects {params.w1.shape[0]}"
        )
    h = np.maximum(x_bar @ params.w1 + params.b1, 0.0)
    return row_softmax(h @ params.w2 + params.b2)


def gcn_forward(g: Graph, x: np.ndarray, weights, layers: int | None = None) -> np.ndarray:
    """Plain graph convolution: each layer rectifies A_hat @ H @ W, softmax last."""
    weights = list(weights)
    if layers is not None and layers != len(weights):
        raise ValueError(f"layers={layers} but {len(weights)} weight matrices given")
    a_hat = normalized_adjacency(g)
    h = np.asarray(x, dtype=np.float64)
    for w in weights[:-1]:
        h = np.maximum(spmm(a_hat, h) @ w, 0.0)
    return row_softmax(spmm(a_hat, h) @ weights[-1])


def sharpen(z_bar: np.ndarray, kappa: float) -> np.ndarray:
    """Temperature-power transform pushing rows toward one-hot as kappa -> 0."""
    if not 0.0 < kappa <= 1.0:
        raise ValueError("kappa must be in (0, 1]")
    powed = np.power(np.asarray(z_bar, dtype=np.float64), 1.0 / kappa)
    sums = powed.sum(axis=1, keepdims=True)
    if np.any(sums == 0.0):
        raise ValueError("cannot sharpen a row of all zeros")
    return powed / sums


def average_prediction(preds) -> np.ndarray:
    """Elementwise mean of K equally shaped prediction matrices."""
    preds = [np.asarray(p, dtype=np.float64) for p in preds]
    if not preds:
        raise ValueError("need at least one prediction")
    shape = preds[0].shape
    for p in preds:
        if p.shape != shape:
            raise ValueError("prediction shapes differ")
    return np.mean(np.stack(preds), axis=0)


def supervised_loss(preds, labels: LabelSet) -> float:
    """Cross-entropy on labeled training nodes, averaged over the K draws."""
    ids = labels.train
    if ids.size == 0:
        raise ValueError("empty train mask")
    total = 0.0
    for z in preds:
        picked = np.maximum(z[ids, labels.labels[ids]], _LOG_FLOOR)
        total += float(-np.log(picked).sum())
    return total / len(preds)


def consistency_loss(preds, kappa: float) -> float:
    """Mean squared row distance of each draw to the sharpened average.

    The sharpened average is a fixed target: it carries no gradient.
    """
    preds = [np.asarray(p, dtype=np.float64) for p in preds]
    target = sharpen(average_prediction(preds), kappa)
    total = sum(float(((z - target) ** 2).sum()) for z in preds)
    return total / len(preds)


def total_loss(preds, labels: LabelSet, lam: float, kappa: float) -> float:
    return supervised_loss(preds, labels) + lam * consistency_loss(preds, kappa)


# ---------------------------------------------------------------------------
# model internals: shared forward/backward used by training and grad checks


class DenseInputs:
    """K explicit perturbed feature matrices (oracle/grad-check path)."""

    def __init__(self, mats):
        self.mats = [np.asarray(m, dtype=np.float64) for m in mats]

    def __len__(self):
        return len(self.mats)

    def hidden(self, w1):
        return [m @ w1 for m in self.mats]

    def weight_grad(self, dys):
        acc = self.mats[0].T @ dys[0]
        for m, dy in zip(self.mats[1:], dys[1:]):
            acc += m.T @ dy
        return acc


class ScaledInputs:
    """K row-scalings of one shared sparse feature matrix (training path).

    Every perturbed matrix is diag(s_k) X, so X @ W1 is computed once and the
    first-layer weight gradient needs a single sparse product.
    """

    def __init__(self, x_csr, scale_list):
        self.x = x_csr
        self.scales = [np.asarray(s, dtype=np.float64) for s in scale_list]

    def __len__(self):
        return len(self.scales)

    def hidden(self, w1):
        base = self.x @ w1
        return [s[:, None] * base for s in self.scales]

    def weight_grad(self, dys):
        acc = self.scales[0][:, None] * dys[0]
        for s, dy in zip(self.scales[1:], dys[1:]):
            acc += s[:, None] * dy
        return np.asarray(self.x.T @ acc)


def _forward_hidden(
    params: ClassifierParams,
    op: PropagationOperator,
    y0: np.ndarray,
    dropout_mask: np.ndarray | None = None,
) -> dict:
    stack = power_stack(op, y0)
    g = op.weights()
    prop = g[0] * stack[0]
    for i in range(1, len(stack)):
        prop += g[i] * stack[i]
    hpre = prop + params.b1
    h = np.maximum(hpre, 0.0)
    if dropout_mask is not None:
        h = h * dropout_mask
    z = row_softmax(h @ params.w2 + params.b2)
    return {"stack": stack, "hpre": hpre, "h": h, "z": z, "mask": dropout_mask}


def _softmax_vjp(z: np.ndarray, dz: np.ndarray) -> np.ndarray:
    return z * (dz - (dz * z).sum(axis=1, keepdims=True))


def model_loss_and_grads(
    params: ClassifierParams,
    op,
    inputs,
    labels: LabelSet,
    lam: float,
    kappa: float,
    sup_scale: float = 1.0,
    reg_scale: float = 1.0,
    fixed_target: np.ndarray | None = None,
    dropout_masks=None,
):
    """One full forward/backward pass over K perturbed inputs.

    ``op`` is one propagation operator shared by all K draws, or a list of K
    operators over the same theta (used when the perturbation touches the
    topology). ``dropout_masks`` optionally applies a fixed train-time mask to
    each draw's hidden layer. Returns (sup_sum, reg_sum, grads, preds) where
    sup_sum/reg_sum are the raw summed losses and grads holds the analytic
    gradient of sup_scale * L_s + reg_scale * lam * L_r with the sharpened
    target held constant. Pass sup_scale = reg_scale = 1 for the gradient of
    the total loss itself; the training loop uses per-count normalizations.
    """
    k = len(inputs)
    ops = op if isinstance(op, (list, tuple)) else [op] * k
    if len(ops) != k:
        raise ValueError("need one propagation operator per input")
    masks = dropout_masks if dropout_masks is not None else [None] * k
    ys = inputs.hidden(params.w1)
    caches = [_forward_hidden(params, o, y, m) for o, y, m in zip(ops, ys, masks)]
    preds = [c["z"] for c in caches]

    ids = labels.train
    if ids.size == 0:
        raise ValueError("empty train mask")
    y_true = labels.labels[ids]

    sup_sum = 0.0
    for z in preds:
        sup_sum += float(-np.log(np.maximum(z[ids, y_true], _LOG_FLOOR)).sum())
    sup_sum /= k

    target = fixed_target
    if target is None:
        target = sharpen(average_prediction(preds), kappa)
    reg_sum = sum(float(((z - target) ** 2).sum()) for z in preds) / k

    grads = {
        "w1": None,
        "b1": np.zeros_like(params.b1),
        "w2": np.zeros_like(params.w2),
        "b2": np.zeros_like(params.b2),
        "theta": np.zeros_like(ops[0].theta),
    }
    dys = []
    for o, cache in zip(ops, caches):
        z = cache["z"]
        du = np.zeros_like(z)
        du[ids] = z[ids].copy()
        du[ids, y_true] -= 1.0
        du *= sup_scale / k
        if lam != 0.0 and reg_scale != 0.0:
            dz = (2.0 * reg_scale * lam / k) * (z - target)
            du += _softmax_vjp(z, dz)
        grads["w2"] += cache["h"].T @ du
        grads["b2"] += du.sum(axis=0)
        dh = du @ params.w2.T
        if cache["mask"] is not None:
            dh = dh * cache["mask"]
        dv = dh * (cache["hpre"] > 0.0)
        grads["b1"] += dv.sum(axis=0)
        dtheta, dy = gradients_from_stack(o, cache["stack"], dv)
        grads["theta"] += dtheta
        dys.append(dy)
    grads["w1"] = inputs.weight_grad(dys)
    return sup_sum, reg_sum, grads, preds


def predict(params: ClassifierParams, op: PropagationOperator, x) -> np.ndarray:
    """Class probabilities for unperturbed features propagated through the mix."""
    y = x @ params.w1
    return _forward_hidden(params, op, np.asarray(y, dtype=np.float64))["z"]


def _accuracy(z: np.ndarray, labels: LabelSet, ids: np.ndarray) -> float:
    return float(np.mean(z[ids].argmax(axis=1) == labels.labels[ids]))


def _val_metrics(params, op, x, labels) -> tuple[float, float]:
    z = predict(params, op, x)
    ids = labels.val
    if ids.size == 0:
        return float("nan"), float("nan")
    ce = float(-np.log(np.maximum(z[ids, labels.labels[ids]], _LOG_FLOOR)).mean())
    return ce, _accuracy(z, labels, ids)


def train(
    bundle: DatasetBundle, idx: MotifIndex, config: TrainConfig
) -> tuple[ClassifierParams, PropagationOperator, TrainReport]:
    """Full-batch SGD with K perturbed inputs per epoch.

    The default strategy draws motif-preserving feature perturbations;
    grand/dropout/drop_edge counterparts train the same model on baseline
    perturbations. The optimized objective normalizes the supervised term by
    the number of labeled nodes and the consistency term by the node count,
    so the default learning rate is independent of graph size. Model
    selection keeps the parameters with the best validation accuracy;
    validation and test always use the unperturbed graph and features.
    """
    g, x, labels = bundle.graph, bundle.features, bundle.labels
    n = g.num_nodes
    m = labels.train.size
    if m == 0:
        raise ValueError("empty train mask")
    a_hat = normalized_adjacency(g)
    op = PropagationOperator(np.zeros(config.order + 1), a_hat)
    rng = stream(config.seed)
    params = init_classifier(x.shape[1], config.hidden, labels.num_classes, rng)
    x_csr = sp.csr_matrix(x)
    member = idx.member_mask()

    report = TrainReport()
    best_params, best_theta = params.copy(), op.theta.copy()
    best_acc, best_epoch = -1.0, -1
    t0 = time.perf_counter()
    for epoch in range(config.epochs):
        rngs = [stream(config.seed, epoch, j) for j in range(config.k)]
        epoch_op = op
        if config.strategy == "entropy_preserving":
            inputs = ScaledInputs(
                x_csr, [augmentation_scales(member, config.delta, r) for r in rngs]
            )
        elif config.strategy == "grand":
            unprotected = np.zeros(n, dtype=bool)
            inputs = ScaledInputs(
                x_csr, [augmentation_scales(unprotected, config.delta, r) for r in rngs]
            )
        elif config.strategy == "dropout":
            inputs = DenseInputs([dropout_features(x, config.delta, r) for r in rngs])
        else:  # drop_edge: fresh topology per draw, shared theta
            inputs = ScaledInputs(x_csr, [np.ones(n)] * config.k)
            epoch_op = [
                PropagationOperator(op.theta, normalized_adjacency(drop_edge(g, config.delta, r)))
                for r in rngs
            ]
        masks = None
        if config.mlp_dropout > 0.0:
            drop_rngs = [stream(config.seed, epoch, j, 1) for j in range(config.k)]
            masks = [
                (r.random((n, config.hidden)) >= config.mlp_dropout) / (1.0 - config.mlp_dropout)
                for r in drop_rngs
            ]
        sup_sum, reg_sum, grads, _ = model_loss_and_grads(
            params,
            epoch_op,
            inputs,
            labels,
            config.lam,
            config.kappa,
            sup_scale=1.0 / m,
            reg_scale=1.0 / n,
            dropout_masks=masks,
        )
        train_loss = sup_sum / m + config.lam * reg_sum / n
        if not np.isfinite(train_loss):
            raise TrainingDivergedError(
                f"non-finite loss at epoch {epoch}: supervised={sup_sum}, consistency={reg_sum}"
            )
        params.w1 -= config.lr * grads["w1"]
        params.b1 -= config.lr * grads["b1"]
        params.w2 -= config.lr * grads["w2"]
        params.b2 -= config.lr * grads["b2"]
        op.theta -= config.lr * grads["theta"]

        val_loss, val_acc = _val_metrics(params, op, x_csr, labels)
        report.train_losses.append(float(train_loss))
        report.val_losses.append(val_loss)
        report.val_accs.append(val_acc)
        report.reg_losses.append(float(reg_sum))
        if np.isfinite(val_acc) and val_acc > best_acc:
            best_acc, best_epoch = val_acc, epoch
            best_params, best_theta = params.copy(), op.theta.copy()

    report.wall_clock = time.perf_counter() - t0
    report.best_epoch = best_epoch
    report.best_val_acc = best_acc
    best_op = PropagationOperator(best_theta, a_hat)
    if labels.test.size:
        report.test_accuracy = evaluate(best_params, best_op, bundle, "test")
    return best_params, best_op, report


def evaluate(params: ClassifierParams, op: PropagationOperator, bundle: DatasetBundle, mask) -> float:
    """Argmax accuracy on a node mask, using unperturbed propagated features."""
    labels = bundle.labels
    ids = labels.mask(mask) if isinstance(mask, str) else np.asarray(mask, dtype=np.int64)
    if ids.size == 0:
        raise ValueError("empty evaluation mask")
    z = predict(params, op, sp.csr_matrix(bundle.features))
    return _accuracy(z, labels, ids)


def train_gcn(bundle: DatasetBundle, config: TrainConfig):
    """Two-layer GCN baseline trained with supervised cross-entropy only."""
    g, x, labels = bundle.graph, bundle.features, bundle.labels
    ids = labels.train
    if ids.size == 0:
        raise ValueError("empty train mask")
    y_true = labels.labels[ids]
    m = ids.size
    a_hat = normalized_adjacency(g)
    rng = stream(config.seed)
    s1 = np.sqrt(2.0 / (x.shape[1] + config.hidden))
    s2 = np.sqrt(2.0 / (config.hidden + labels.num_classes))
    w1 = rng.normal(0.0, s1, size=(x.shape[1], config.hidden))
    w2 = rng.normal(0.0, s2, size=(config.hidden, labels.num_classes))

    m0 = spmm(a_hat, x)  # constant across epochs
    report = TrainReport()
    best, best_acc, best_epoch = [w1.copy(), w2.copy()], -1.0, -1
    t0 = time.perf_counter()
    for epoch in range(config.epochs):
        pre1 = m0 @ w1
        h1 = np.maximum(pre1, 0.0)
        m1 = spmm(a_hat, h1)
        z = row_softmax(m1 @ w2)
        train_loss = float(-np.log(np.maximum(z[ids, y_true], _LOG_FLOOR)).mean())
        if not np.isfinite(train_loss):
            raise TrainingDivergedError(f"non-finite GCN loss at epoch {epoch}")

        du = np.zeros_like(z)
        du[ids] = z[ids]
        du[ids, y_true] -= 1.0
        du /= m
        dw2 = m1.T @ du
        dh1 = spmm(a_hat, du @ w2.T)
        dpre1 = dh1 * (pre1 > 0.0)
        dw1 = m0.T @ dpre1
        w1 -= config.lr * dw1
        w2 -= config.lr * dw2

        zv = row_softmax(spmm(a_hat, np.maximum(m0 @ w1, 0.0)) @ w2)
        vids = labels.val
        if vids.size:
            val_loss = float(-np.log(np.maximum(zv[vids, labels.labels[vids]], _LOG_FLOOR)).mean())
            val_acc = float(np.mean(zv[vids].argmax(axis=1) == labels.labels[vids]))
        else:
            val_loss, val_acc = float("nan"), float("nan")
        report.train_losses.append(train_loss)
        report.val_losses.append(val_loss)
        report.val_accs.append(val_acc)
        report.reg_losses.append(0.0)
        if np.isfinite(val_acc) and val_acc > best_acc:
            best_acc, best_epoch = val_acc, epoch
            best = [w1.copy(), w2.copy()]

    report.wall_clock = time.perf_counter() - t0
    report.best_epoch = best_epoch
    report.best_val_acc = best_acc
    if labels.test.size:
        z = gcn_forward(g, x, best)
        report.test_accuracy = float(
            np.mean(z[labels.test].argmax(axis=1) == labels.labels[labels.test])
        )
    return best, report


# ---------------------------------------------------------------------------
# checkpoint format: 8-byte magic, little-endian uint64 header length, JSON
# header, then the arrays named in header["arrays"] as little-endian float64
# in C order, in that exact order.

_MAGIC = b"EPGRAPH\x01"
_ARRAY_ORDER = ("theta", "w1", "b1", "w2", "b2")


def save_checkpoint(path, params: ClassifierParams, op: PropagationOperator, config: TrainConfig, epoch: int, metrics: dict) -> None:
    arrays = {
        "theta": op.theta,
        "w1": params.w1,
        "b1": params.b1,
        "w2": params.w2,
        "b2": params.b2,
    }
    header = {
        "format": "epgraph-checkpoint",
        "version": 1,
        "config": asdict(config),
        "epoch": int(epoch),
        "metrics": metrics,
        "arrays": [{"name": k, "shape": list(arrays[k].shape)} for k in _ARRAY_ORDER],
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for k in _ARRAY_ORDER:
            fh.write(np.ascontiguousarray(arrays[k], dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[ClassifierParams, np.ndarray, TrainConfig, dict]:
    """Returns (classifier params, theta, config, full header)."""
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise ValueError(f"{path}: not a checkpoint file")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode())
        arrays = {}
        for spec_entry in header["arrays"]:
            shape = tuple(spec_entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            arrays[spec_entry["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    params = ClassifierParams(arrays["w1"], arrays["b1"], arrays["w2"], arrays["b2"])
    config = TrainConfig(**header["config"])
    return params, arrays["theta"], config, header
