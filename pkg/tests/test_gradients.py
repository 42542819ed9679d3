"""Full-model gradient check: analytic backward vs central finite differences."""

import numpy as np

from epgraph import PropagationOperator, enumerate_triangles, normalized_adjacency
from epgraph.augment import generate_batch
from epgraph.io import DatasetBundle, LabelSet
from epgraph.synthetic import erdos_renyi
from epgraph.train import ClassifierParams, DenseInputs, init_classifier, model_loss_and_grads

LAM = 1.3
KAPPA = 0.5
STEP = 1e-5
TOL = 1e-4


def twelve_node_instance():
    g = erdos_renyi(12, 0.35, seed=21)
    rng = np.random.default_rng(21)
    x = np.abs(rng.normal(size=(12, 6)))
    labels = LabelSet(
        labels=rng.integers(0, 3, size=12).astype(np.int64),
        num_classes=3,
        train=np.array([0, 2, 5, 7], dtype=np.int64),
        val=np.array([1, 3], dtype=np.int64),
        test=np.array([4, 6], dtype=np.int64),
    )
    bundle = DatasetBundle(graph=g, features=x, labels=labels, name="grad12", raw_edge_count=g.num_edges)
    idx = enumerate_triangles(g)
    x_tildes = generate_batch(g, x, idx, 0.5, 2, seed=3)
    params = init_classifier(6, 5, 3, rng)
    theta = rng.normal(scale=0.5, size=4)
    op = PropagationOperator(theta, normalized_adjacency(g))
    return bundle, params, op, x_tildes


def total_loss_at(params, theta, op, x_tildes, labels, fixed_target):
    probe = PropagationOperator(theta, op.operator)
    sup, reg, _, _ = model_loss_and_grads(
        params, probe, DenseInputs(x_tildes), labels, LAM, KAPPA, fixed_target=fixed_target
    )
    return sup + LAM * reg


def test_full_model_gradients_match_finite_differences():
    bundle, params, op, x_tildes = twelve_node_instance()
    labels = bundle.labels

    sup, reg, grads, preds = model_loss_and_grads(
        params, op, DenseInputs(x_tildes), labels, LAM, KAPPA
    )
    # freeze the sharpened target so finite differences probe the same
    # fixed-target objective the analytic gradient is defined for
    from epgraph.train import average_prediction, sharpen

    target = sharpen(average_prediction(preds), KAPPA)
    base = total_loss_at(params, op.theta, op, x_tildes, labels, target)
    assert np.isclose(base, sup + LAM * reg)

    def check(array, grad, mutate):
        worst = 0.0
        for pos in range(array.size):
            up, down = array.copy(), array.copy()
            up.flat[pos] += STEP
            down.flat[pos] -= STEP
            fd = (mutate(up) - mutate(down)) / (2 * STEP)
            denom = max(abs(fd), abs(grad.flat[pos]), 1e-8)
            worst = max(worst, abs(fd - grad.flat[pos]) / denom)
        return worst

    def with_w1(w):
        p = ClassifierParams(w, params.b1, params.w2, params.b2)
        return total_loss_at(p, op.theta, op, x_tildes, labels, target)

    def with_b1(b):
        p = ClassifierParams(params.w1, b, params.w2, params.b2)
        return total_loss_at(p, op.theta, op, x_tildes, labels, target)

    def with_w2(w):
        p = ClassifierParams(params.w1, params.b1, w, params.b2)
        return total_loss_at(p, op.theta, op, x_tildes, labels, target)

    def with_b2(b):
        p = ClassifierParams(params.w1, params.b1, params.w2, b)
        return total_loss_at(p, op.theta, op, x_tildes, labels, target)

    def with_theta(t):
        return total_loss_at(params, t, op, x_tildes, labels, target)

    errors = {
        "w1": check(params.w1, grads["w1"], with_w1),
        "b1": check(params.b1, grads["b1"], with_b1),
        "w2": check(params.w2, grads["w2"], with_w2),
        "b2": check(params.b2, grads["b2"], with_b2),
        "theta": check(op.theta, grads["theta"], with_theta),
    }
    for group, err in errors.items():
        assert err < TOL, f"{group}: relative error {err:.2e}"


def test_gradients_with_per_input_operators():
    # drop_edge-style training propagates each draw through its own topology;
    # theta is shared, so its gradient sums across the operators
    bundle, params, op, x_tildes = twelve_node_instance()
    labels = bundle.labels
    g2 = erdos_renyi(12, 0.3, seed=99)
    op2 = PropagationOperator(op.theta, normalized_adjacency(g2))
    ops = [op, op2]

    sup, reg, grads, preds = model_loss_and_grads(
        params, ops, DenseInputs(x_tildes), labels, LAM, KAPPA
    )
    from epgraph.train import average_prediction, sharpen

    target = sharpen(average_prediction(preds), KAPPA)

    def loss_at_theta(theta):
        probes = [PropagationOperator(theta, o.operator) for o in ops]
        s, r, _, _ = model_loss_and_grads(
            params, probes, DenseInputs(x_tildes), labels, LAM, KAPPA, fixed_target=target
        )
        return s + LAM * r

    for i in range(op.theta.size):
        up, down = op.theta.copy(), op.theta.copy()
        up[i] += STEP
        down[i] -= STEP
        fd = (loss_at_theta(up) - loss_at_theta(down)) / (2 * STEP)
        denom = max(abs(fd), abs(grads["theta"][i]), 1e-8)
        assert abs(fd - grads["theta"][i]) / denom < TOL


def test_gradients_with_fixed_hidden_dropout_masks():
    bundle, params, op, x_tildes = twelve_node_instance()
    labels = bundle.labels
    rng = np.random.default_rng(8)
    masks = [(rng.random((12, 5)) >= 0.4) / 0.6 for _ in x_tildes]

    sup, reg, grads, preds = model_loss_and_grads(
        params, op, DenseInputs(x_tildes), labels, LAM, KAPPA, dropout_masks=masks
    )
    from epgraph.train import average_prediction, sharpen

    target = sharpen(average_prediction(preds), KAPPA)

    def loss_at(w2):
        p = ClassifierParams(params.w1, params.b1, w2, params.b2)
        s, r, _, _ = model_loss_and_grads(
            p, op, DenseInputs(x_tildes), labels, LAM, KAPPA,
            fixed_target=target, dropout_masks=masks,
        )
        return s + LAM * r

    def loss_at_w1(w1):
        p = ClassifierParams(w1, params.b1, params.w2, params.b2)
        s, r, _, _ = model_loss_and_grads(
            p, op, DenseInputs(x_tildes), labels, LAM, KAPPA,
            fixed_target=target, dropout_masks=masks,
        )
        return s + LAM * r

    for array, grad, fn in ((params.w2, grads["w2"], loss_at), (params.w1, grads["w1"], loss_at_w1)):
        probes = np.random.default_rng(9).integers(0, array.size, size=6)
        for pos in probes:
            up, down = array.copy(), array.copy()
            up.flat[pos] += STEP
            down.flat[pos] -= STEP
            fd = (fn(up) - fn(down)) / (2 * STEP)
            denom = max(abs(fd), abs(grad.flat[pos]), 1e-8)
            assert abs(fd - grad.flat[pos]) / denom < TOL


def test_gradients_zero_at_consistency_free_optimum():
    # lambda = 0 and a uniform prediction: supervised gradient wrt b2 vanishes
    # when every class is equally represented in the train mask
    g = erdos_renyi(12, 0.4, seed=5)
    x = np.abs(np.random.default_rng(5).normal(size=(12, 6)))
    labels = LabelSet(
        labels=np.array([0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2], dtype=np.int64),
        num_classes=3,
        train=np.array([0, 1, 2], dtype=np.int64),
        val=np.array([3], dtype=np.int64),
        test=np.array([4], dtype=np.int64),
    )
    params = ClassifierParams(np.zeros((6, 5)), np.zeros(5), np.zeros((5, 3)), np.zeros(3))
    op = PropagationOperator(np.zeros(2), normalized_adjacency(g))
    _, _, grads, _ = model_loss_and_grads(
        params, op, DenseInputs([x]), labels, 0.0, 1.0
    )
    assert np.abs(grads["b2"]).max() < 1e-12
