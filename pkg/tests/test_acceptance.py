"""Acceptance suite: one test per acceptance criterion, one PASS/FAIL line each.

Criteria bound to the real benchmark bundles (cora/citeseer/pubmed) skip with
an explicit reason when the bundles are absent; build them with
converter/convert.py and place them under data/ (or $EPGRAPH_DATA).
Everything else runs on synthetic data unconditionally.

Run with: pytest tests/test_acceptance.py -v -s
"""

import os
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import real_bundle
from epgraph import (
    Graph,
    PropagationOperator,
    TrainConfig,
    brute_force_triangles,
    consistency_loss,
    entropy_drop_sweep,
    entropy_scenario_report,
    enumerate_triangles,
    motif_coverage_stats,
    normalized_adjacency,
    sharpen,
    smoothness_index,
    softmax_weights,
    train,
    train_gcn,
)
from epgraph.augment import entropy_preserving_augment, stream
from epgraph.synthetic import erdos_renyi, planted_partition_bundle

DATASETS = ("cora", "citeseer", "pubmed")

ORIGINAL_ENTROPY = {"cora": 7.6358, "citeseer": 7.9247, "pubmed": 9.6724}
MOTIF_ONLY_ENTROPY = {"cora": 7.6028, "citeseer": 7.6996, "pubmed": 9.6384}
STOCHASTIC_ENTROPY = {
    "cora": {"drop_node": 6.7793, "drop_edge": 7.3648, "dropout": 7.3063, "grand": 6.6292, "entropy_preserving": 7.6229},
    "citeseer": {"drop_node": 6.8784, "drop_edge": 7.5570, "dropout": 7.7154, "grand": 6.7884, "entropy_preserving": 7.7781},
    "pubmed": {"drop_node": 8.6353, "drop_edge": 9.3230, "dropout": 9.3119, "grand": 8.5597, "entropy_preserving": 9.6573},
}
TRIANGLE_REFERENCE = {"cora": (4890, 1470), "citeseer": (4137, 1183), "pubmed": (37649, 4835)}
ACCURACY_FLOOR = {"cora": 0.82, "citeseer": 0.73, "pubmed": 0.80}
GCN_FLOOR_CORA = 0.78

BASELINES = ("drop_node", "drop_edge", "dropout", "grand")


@contextmanager
def criterion(name):
    try:
        yield
    except pytest.skip.Exception:
        print(f"SKIP: {name}")
        raise
    except Exception:
        print(f"FAIL: {name}")
        raise
    print(f"PASS: {name}")


# ---------------------------------------------------------------------------
# entropy criteria (real datasets)


@pytest.mark.parametrize("name", DATASETS)
def test_entropy_original(name):
    with criterion(f"entropy original {name} = {ORIGINAL_ENTROPY[name]} +/- 0.05 in < 5 s"):
        bundle = real_bundle(name)
        t0 = time.perf_counter()
        value = smoothness_index(bundle.graph, bundle.features).value
        elapsed = time.perf_counter() - t0
        print(f"  measured {name} original entropy: {value:.4f} ({elapsed:.2f} s)")
        assert abs(value - ORIGINAL_ENTROPY[name]) <= 0.05
        assert elapsed < 5.0


@pytest.mark.parametrize("name", DATASETS)
def test_entropy_motif_only(name):
    with criterion(f"entropy motif-only {name} (value or fallback ordering)"):
        bundle = real_bundle(name)
        idx = enumerate_triangles(bundle.graph)
        report = entropy_scenario_report(
            bundle, scenarios=("original", "grand", "motif_only"), rate=0.5, runs=10, seed=0, idx=idx
        )
        motif_only = report.mean("motif_only")
        original = report.mean("original")
        grand50 = report.mean("grand")
        counts_match = (idx.triangle_count, idx.member_nodes.size) == TRIANGLE_REFERENCE[name]
        print(
            f"  measured {name}: motif_only={motif_only:.4f} original={original:.4f} "
            f"grand@50%={grand50:.4f} (reference {MOTIF_ONLY_ENTROPY[name]}, "
            f"triangle census matches reference: {counts_match})"
        )
        if counts_match:
            assert abs(motif_only - MOTIF_ONLY_ENTROPY[name]) <= 0.05
        else:
            # documented fallback: census convention differs, so require the
            # ordering the criterion prescribes instead of the exact value
            assert motif_only < original
            assert motif_only > grand50


@pytest.mark.parametrize("name", DATASETS)
def test_entropy_stochastic_scenarios(name):
    with criterion(f"entropy stochastic scenarios {name}: +/- 0.15 and ours above baselines"):
        bundle = real_bundle(name)
        report = entropy_scenario_report(bundle, rate=0.5, runs=10, seed=0)
        ours = report.mean("entropy_preserving")
        reference = STOCHASTIC_ENTROPY[name]
        for scenario in BASELINES + ("entropy_preserving",):
            measured = report.mean(scenario)
            print(f"  {name} {scenario}: measured {measured:.4f}, reference {reference[scenario]}")
            assert abs(measured - reference[scenario]) <= 0.15, scenario
        for scenario in BASELINES:
            assert ours > report.mean(scenario), f"ours not above {scenario}"


@pytest.mark.parametrize("name", DATASETS)
def test_entropy_rate_sweep(name):
    with criterion(f"drop-rate sweep {name}: anchored at rate 0, lower at 0.9, < 2 min"):
        bundle = real_bundle(name)
        original = smoothness_index(bundle.graph, bundle.features).value
        idx = enumerate_triangles(bundle.graph)
        t0 = time.perf_counter()
        ends = {}
        for strategy in BASELINES + ("entropy_preserving",):
            report = entropy_drop_sweep(
                bundle, strategy, rates=[0.0, 0.9], runs=10, seed=0, idx=idx
            )
            assert report.mean(strategy, 0.0) == pytest.approx(original, rel=1e-14)
            ends[strategy] = report.mean(strategy, 0.9)
            assert ends[strategy] < original
        elapsed = time.perf_counter() - t0
        print(f"  {name} entropy at rate 0.9: {ends} ({elapsed:.1f} s)")
        if name == "cora":
            assert ends["grand"] < ends["drop_edge"]
        assert elapsed < 120.0


# ---------------------------------------------------------------------------
# motif criteria


def test_motif_oracle_equivalence_50_graphs():
    with criterion("triangle enumeration equals brute-force oracle on 50 random graphs"):
        rng = np.random.default_rng(404)
        for trial in range(50):
            n = int(rng.integers(20, 201))
            p = float(rng.uniform(0.02, 0.15))
            g = erdos_renyi(n, p, seed=int(rng.integers(1 << 31)))
            assert enumerate_triangles(g).triangle_count == brute_force_triangles(g)


def test_motif_k4():
    with criterion("K4 has exactly 4 triangles"):
        iu = np.triu_indices(4, k=1)
        g = Graph.from_edges(4, np.column_stack(iu))
        assert enumerate_triangles(g).triangle_count == 4


@pytest.mark.parametrize("name", ("cora", "citeseer"))
def test_motif_counts_reported_against_reference(name):
    # reporting criterion: measured undirected census vs the reference row,
    # with any deviation documented (the reference counting convention is
    # unstated; 3x-of-undirected is the likely reading)
    with criterion(f"triangle census {name} reported against reference counts"):
        bundle = real_bundle(name)
        idx = enumerate_triangles(bundle.graph)
        stats = motif_coverage_stats(bundle.graph, idx)
        ref_tri, ref_nodes = TRIANGLE_REFERENCE[name]
        print(
            f"  {name}: undirected triangles {stats.triangle_count} (reference {ref_tri}), "
            f"motif nodes {stats.motif_nodes} (reference {ref_nodes}), "
            f"coverage {stats.coverage:.3f}"
        )
        if (stats.triangle_count, stats.motif_nodes) != (ref_tri, ref_nodes):
            ratio = ref_tri / stats.triangle_count if stats.triangle_count else float("nan")
            print(
                f"  DOCUMENTED DEVIATION: undirected simple-graph census used here; "
                f"reference/measured triangle ratio = {ratio:.3f}"
            )
        assert stats.triangle_count > 0
        assert 0.0 < stats.coverage <= 1.0
        assert stats.motif_nodes == idx.member_nodes.size


# ---------------------------------------------------------------------------
# gradient criterion


def test_gradient_check_full_model():
    with criterion("analytic vs finite-difference gradients, rel error < 1e-4, < 10 s"):
        t0 = time.perf_counter()
        from test_gradients import test_full_model_gradients_match_finite_differences

        test_full_model_gradients_match_finite_differences()
        elapsed = time.perf_counter() - t0
        print(f"  gradient check in {elapsed:.2f} s")
        assert elapsed < 10.0


# ---------------------------------------------------------------------------
# classification criteria (real datasets)


def _mean_test_accuracy(bundle, config_base, seeds):
    idx = enumerate_triangles(bundle.graph)
    accs = []
    for seed in seeds:
        config = TrainConfig(**{**config_base, "seed": seed})
        _, _, report = train(bundle, idx, config)
        accs.append(report.test_accuracy)
        print(f"  seed {seed}: test accuracy {report.test_accuracy:.4f}")
    return float(np.mean(accs))


def test_classification_cora():
    with criterion("Cora classification: mean over 5 seeds >= 82%, <= 15 min"):
        bundle = real_bundle("cora")
        t0 = time.perf_counter()
        mean_acc = _mean_test_accuracy(bundle, dict(k=4, delta=0.5, order=8, lam=1.0, kappa=0.5, epochs=1000), seeds=range(5))
        elapsed = time.perf_counter() - t0
        print(f"  Cora mean test accuracy {mean_acc:.4f} in {elapsed / 60:.1f} min")
        assert mean_acc >= ACCURACY_FLOOR["cora"]
        assert elapsed <= 15 * 60


def test_classification_citeseer():
    with criterion("Citeseer classification: mean over 5 seeds >= 73%"):
        bundle = real_bundle("citeseer")
        mean_acc = _mean_test_accuracy(bundle, dict(k=4, delta=0.5, order=8, lam=1.0, kappa=0.5, epochs=1000), seeds=range(5))
        print(f"  Citeseer mean test accuracy {mean_acc:.4f}")
        assert mean_acc >= ACCURACY_FLOOR["citeseer"]


def test_classification_pubmed_optional():
    if not os.environ.get("EPGRAPH_RUN_PUBMED"):
        pytest.skip("Pubmed criterion is optional; set EPGRAPH_RUN_PUBMED=1 to run it")
    with criterion("Pubmed classification (optional): >= 80% at 200 epochs, <= 30 min"):
        bundle = real_bundle("pubmed")
        t0 = time.perf_counter()
        mean_acc = _mean_test_accuracy(bundle, dict(k=4, delta=0.5, order=8, lam=1.0, kappa=0.5, epochs=200), seeds=range(3))
        elapsed = time.perf_counter() - t0
        print(f"  Pubmed mean test accuracy {mean_acc:.4f} in {elapsed / 60:.1f} min")
        assert mean_acc >= ACCURACY_FLOOR["pubmed"]
        assert elapsed <= 30 * 60


def test_gcn_baseline_cora():
    with criterion("GCN baseline on Cora >= 78%"):
        bundle = real_bundle("cora")
        _, report = train_gcn(bundle, TrainConfig(epochs=1000, seed=0))
        print(f"  GCN Cora test accuracy {report.test_accuracy:.4f}")
        assert report.test_accuracy >= GCN_FLOOR_CORA


# ---------------------------------------------------------------------------
# property suites (always run)


def test_property_suite():
    with criterion("property suite: entropy/augmentation/softmax/sharpen/loss/determinism"):
        rng = np.random.default_rng(0)

        # entropy: normalization, bounds, scale and permutation invariance
        g = erdos_renyi(40, 0.15, seed=1)
        x = np.abs(rng.normal(size=(40, 6)))
        res = smoothness_index(g, x)
        assert abs(res.per_node_p.sum() - 1.0) < 1e-9
        assert 0.0 <= res.value <= np.log(40) + 1e-9
        assert abs(smoothness_index(g, 2.5 * x).value - res.value) < 1e-9
        perm = rng.permutation(40)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(40)
        g2 = Graph.from_edges(40, perm[g.edge_list()])
        assert abs(smoothness_index(g2, x[inv]).value - res.value) < 1e-9

        # augmentation: motif-row identity (bitwise) and unbiasedness
        idx = enumerate_triangles(g)
        member = idx.member_mask()
        assert member.any() and not member.all()
        draws = 10000
        acc = np.zeros_like(x)
        for i in range(draws):
            out = entropy_preserving_augment(g, x, idx, 0.5, stream(7, i))
            if i < 50:
                assert np.array_equal(out[member], x[member])
            acc += out
        mean = acc / draws
        rest = ~member
        tol = 3.0 * np.sqrt(0.5 / 0.5) * np.abs(x[rest]) / np.sqrt(draws)
        assert np.all(np.abs(mean[rest] - x[rest]) <= tol + 1e-12)

        # softmax: normalization and shift invariance
        theta = rng.normal(size=9)
        w = softmax_weights(theta)
        assert abs(w.sum() - 1.0) < 1e-12
        assert np.abs(softmax_weights(theta + 5.0) - w).max() < 1e-12

        # sharpening preserves the argmax
        z = rng.dirichlet(np.ones(7), size=30)
        assert np.array_equal(sharpen(z, 0.5).argmax(axis=1), z.argmax(axis=1))

        # consistency loss of identical predictions vanishes
        assert consistency_loss([z, z], 1.0) < 1e-12

        # deterministic replay of training
        bundle = planted_partition_bundle(
            nodes_per_class=20, num_classes=3, feature_dim=24,
            train_per_class=5, val_per_class=5, seed=3,
        )
        bidx = enumerate_triangles(bundle.graph)
        config = TrainConfig(k=2, order=3, epochs=5, seed=4)
        _, _, rep1 = train(bundle, bidx, config)
        _, _, rep2 = train(bundle, bidx, config)
        assert rep1.train_losses == rep2.train_losses
        assert rep1.test_accuracy == rep2.test_accuracy


def test_synthetic_pipeline_orderings():
    """Scenario orderings on a synthetic bundle; keeps the dataset-bound
    criteria exercisable end-to-end without the real benchmarks."""
    with criterion("synthetic bundle: motif strategy preserves more entropy than node/row dropping"):
        bundle = planted_partition_bundle(seed=11)
        report = entropy_scenario_report(bundle, rate=0.5, runs=10, seed=0)
        original = report.mean("original")
        ours = report.mean("entropy_preserving")
        print(
            "  synthetic entropies:",
            {r["scenario"]: round(r["mean"], 4) for r in report.rows},
        )
        assert ours < original
        assert ours > report.mean("drop_node")
        assert ours > report.mean("grand")
        for strategy in BASELINES + ("entropy_preserving",):
            sweep = entropy_drop_sweep(bundle, strategy, rates=[0.0, 0.9], runs=10, seed=0)
            # every rate-0 run equals the original exactly; the report mean of
            # ten identical values may wobble by one ulp
            assert sweep.mean(strategy, 0.0) == pytest.approx(original, rel=1e-14)
            assert sweep.mean(strategy, 0.9) < original
