"""Graph entropy of feature diffusion (the smoothness index) and its reports.

Each node gets an information value f(v): the average inner product between
its feature vector and those of its first-order neighbors. Normalizing the
f-values to a distribution p and taking Shannon entropy (natural log) yields
a single number that is high when feature mass spreads evenly over the graph
and low when a few neighborhoods concentrate it.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import augment
from .graph import Graph, validate_features
from .io import DatasetBundle
from .motifs import MotifIndex, enumerate_triangles

__all__ = [
    "SCENARIOS",
    "EntropyResult",
    "EntropyReport",
    "node_functional",
    "node_functionals",
    "node_probabilities",
    "smoothness_index",
    "scenario_entropy",
    "entropy_scenario_report",
    "entropy_drop_sweep",
]

# the seven reporting scenarios; stochastic ones take a drop rate
SCENARIOS = (
    "original",
    "drop_node",
    "drop_edge",
    "dropout",
    "grand",
    "motif_only",
    "entropy_preserving",
)
_DETERMINISTIC = ("original", "motif_only")


@dataclass(frozen=True)
class EntropyResult:
    """Entropy value in nats plus the per-node quantities behind it."""

    value: float
    per_node_f: np.ndarray
    per_node_p: np.ndarray
    degenerate: bool = False
    negatives_clamped: int = 0


@dataclass
class EntropyReport:
    """Rows of (scenario, rate, mean, std, runs), ready for CSV/JSON emission."""

    rows: list = field(default_factory=list)

    def add(self, scenario: str, rate: float, values) -> None:
        values = np.asarray(values, dtype=np.float64)
        self.rows.append(
            {
                "scenario": scenario,
                "rate": float(rate),
                "mean": float(values.mean()),
                "std": float(values.std()),
                "runs": int(values.size),
            }
        )

    def mean(self, scenario: str, rate: float | None = None) -> float:
        for row in self.rows:
            if row["scenario"] == scenario and (rate is None or row["rate"] == rate):
                return row["mean"]
        raise KeyError(f"no row for scenario {scenario!r} rate {rate!r}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("scenario,rate,mean,std,runs\n")
        for row in self.rows:
            buf.write(
                f"{row['scenario']},{row['rate']!r},{row['mean']!r},"
                f"{row['std']!r},{row['runs']}\n"
            )
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.rows, indent=2) + "\n"


def node_functional(g: Graph, x: np.ndarray, v: int) -> float:
    """Average inner product between node v's features and its neighbors'.

    Returns 0 for isolated nodes; negative averages are clamped to 0 so the
    value can feed a probability.
    """
    nbrs = g.neighbors(v)
    if nbrs.size == 0:
        return 0.0
    val = float((x[nbrs] @ x[v]).sum()) / nbrs.size
    return max(val, 0.0)


def node_functionals(g: Graph, x: np.ndarray) -> tuple[np.ndarray, int]:
    """Vectorized f over all nodes; also counts how many negatives were clamped."""
    x = validate_features(g, x)
    deg = g.degrees().astype(np.float64)
    sums = np.einsum("ij,ij->i", x, g.to_scipy() @ x)
    with np.errstate(invalid="ignore", divide="ignore"):
        f = np.where(deg > 0, sums / np.maximum(deg, 1.0), 0.0)
    clamped = int(np.count_nonzero(f < 0))
    if clamped:
        f = np.maximum(f, 0.0)
    return f, clamped


def node_probabilities(g: Graph, x: np.ndarray) -> np.ndarray:
    """f normalized to a distribution; all-zeros vector when total mass is 0."""
    f, _ = node_functionals(g, x)
    total = f.sum()
    if total <= 0.0:
        return np.zeros_like(f)
    return f / total


def smoothness_index(g: Graph, x: np.ndarray) -> EntropyResult:
    """Shannon entropy (nats) of the node probability distribution.

    Uses the 0*ln(0) = 0 convention; a degenerate input with zero total mass
    yields entropy 0 with the degenerate flag set.
    """
    f, clamped = node_functionals(g, x)
    total = f.sum()
    if total <= 0.0:
        return EntropyResult(
            value=0.0,
            per_node_f=f,
            per_node_p=np.zeros_like(f),
            degenerate=True,
            negatives_clamped=clamped,
        )
    p = f / total
    nz = p > 0
    value = float(-np.sum(p[nz] * np.log(p[nz])))
    return EntropyResult(value=value, per_node_f=f, per_node_p=p, degenerate=False, negatives_clamped=clamped)


def scenario_entropy(
    bundle: DatasetBundle,
    scenario: str,
    rate: float,
    rng: np.random.Generator,
    idx: MotifIndex | None = None,
) -> float:
    """Entropy of one perturbed draw of the bundle under the named scenario.

    Node dropping measures the surviving subgraph; feature perturbations keep
    every node and let zeroed rows contribute nothing.
    """
    g, x = bundle.graph, bundle.features
    if scenario == "original":
        return smoothness_index(g, x).value
    if scenario == "drop_node":
        sub = augment.drop_node(g, x, rate, rng)
        return smoothness_index(sub.graph, sub.features).value
    if scenario == "drop_edge":
        return smoothness_index(augment.drop_edge(g, rate, rng), x).value
    if scenario == "dropout":
        return smoothness_index(g, augment.dropout_features(x, rate, rng)).value
    if scenario == "grand":
        return smoothness_index(g, augment.grand_drop(x, rate, rng)).value
    if scenario == "motif_only":
        idx = idx if idx is not None else enumerate_triangles(g)
        return smoothness_index(g, augment.motif_only_features(x, idx)).value
    if scenario == "entropy_preserving":
        idx = idx if idx is not None else enumerate_triangles(g)
        return smoothness_index(g, augment.entropy_preserving_augment(g, x, idx, rate, rng)).value
    raise ValueError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")


def entropy_scenario_report(
    bundle: DatasetBundle,
    scenarios=SCENARIOS,
    rate: float = 0.5,
    runs: int = 10,
    seed: int = 0,
    idx: MotifIndex | None = None,
) -> EntropyReport:
    """Mean/std entropy over seeded runs for each named scenario.

    Every (scenario, run) pair draws from its own stream keyed by
    (seed, scenario index, run), so adding scenarios never shifts results.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    for s in scenarios:
        if s not in SCENARIOS:
            raise ValueError(f"unknown scenario {s!r}; expected one of {SCENARIOS}")
    if idx is None and any(s in ("motif_only", "entropy_preserving") for s in scenarios):
        idx = enumerate_triangles(bundle.graph)
    report = EntropyReport()
    for s in scenarios:
        s_id = SCENARIOS.index(s)
        n_runs = 1 if s in _DETERMINISTIC else runs
        used_rate = 0.0 if s in _DETERMINISTIC else rate
        values = [
            scenario_entropy(bundle, s, used_rate, augment.stream(seed, s_id, r), idx)
            for r in range(n_runs)
        ]
        report.add(s, used_rate, values)
    return report


def entropy_drop_sweep(
    bundle: DatasetBundle,
    strategy: str,
    rates=None,
    runs: int = 10,
    seed: int = 0,
    idx: MotifIndex | None = None,
) -> EntropyReport:
    """Mean entropy per drop rate for one strategy (rate grid 0..0.9 default)."""
    if strategy not in augment.STRATEGIES:
        raise ValueError(
            f"unknown strategy {strategy!r}; expected one of {augment.STRATEGIES}"
        )
    if rates is None:
        rates = np.arange(0.0, 0.91, 0.1)
    rates = [float(r) for r in rates]
    for r in rates:
        if not 0.0 <= r < 1.0:
            raise ValueError(f"rates must lie in [0, 1), got {r}")
    if idx is None and strategy == "entropy_preserving":
        idx = enumerate_triangles(bundle.graph)
    s_id = augment.STRATEGIES.index(strategy)
    report = EntropyReport()
    for j, rate in enumerate(rates):
        values = [
            scenario_entropy(bundle, strategy, rate, augment.stream(seed, s_id, j, r), idx)
            for r in range(runs)
        ]
        report.add(strategy, rate, values)
    return report
