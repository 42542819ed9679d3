"""Command-line interface: dataset stats, entropy reports, sweeps, augmentation,
training, and checkpoint evaluation.

Every subcommand is deterministic given --seed. Reports go to --out when
given, else to stdout; partial output files are removed on failure. Progress
and warnings go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import augment as aug
from .entropy import SCENARIOS, entropy_drop_sweep, entropy_scenario_report
from .io import BundleError, load_bundle
from .motifs import enumerate_triangles, motif_coverage_stats
from .propagate import PropagationOperator
from .graph import normalized_adjacency
from .train import (
    TrainConfig,
    TrainingDivergedError,
    evaluate,
    load_checkpoint,
    save_checkpoint,
    train,
    train_gcn,
)

log = logging.getLogger("epgraph")

_FEATURE_STRATEGIES = ("dropout", "grand", "entropy_preserving", "motif_only")


class _CliError(Exception):
    """User-facing error; message printed to stderr, exit code 2."""


def _emit(text: str, out: str | None, created: list) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)
    created.append(path)
    log.info("wrote %s", path)


def _load(args):
    bundle = load_bundle(args.dataset)
    if getattr(args, "row_normalize", False):
        features = bundle.features.copy()
        sums = features.sum(axis=1, keepdims=True)
        np.divide(features, sums, out=features, where=sums != 0)
        bundle = replace(bundle, features=features)
    return bundle


def _format_report(report, fmt: str) -> str:
    return report.to_json() if fmt == "json" else report.to_csv()


def cmd_stats(args, created) -> int:
    bundle = _load(args)
    idx = enumerate_triangles(bundle.graph)
    stats = motif_coverage_stats(bundle.graph, idx)
    row = {
        "name": bundle.name,
        "num_nodes": bundle.graph.num_nodes,
        "num_edges": bundle.graph.num_edges,
        "raw_edge_lines": bundle.raw_edge_count,
        "feature_dim": int(bundle.features.shape[1]),
        "num_classes": bundle.labels.num_classes,
        "triangle_count": stats.triangle_count,
        "motif_nodes": stats.motif_nodes,
        "coverage": stats.coverage,
    }
    if args.format == "json":
        text = json.dumps(row, indent=2) + "\n"
    else:
        keys = list(row)
        text = ",".join(keys) + "\n" + ",".join(repr(row[k]) if isinstance(row[k], float) else str(row[k]) for k in keys) + "\n"
    _emit(text, args.out, created)
    return 0


def cmd_entropy(args, created) -> int:
    scenarios = tuple(s.strip() for s in args.scenarios.split(",")) if args.scenarios else SCENARIOS
    for s in scenarios:
        if s not in SCENARIOS:
            raise _CliError(f"unknown scenario {s!r}; valid scenarios: {', '.join(SCENARIOS)}")
    bundle = _load(args)
    report = entropy_scenario_report(
        bundle, scenarios=scenarios, rate=args.delta, runs=args.runs, seed=args.seed
    )
    _emit(_format_report(report, args.format), args.out, created)
    return 0


def cmd_sweep(args, created) -> int:
    if args.strategy not in aug.STRATEGIES:
        raise _CliError(
            f"unknown strategy {args.strategy!r}; valid strategies: {', '.join(aug.STRATEGIES)}"
        )
    rates = None
    if args.rates:
        try:
            rates = [float(r) for r in args.rates.split(",")]
        except ValueError:
            raise _CliError(f"--rates must be a comma-separated list of reals, got {args.rates!r}")
        if any(not 0.0 <= r < 1.0 for r in rates):
            raise _CliError("--rates values must lie in [0, 1)")
    bundle = _load(args)
    report = entropy_drop_sweep(bundle, args.strategy, rates=rates, runs=args.runs, seed=args.seed)
    _emit(_format_report(report, args.format), args.out, created)
    return 0


def cmd_augment(args, created) -> int:
    if args.strategy not in _FEATURE_STRATEGIES:
        raise _CliError(
            f"augment writes feature matrices; valid strategies: {', '.join(_FEATURE_STRATEGIES)}"
        )
    bundle = _load(args)
    x = bundle.features
    rng = aug.stream(args.seed, 0, 0)
    if args.strategy == "dropout":
        perturbed = aug.dropout_features(x, args.delta, rng)
    elif args.strategy == "grand":
        perturbed = aug.grand_drop(x, args.delta, rng)
    else:
        idx = enumerate_triangles(bundle.graph)
        if args.strategy == "motif_only":
            perturbed = aug.motif_only_features(x, idx)
        else:
            perturbed = aug.entropy_preserving_augment(bundle.graph, x, idx, args.delta, rng)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for row in perturbed:
        lines.append(",".join(repr(float(v)) for v in row))
    _emit("\n".join(lines) + "\n", str(out_dir / "features.csv"), created)
    provenance = {"strategy": args.strategy, "delta": args.delta, "seed": args.seed, "dataset": bundle.name}
    _emit(json.dumps(provenance, indent=2) + "\n", str(out_dir / "provenance.json"), created)
    return 0


def _config_from_args(args) -> TrainConfig:
    return TrainConfig(
        k=args.k,
        delta=args.delta,
        order=args.d,
        lam=getattr(args, "lambda"),
        kappa=args.kappa,
        lr=args.lr,
        epochs=args.epochs,
        hidden=args.hidden,
        seed=args.seed,
        strategy=args.strategy,
        mlp_dropout=args.mlp_dropout,
    )


def cmd_train(args, created) -> int:
    bundle = _load(args)
    config = _config_from_args(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.model == "gcn":
        log.info("training GCN baseline on %s", bundle.name)
        _, report = train_gcn(bundle, config)
        log.info("GCN baseline writes no checkpoint (report only)")
    else:
        idx = enumerate_triangles(bundle.graph)
        log.info(
            "training on %s: %d nodes, %d triangle-member nodes",
            bundle.name,
            bundle.graph.num_nodes,
            idx.member_nodes.size,
        )
        params, op, report = train(bundle, idx, config)
        ckpt = out_dir / "checkpoint.epg"
        created.append(ckpt)  # registered first so a partial write gets removed
        save_checkpoint(
            ckpt,
            params,
            op,
            config,
            report.best_epoch,
            {"best_val_acc": report.best_val_acc, "test_accuracy": report.test_accuracy},
        )
        log.info("checkpoint: %s", ckpt)
    _emit(report.to_csv(), str(out_dir / "report.csv"), created)
    summary = {
        "model": args.model,
        "dataset": bundle.name,
        "epochs": report.num_epochs(),
        "best_epoch": report.best_epoch,
        "best_val_acc": report.best_val_acc,
        "test_accuracy": report.test_accuracy,
        "wall_clock_s": report.wall_clock,
        "config": asdict(config),
    }
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return 0


def cmd_eval(args, created) -> int:
    try:
        params, theta, _, header = load_checkpoint(args.checkpoint)
    except FileNotFoundError:
        raise _CliError(f"checkpoint not found: {args.checkpoint}")
    except ValueError as exc:
        raise _CliError(str(exc))
    bundle = _load(args)
    op = PropagationOperator(theta, normalized_adjacency(bundle.graph))
    acc = evaluate(params, op, bundle, args.mask)
    out = {
        "dataset": bundle.name,
        "mask": args.mask,
        "accuracy": acc,
        "checkpoint_metrics": header.get("metrics", {}),
    }
    _emit(json.dumps(out, indent=2) + "\n", args.out, created)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="epgraph", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--dataset", required=True, help="bundle directory")
        sp.add_argument("--out", default=None, help="output path (default: stdout)")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("stats", help="node/edge/feature/class counts plus motif stats")
    common(sp, seed=False)
    sp.add_argument("--format", choices=("csv", "json"), default="json")
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("entropy", help="multi-scenario entropy report")
    common(sp)
    sp.add_argument("--scenarios", default=None, help=f"comma list from: {','.join(SCENARIOS)}")
    sp.add_argument("--delta", type=float, default=0.5)
    sp.add_argument("--runs", type=int, default=10)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--row-normalize", action="store_true", help="L1-normalize feature rows first")
    sp.set_defaults(func=cmd_entropy)

    sp = sub.add_parser("sweep", help="entropy vs drop rate for one strategy")
    common(sp)
    sp.add_argument("--strategy", required=True)
    sp.add_argument("--rates", default=None, help="comma list in [0,1); default 0..0.9")
    sp.add_argument("--runs", type=int, default=10)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--row-normalize", action="store_true", help="L1-normalize feature rows first")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("augment", help="write one perturbed feature matrix + provenance")
    common(sp)
    sp.add_argument("--strategy", required=True)
    sp.add_argument("--delta", type=float, default=0.5)
    sp.set_defaults(func=cmd_augment)

    sp = sub.add_parser("train", help="train the classifier (or the GCN baseline)")
    common(sp)
    sp.add_argument("--model", choices=("augmented", "gcn"), default="augmented")
    sp.add_argument(
        "--strategy",
        choices=("entropy_preserving", "grand", "dropout", "drop_edge"),
        default="entropy_preserving",
        help="per-epoch perturbation used by the augmented model",
    )
    sp.add_argument("--epochs", type=int, default=1000)
    sp.add_argument("--lr", type=float, default=0.2)
    sp.add_argument("--hidden", type=int, default=32)
    sp.add_argument("--d", type=int, default=8, help="propagation order")
    sp.add_argument("--k", type=int, default=4, help="augmentations per epoch")
    sp.add_argument("--lambda", type=float, default=1.0, dest="lambda")
    sp.add_argument("--kappa", type=float, default=0.5)
    sp.add_argument("--delta", type=float, default=0.5)
    sp.add_argument("--mlp-dropout", type=float, default=0.0,
                    help="train-time dropout on the classifier hidden layer")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("eval", help="evaluate a checkpoint on a dataset mask")
    common(sp, seed=False)
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--mask", choices=("train", "val", "test"), default="test")
    sp.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    created: list[Path] = []
    try:
        return args.func(args, created)
    except (_CliError, BundleError) as exc:
        for path in created:
            path.unlink(missing_ok=True)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TrainingDivergedError, ValueError, OSError) as exc:
        for path in created:
            path.unlink(missing_ok=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
