#!/usr/bin/env python3
"""Semi-supervised node classification end to end.

Trains the consistency-regularized classifier (motif-preserving
augmentations, mixed-order propagation, sharpened-average targets) on a
synthetic planted-partition bundle and compares it to the plain two-layer
GCN baseline trained on the same split.
"""

from epgraph import TrainConfig, enumerate_triangles, train, train_gcn
from epgraph.synthetic import planted_partition_bundle

bundle = planted_partition_bundle(
    nodes_per_class=60, num_classes=4, p_in=0.08, p_out=0.008,
    train_per_class=6, val_per_class=10, seed=5,
)
idx = enumerate_triangles(bundle.graph)
print(f"bundle: {bundle.graph.num_nodes} nodes, {bundle.graph.num_edges} edges, "
      f"{bundle.labels.train.size} labeled for training, "
      f"{idx.member_nodes.size} motif nodes\n")

config = TrainConfig(k=4, delta=0.5, order=8, lam=1.0, kappa=0.5, epochs=300, seed=0)
params, op, report = train(bundle, idx, config)
print("consistency-regularized model:")
print(f"  best val accuracy {report.best_val_acc:.3f} at epoch {report.best_epoch}")
print(f"  test accuracy     {report.test_accuracy:.3f}")
print(f"  propagation weights over adjacency powers: {op.weights().round(3)}")
print(f"  wall clock        {report.wall_clock:.1f}s")

_, gcn_report = train_gcn(bundle, TrainConfig(epochs=300, seed=0))
print("\nplain 2-layer GCN baseline:")
print(f"  best val accuracy {gcn_report.best_val_acc:.3f}")
print(f"  test accuracy     {gcn_report.test_accuracy:.3f}")

print("\nfirst report rows (epoch,train_loss,val_loss,val_acc):")
print("\n".join(report.to_csv().splitlines()[:6]))
