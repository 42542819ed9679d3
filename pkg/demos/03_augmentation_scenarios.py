#!/usr/bin/env python3
"""How much entropy does each perturbation strategy destroy?

Reproduces the multi-scenario entropy comparison on a synthetic bundle:
the original graph, the four classic perturbations at 50% drop rate, the
deterministic motif-only masking, and the motif-preserving strategy. Node
and row dropping hit the entropy hardest; keeping motif rows intact softens
the damage relative to blind row dropping at the same rate.
"""

from epgraph import entropy_scenario_report, enumerate_triangles
from epgraph.synthetic import planted_partition_bundle

bundle = planted_partition_bundle(seed=11)
idx = enumerate_triangles(bundle.graph)
coverage = idx.member_nodes.size / bundle.graph.num_nodes
print(f"bundle: {bundle.graph.num_nodes} nodes, {bundle.graph.num_edges} edges, "
      f"motif coverage {coverage:.2f}\n")

report = entropy_scenario_report(bundle, rate=0.5, runs=10, seed=0, idx=idx)
print(f"{'scenario':22s} {'mean':>8s} {'std':>8s} {'runs':>5s}")
for row in report.rows:
    print(f"{row['scenario']:22s} {row['mean']:8.4f} {row['std']:8.4f} {row['runs']:5d}")

original = report.mean("original")
ours = report.mean("entropy_preserving")
print(f"\nentropy retained by the motif-preserving strategy: "
      f"{ours / original:.1%} of the original")
print(f"entropy retained by row dropping (GRAND) at the same rate: "
      f"{report.mean('grand') / original:.1%}")
print("\nCSV form:\n" + report.to_csv())
