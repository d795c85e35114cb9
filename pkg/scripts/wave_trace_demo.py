#!/usr/bin/env python3
"""Tiny cascade walkthrough: run on a star, print every rewriting step.

Shows the raw derivation (every rule application) next to the simplified
per-round view and the resulting metric series.
"""

import sys

from porgysim.graph import GraphBuilder
from porgysim.models import ModelConfig, run_simulation


def star(leaves=3):
    b = GraphBuilder()
    center = b.add_node({"label": "n1"})
    b.add_port(center, {"name": "In"})
    out = b.add_port(center, {"name": "Out"})
    for i in range(2, leaves + 2):
        n = b.add_node({"label": f"n{i}"})
        nin = b.add_port(n, {"name": "In"})
        b.add_port(n, {"name": "Out"})
        b.add_edge(out, nin)
    return b.build()


def main() -> int:
    graph = star()
    config = ModelConfig(model="ic", seeds=("n1",), p="const:1.0",
                         rng_seed=42, max_rounds=10)
    result = run_simulation(graph, config)
    tree = result.tree

    print("full derivation (one line per rule application):")
    for edge in tree.edges:
        print(f"  state {edge.parent} -> {edge.child}  {edge.rule:<16} "
              f"image={edge.summary['image']}")

    print("\nsimplified branch (one state per propagation round):")
    print(" ", " -> ".join(str(s) for s in tree.branch_states(result.leaf)))

    series = tree.compute_metrics(result.leaf)
    print("\nmetrics:")
    print(tree.export_metrics_csv(result.leaf).decode())
    print("node n2 through time:")
    root = tree.state(0)
    n2 = next(nid for nid, n in root.nodes.items() if n.record.get("label") == "n2")
    for snap in tree.trace_element(n2):
        marker = "*" if snap.changed else " "
        print(f" {marker} state {snap.state}: {snap.record}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
