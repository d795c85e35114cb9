// Derivation-tree view: every application, or one node per propagation step.

import type { ApiClient } from "../api.js";
import type { SharedState } from "../events.js";
import type { TreeSkeleton } from "../types.js";

export type TreeMode = "full" | "simplified";

export interface TreeViewNode {
  state: number;
  rule: string | null;
  group: number | null;
  isCursor: boolean;
  applications: number; // rule applications this node stands for
}

export interface TreeViewEdge {
  from: number;
  to: number;
  label: string;
}

export interface TreeRenderModel {
  root: number;
  mode: TreeMode;
  nodes: TreeViewNode[];
  edges: TreeViewEdge[];
  /** leaf state -> branch length in propagation steps (shortest first). */
  branchDepths: { leaf: number; steps: number }[];
}

export class DerivationTreeView {
  constructor(private shared: SharedState, private api: ApiClient,
              private session: string) {}

  /** The what-if loop: fork exploration from any committed state. */
  branchHere(state: number): Promise<{ cursor: number }> {
    return this.api.branch(this.session, state);
  }

  render(skeleton: TreeSkeleton, mode: TreeMode): TreeRenderModel {
    if (mode === "full") {
      return {
        root: skeleton.root,
        mode,
        nodes: skeleton.edges.map((edge) => ({
          state: edge.child,
          rule: edge.rule,
          group: edge.group,
          isCursor: this.shared.cursor === edge.child,
          applications: 1,
        })),
        edges: skeleton.edges.map((edge) => ({
          from: edge.parent, to: edge.child, label: edge.rule,
        })),
        branchDepths: this.branchDepths(skeleton),
      };
    }
    // simplified: collapse each strategy execution to its final state
    const groups = new Map<number, { first: number; last: number; count: number }>();
    const order: number[] = [];
    for (const edge of skeleton.edges) {
      const entry = groups.get(edge.group);
      if (entry === undefined) {
        groups.set(edge.group, { first: edge.parent, last: edge.child, count: 1 });
        order.push(edge.group);
      } else {
        entry.last = edge.child;
        entry.count += 1;
      }
    }
    const finalOf = new Map<number, number>(); // group -> final state
    for (const gid of order) finalOf.set(gid, groups.get(gid)!.last);
    const groupOfState = new Map<number, number>();
    for (const edge of skeleton.edges) groupOfState.set(edge.child, edge.group);
    const nodes: TreeViewNode[] = [];
    const edges: TreeViewEdge[] = [];
    for (const gid of order) {
      const info = groups.get(gid)!;
      nodes.push({
        state: info.last,
        rule: null,
        group: gid,
        isCursor: this.shared.cursor === info.last,
        applications: info.count,
      });
      const parentGroup = groupOfState.get(info.first);
      const from = parentGroup === undefined ? skeleton.root
        : finalOf.get(parentGroup)!;
      edges.push({ from, to: info.last, label: `step ${gid}` });
    }
    return { root: skeleton.root, mode, nodes, edges,
             branchDepths: this.branchDepths(skeleton) };
  }

  private branchDepths(skeleton: TreeSkeleton): { leaf: number; steps: number }[] {
    const parents = new Map<number, number>();
    const groupOfState = new Map<number, number>();
    for (const edge of skeleton.edges) {
      parents.set(edge.child, edge.parent);
      groupOfState.set(edge.child, edge.group);
    }
    const hasChild = new Set(skeleton.edges.map((e) => e.parent));
    const leaves = skeleton.states.map((s) => s.id)
      .filter((id) => !hasChild.has(id));
    const depths = leaves.map((leaf) => {
      const seen = new Set<number>();
      let current: number | undefined = leaf;
      while (current !== undefined && groupOfState.has(current)) {
        seen.add(groupOfState.get(current)!);
        current = parents.get(current);
      }
      return { leaf, steps: seen.size };
    });
    depths.sort((a, b) => a.steps - b.steps || a.leaf - b.leaf);
    return depths;
  }
}
