// Node-link view of one graph state, coloured by propagation status.

import type { EventChannel, SharedState } from "../events.js";
import type { GraphState } from "../types.js";
import { boolProp, textProp } from "../types.js";

export type NodeStatus = "active" | "visited" | "inactive";

export interface Palette {
  active: string;
  visited: string;
  inactive: string;
  selection: string;
}

export const DEFAULT_PALETTE: Palette = {
  active: "green",
  visited: "purple",
  inactive: "red",
  selection: "blue",
};

// Okabe-Ito hues, distinguishable under the common colour-vision deficiencies.
export const COLORBLIND_PALETTE: Palette = {
  active: "#009E73",
  visited: "#0072B2",
  inactive: "#E69F00",
  selection: "#CC79A7",
};

export function nodeStatus(node: { properties: GraphState["nodes"][0]["properties"] }): NodeStatus {
  if (boolProp(node.properties, "active")) return "active";
  if (boolProp(node.properties, "visited")) return "visited";
  return "inactive";
}

export interface NetworkNodeModel {
  id: number;
  label: string;
  status: NodeStatus;
  color: string;
  selected: boolean;
  degree: number;
}

export interface NetworkEdgeModel {
  id: number;
  source: number;
  target: number;
  selected: boolean;
}

export interface NetworkRenderModel {
  mode: "graph" | "list";
  nodes: NetworkNodeModel[];
  edges: NetworkEdgeModel[];
  totalNodes: number;
}

export interface NetworkViewOptions {
  nodeBudget?: number;
  colorblind?: boolean;
}

export class NetworkView {
  nodeBudget: number;
  palette: Palette;

  constructor(private shared: SharedState, private channel: EventChannel,
              options: NetworkViewOptions = {}) {
    this.nodeBudget = options.nodeBudget ?? 2000;
    this.palette = options.colorblind ? COLORBLIND_PALETTE : DEFAULT_PALETTE;
  }

  setColorblind(on: boolean): void {
    this.palette = on ? COLORBLIND_PALETTE : DEFAULT_PALETTE;
  }

  /** Toggle a node in the shared selection; the change round-trips through
   *  the event channel before any panel shows it. */
  clickNode(id: number): void {
    const next = new Set(this.shared.selection);
    if (next.has(id)) next.delete(id);
    else next.add(id);
    this.channel.publishSelection([...next].sort((a, b) => a - b));
  }

  render(state: GraphState): NetworkRenderModel {
    const owner = new Map<number, number>();
    for (const port of state.ports) owner.set(port.id, port.owner);
    const degree = new Map<number, number>();
    for (const node of state.nodes) degree.set(node.id, 0);
    const edges: NetworkEdgeModel[] = state.edges.map((edge) => {
      const source = owner.get(edge.ends[0])!;
      const target = owner.get(edge.ends[1])!;
      degree.set(source, (degree.get(source) ?? 0) + 1);
      degree.set(target, (degree.get(target) ?? 0) + 1);
      return { id: edge.id, source, target, selected: this.shared.isSelected(edge.id) };
    });
    let nodes: NetworkNodeModel[] = state.nodes.map((node) => {
      const status = nodeStatus(node);
      return {
        id: node.id,
        label: textProp(node.properties, "label") ?? `#${node.id}`,
        status,
        color: this.palette[status],
        selected: this.shared.isSelected(node.id),
        degree: degree.get(node.id) ?? 0,
      };
    });
    const totalNodes = nodes.length;
    if (totalNodes > this.nodeBudget) {
      // beyond the render budget a degree-ranked list replaces the node-link view
      nodes = [...nodes].sort((a, b) => b.degree - a.degree || a.id - b.id)
        .slice(0, this.nodeBudget);
      return { mode: "list", nodes, edges: [], totalNodes };
    }
    return { mode: "graph", nodes, edges, totalNodes };
  }
}
