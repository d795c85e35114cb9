// State inspector: a flat element table for the cursor state, with the
// shared selection highlighted (the tree-side half of linked selection).

import type { SharedState } from "../events.js";
import type { GraphState, PropertyMap } from "../types.js";

export interface InspectorRow {
  id: number;
  kind: "node" | "port" | "edge";
  summary: string;
  highlighted: boolean;
}

function describe(props: PropertyMap): string {
  return Object.entries(props)
    .map(([name, value]) => `${name}=${value.v}`)
    .join(", ");
}

export class StateInspector {
  constructor(private shared: SharedState) {}

  render(state: GraphState): InspectorRow[] {
    const rows: InspectorRow[] = [];
    for (const node of state.nodes) {
      rows.push({ id: node.id, kind: "node", summary: describe(node.properties),
                  highlighted: this.shared.isSelected(node.id) });
    }
    for (const port of state.ports) {
      rows.push({ id: port.id, kind: "port",
                  summary: `owner=${port.owner} ${describe(port.properties)}`,
                  highlighted: this.shared.isSelected(port.id) });
    }
    for (const edge of state.edges) {
      rows.push({ id: edge.id, kind: "edge",
                  summary: `${edge.ends[0]}--${edge.ends[1]} ${describe(edge.properties)}`,
                  highlighted: this.shared.isSelected(edge.id) });
    }
    rows.sort((a, b) => a.id - b.id);
    return rows;
  }

  highlightedIds(state: GraphState): number[] {
    return this.render(state).filter((row) => row.highlighted).map((row) => row.id);
  }
}
