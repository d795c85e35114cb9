import { describe, expect, it } from "vitest";

import { SharedState } from "../src/events.js";
import { COLORBLIND_PALETTE, DEFAULT_PALETTE, NetworkView } from "../src/views/network.js";
import { MockEventServer, sampleState } from "./helpers.js";

function makeView(options = {}) {
  const server = new MockEventServer();
  const shared = new SharedState(server);
  return { view: new NetworkView(shared, server, options), server, shared };
}

describe("network view", () => {
  it("colours nodes by status: 1 active, 3 visited, 5 inactive", () => {
    const { view } = makeView();
    const model = view.render(sampleState());
    const byColor = new Map<string, number>();
    for (const node of model.nodes) {
      byColor.set(node.color, (byColor.get(node.color) ?? 0) + 1);
    }
    expect(byColor.get(DEFAULT_PALETTE.active)).toBe(1);
    expect(byColor.get(DEFAULT_PALETTE.visited)).toBe(3);
    expect(byColor.get(DEFAULT_PALETTE.inactive)).toBe(5);
    expect(model.mode).toBe("graph");
    expect(model.edges).toHaveLength(8);
  });

  it("active wins over visited in the colour mapping", () => {
    const { view } = makeView();
    const state = sampleState();
    state.nodes[0].properties.visited = { kind: "bool", v: true };
    const model = view.render(state);
    expect(model.nodes.find((n) => n.id === 1)?.color).toBe(DEFAULT_PALETTE.active);
  });

  it("falls back to a degree-ranked list beyond the node budget", () => {
    const { view } = makeView({ nodeBudget: 4 });
    const model = view.render(sampleState());
    expect(model.mode).toBe("list");
    expect(model.totalNodes).toBe(9);
    expect(model.nodes).toHaveLength(4);
    // the star centre has the highest degree and leads the list
    expect(model.nodes[0].id).toBe(1);
    expect(model.edges).toHaveLength(0);
  });

  it("supports the colour-blind palette toggle", () => {
    const { view } = makeView();
    view.setColorblind(true);
    const model = view.render(sampleState());
    expect(model.nodes.find((n) => n.id === 1)?.color)
      .toBe(COLORBLIND_PALETTE.active);
    view.setColorblind(false);
    expect(view.render(sampleState()).nodes.find((n) => n.id === 1)?.color)
      .toBe(DEFAULT_PALETTE.active);
  });

  it("click publishes the toggled selection over the channel", () => {
    const { view, server } = makeView();
    view.clickNode(2);
    expect(server.published).toEqual([
      { type: "selection", payload: { elements: [2] } },
    ]);
  });
});
