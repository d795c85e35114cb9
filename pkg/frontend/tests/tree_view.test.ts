// Acceptance: a 3-step, 12-application branch renders 3 nodes in simplified
// mode and 12 in full mode.

import { describe, expect, it } from "vitest";

import { SharedState } from "../src/events.js";
import { DerivationTreeView } from "../src/views/tree.js";
import { MockEventServer, apiWithRecorder, threeStepSkeleton } from "./helpers.js";

function makeView() {
  const server = new MockEventServer();
  const shared = new SharedState(server);
  const { api, calls } = apiWithRecorder(() => ({ payload: { cursor: 4 } }));
  return { view: new DerivationTreeView(shared, api, "s1"), calls, server, shared };
}

describe("derivation tree view", () => {
  it("renders 12 nodes in full mode and 3 in simplified mode", () => {
    const { view } = makeView();
    const skeleton = threeStepSkeleton();
    expect(view.render(skeleton, "full").nodes).toHaveLength(12);
    const simplified = view.render(skeleton, "simplified");
    expect(simplified.nodes).toHaveLength(3);
    expect(simplified.nodes.map((n) => n.state)).toEqual([4, 8, 12]);
    expect(simplified.nodes.map((n) => n.applications)).toEqual([4, 4, 4]);
  });

  it("chains simplified nodes from the root through step finals", () => {
    const { view } = makeView();
    const simplified = view.render(threeStepSkeleton(), "simplified");
    expect(simplified.edges).toEqual([
      { from: 0, to: 4, label: "step 1" },
      { from: 4, to: 8, label: "step 2" },
      { from: 8, to: 12, label: "step 3" },
    ]);
  });

  it("labels branch depth in propagation steps (shorter branch first)", () => {
    const { view } = makeView();
    const skeleton = threeStepSkeleton();
    // second branch forking from state 4: one extra strategy execution
    skeleton.states.push({ id: 99, parent: 4 });
    skeleton.edges.push({ parent: 4, child: 99, rule: "alt", app: 13, group: 9 });
    skeleton.groups.push({ id: 9, anchor: 4, label: null, closed: true });
    const depths = view.render(skeleton, "full").branchDepths;
    expect(depths).toEqual([
      { leaf: 99, steps: 2 },  // step 1 + the alternative execution
      { leaf: 12, steps: 3 },
    ]);
  });

  it("marks the cursor state", async () => {
    const { view, server } = makeView();
    server.emitBranch(8);
    await server.roundTrip();
    const simplified = view.render(threeStepSkeleton(), "simplified");
    expect(simplified.nodes.find((n) => n.isCursor)?.state).toBe(8);
  });

  it("branch-here goes through the service API", async () => {
    const { view, calls } = makeView();
    await view.branchHere(4);
    expect(calls).toEqual([{
      url: "http://svc/sessions/s1/branch",
      method: "POST",
      body: { state: 4 },
    }]);
  });
});
