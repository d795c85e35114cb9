import { describe, expect, it } from "vitest";

import { SharedState } from "../src/events.js";
import { StrategyEditor } from "../src/views/strategy.js";
import { MockEventServer, apiWithRecorder } from "./helpers.js";

const IC_LISTING = [
  "repeat(IC trial d2s);",
  "repeat(IC trial s2d);",
  'setPos(Property(CrtGraph,Node,sigma>="1"));',
  "repeat(IC activate)",
].join("\n");

function makeEditor(respond?: Parameters<typeof apiWithRecorder>[0]) {
  const server = new MockEventServer();
  const shared = new SharedState(server);
  const { api, calls } = apiWithRecorder(respond);
  return { editor: new StrategyEditor(shared, api, "s1"), calls, server, shared };
}

describe("strategy editor", () => {
  it("validates the built-in cascade listing", async () => {
    const { editor, calls } = makeEditor(() =>
      ({ payload: { strategy: { instructions: 4 } } }));
    editor.setText(IC_LISTING);
    expect(await editor.validate()).toBe(true);
    expect(editor.instructions).toBe(4);
    expect(editor.error).toBeNull();
    expect(calls[0]).toEqual({
      url: "http://svc/validate",
      method: "POST",
      body: { strategy: IC_LISTING },
    });
  });

  it("surfaces parse errors inline with line and column", async () => {
    const { editor } = makeEditor(() => ({
      status: 400,
      payload: { detail: { code: "PARSE", message: "missing ')' at line 1, column 8",
                           line: 1, column: 8 } },
    }));
    editor.setText("repeat(");
    expect(await editor.validate()).toBe(false);
    expect(editor.error?.line).toBe(1);
    expect(editor.error?.column).toBe(8);
    editor.setText("repeat(IC activate)");
    expect(editor.error).toBeNull(); // editing clears the stale error
  });

  it("runs rounds through the API", async () => {
    const { editor, calls } = makeEditor(() =>
      ({ payload: { rounds: [{}], cursor: 3 } }));
    await editor.runRounds(2);
    expect(calls[0].body).toEqual({ n: 2 });
  });

  it("applies a single rule at the selected match", async () => {
    const { editor, calls, server } = makeEditor(() =>
      ({ payload: { applied: true, child: 5 } }));
    server.publishSelection([7]);
    await server.roundTrip();
    await editor.applyRule("IC activate");
    expect(calls[0].body).toEqual({ rule: "IC activate", match: [7] });
  });

  it("falls back to a random match with an empty selection", async () => {
    const { editor, calls } = makeEditor(() => ({ payload: { applied: true } }));
    await editor.applyRule("IC activate");
    expect(calls[0].body).toEqual({ rule: "IC activate", match: "random" });
  });
});
