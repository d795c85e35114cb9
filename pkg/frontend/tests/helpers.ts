// Shared test doubles: an in-memory event server that echoes published
// selections to every subscriber on the next microtask (one round-trip),
// and an HTTP recorder standing in for the service.

import { ApiClient, HttpFn } from "../src/api.js";
import type { EventChannel } from "../src/events.js";
import type { EventMessage, GraphState } from "../src/types.js";

export class MockEventServer implements EventChannel {
  published: EventMessage[] = [];
  private listeners = new Set<(message: EventMessage) => void>();
  private pending: Promise<void> = Promise.resolve();

  publishSelection(elements: number[]): void {
    this.queue({ type: "selection", payload: { elements } });
  }

  /** Server-initiated events (what POST /branch or /rounds would emit). */
  emitBranch(cursor: number): void {
    this.queue({ type: "branch", payload: { cursor } });
  }

  emitApplied(payload: { rule: string; parent: number; child: number;
                         image: number[]; group: number }): void {
    this.queue({ type: "applied", payload });
  }

  subscribe(listener: (message: EventMessage) => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  /** Resolves once every queued message has been delivered. */
  roundTrip(): Promise<void> {
    return this.pending;
  }

  private queue(message: EventMessage): void {
    this.published.push(message);
    this.pending = this.pending.then(async () => {
      await Promise.resolve();
      for (const listener of this.listeners) listener(message);
    });
  }
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

export function httpRecorder(
  respond: (url: string, method: string, body: unknown) =>
    { status?: number; payload: unknown } = () => ({ payload: {} }),
): { http: HttpFn; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const http: HttpFn = async (url, options) => {
    const body = options.body === undefined ? undefined : JSON.parse(options.body);
    calls.push({ url, method: options.method, body });
    const result = respond(url, options.method, body);
    return { status: result.status ?? 200, json: async () => result.payload };
  };
  return { http, calls };
}

export function apiWithRecorder(
  respond?: Parameters<typeof httpRecorder>[0],
): { api: ApiClient; calls: RecordedCall[] } {
  const { http, calls } = httpRecorder(respond);
  return { api: new ApiClient("http://svc", http), calls };
}

const bool = (v: boolean) => ({ kind: "bool" as const, v });
const text = (v: string) => ({ kind: "text" as const, v });

/** Star graph: node 1 active; 2, 3, 4 visited; 5..9 untouched. */
export function sampleState(): GraphState {
  const nodes = [];
  const ports = [];
  const edges = [];
  for (let i = 1; i <= 9; i += 1) {
    nodes.push({
      id: i,
      properties: {
        label: text(`n${i}`),
        active: bool(i === 1),
        visited: bool(i >= 2 && i <= 4),
      },
    });
    ports.push({ id: 100 + 2 * i, owner: i, properties: { name: text("In") } });
    ports.push({ id: 101 + 2 * i, owner: i, properties: { name: text("Out") } });
  }
  for (let i = 2; i <= 9; i += 1) {
    edges.push({
      id: 300 + i,
      ends: [103, 100 + 2 * i] as [number, number], // centre Out -> i In
      properties: { marked: bool(false) },
    });
  }
  return { nodes, ports, edges };
}

/** A linear branch: 3 strategy executions of 4 applications each. */
export function threeStepSkeleton() {
  const states = [{ id: 0, parent: null as number | null }];
  const edges = [];
  let app = 0;
  for (let group = 1; group <= 3; group += 1) {
    for (let k = 0; k < 4; k += 1) {
      app += 1;
      states.push({ id: app, parent: app - 1 });
      edges.push({ parent: app - 1, child: app, rule: `rule ${group}`,
                   app, group });
    }
  }
  return {
    root: 0,
    states,
    edges,
    groups: [1, 2, 3].map((id) => ({ id, anchor: (id - 1) * 4, label: null,
                                     closed: true })),
  };
}
