// Thin typed client for the simulation service. The HTTP transport is
// injectable so tests can run against a recorder instead of a server.

import type { GraphState, MetricSeriesDto, TreeSkeleton } from "./types.js";

export interface HttpResponse {
  status: number;
  json(): Promise<unknown>;
}

export type HttpFn = (url: string, options: { method: string; body?: string })
  => Promise<HttpResponse>;

export interface ValidationError {
  code: string;
  message: string;
  line?: number | null;
  column?: number | null;
}

export class ApiError extends Error {
  constructor(public status: number, public detail: unknown) {
    super(`service error ${status}: ${JSON.stringify(detail)}`);
  }
}

export class ApiClient {
  constructor(private base: string, private http: HttpFn) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.http(this.base + path, {
      method,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json();
    if (response.status >= 400) {
      throw new ApiError(response.status, (payload as { detail?: unknown }).detail);
    }
    return payload as T;
  }

  createSession(body: Record<string, unknown>): Promise<{ session: string; root: number }> {
    return this.call("POST", "/sessions", body);
  }

  runRounds(session: string, n: number): Promise<{ rounds: unknown[]; cursor: number }> {
    return this.call("POST", `/sessions/${session}/rounds`, { n });
  }

  apply(session: string, rule: string, match: number[] | "random"):
      Promise<{ applied: boolean; child?: number; image?: number[] }> {
    return this.call("POST", `/sessions/${session}/apply`, { rule, match });
  }

  setPos(session: string, filter: string): Promise<{ position: number[] }> {
    return this.call("POST", `/sessions/${session}/setpos`, { filter });
  }

  branch(session: string, state: number): Promise<{ cursor: number }> {
    return this.call("POST", `/sessions/${session}/branch`, { state });
  }

  select(session: string, elements: number[]): Promise<{ elements: number[] }> {
    return this.call("POST", `/sessions/${session}/selection`, { elements });
  }

  tree(session: string): Promise<TreeSkeleton> {
    return this.call("GET", `/sessions/${session}/tree`);
  }

  state(session: string, stateId: number): Promise<GraphState> {
    return this.call("GET", `/sessions/${session}/states/${stateId}`);
  }

  metrics(session: string, leaf?: number): Promise<MetricSeriesDto> {
    const query = leaf === undefined ? "" : `?leaf=${leaf}`;
    return this.call("GET", `/sessions/${session}/metrics${query}`);
  }

  traceElement(session: string, elementId: number):
      Promise<{ element: number; snapshots: unknown[] }> {
    return this.call("GET", `/sessions/${session}/trace/${elementId}`);
  }

  validateStrategy(text: string): Promise<{ strategy: { instructions: number } }> {
    return this.call("POST", "/validate", { strategy: text });
  }
}
