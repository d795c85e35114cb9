// Event channel + the shared view state every panel renders from.
//
// The explorer never mutates simulation state locally: a user gesture
// publishes an intent (selection) or calls the HTTP API, and panels update
// only when the resulting event arrives back on the channel. That keeps
// every connected view (including other browsers) in lockstep.

import type { EventMessage } from "./types.js";

export interface EventChannel {
  publishSelection(elements: number[]): void;
  subscribe(listener: (message: EventMessage) => void): () => void;
}

export class WebSocketChannel implements EventChannel {
  private listeners = new Set<(message: EventMessage) => void>();
  private socket: WebSocket;

  constructor(url: string) {
    this.socket = new WebSocket(url);
    this.socket.onmessage = (raw) => {
      const message = JSON.parse(raw.data as string) as EventMessage;
      for (const listener of this.listeners) listener(message);
    };
  }

  publishSelection(elements: number[]): void {
    this.socket.send(JSON.stringify({ type: "selection", payload: { elements } }));
  }

  subscribe(listener: (message: EventMessage) => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }
}

export interface AppliedInfo {
  rule: string;
  parent: number;
  child: number;
  image: number[];
  group: number;
}

/** Selection + cursor shared by all panels; updated only from the channel. */
export class SharedState {
  selection: ReadonlySet<number> = new Set();
  cursor: number;
  lastApplied: AppliedInfo | null = null;
  private listeners = new Set<() => void>();

  constructor(channel: EventChannel, initialCursor = 0) {
    this.cursor = initialCursor;
    channel.subscribe((message) => {
      if (message.type === "selection") {
        this.selection = new Set(message.payload.elements);
      } else if (message.type === "branch") {
        this.cursor = message.payload.cursor;
      } else if (message.type === "applied") {
        this.lastApplied = message.payload;
        this.cursor = message.payload.child;
      }
      this.emit();
    });
  }

  isSelected(id: number): boolean {
    return this.selection.has(id);
  }

  onChange(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }
}
