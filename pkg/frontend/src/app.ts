// Browser wiring: builds the four panels against a live service session and
// repaints them from the shared state. Rendering is deliberately plain DOM;
// all interesting logic lives in the render models, which are unit-tested.

import { ApiClient, HttpFn } from "./api.js";
import { SharedState, WebSocketChannel } from "./events.js";
import { MetricsChart } from "./views/metrics.js";
import { NetworkView } from "./views/network.js";
import { StateInspector } from "./views/inspector.js";
import { StrategyEditor } from "./views/strategy.js";
import { DerivationTreeView, TreeMode } from "./views/tree.js";

export function browserHttp(): HttpFn {
  return async (url, options) => {
    const response = await fetch(url, {
      method: options.method,
      headers: { "content-type": "application/json" },
      body: options.body,
    });
    return { status: response.status, json: () => response.json() };
  };
}

export interface ExplorerOptions {
  baseUrl: string;
  session: string;
  root: HTMLElement;
  colorblind?: boolean;
}

export class Explorer {
  readonly api: ApiClient;
  readonly channel: WebSocketChannel;
  readonly shared: SharedState;
  readonly network: NetworkView;
  readonly tree: DerivationTreeView;
  readonly metrics: MetricsChart;
  readonly inspector: StateInspector;
  readonly editor: StrategyEditor;
  treeMode: TreeMode = "simplified";

  constructor(private options: ExplorerOptions) {
    this.api = new ApiClient(options.baseUrl, browserHttp());
    const wsBase = options.baseUrl.replace(/^http/, "ws");
    this.channel = new WebSocketChannel(`${wsBase}/sessions/${options.session}/events`);
    this.shared = new SharedState(this.channel);
    this.network = new NetworkView(this.shared, this.channel,
                                   { colorblind: options.colorblind });
    this.tree = new DerivationTreeView(this.shared, this.api, options.session);
    this.metrics = new MetricsChart(this.shared, this.api, options.session);
    this.inspector = new StateInspector(this.shared);
    this.editor = new StrategyEditor(this.shared, this.api, options.session);
    this.shared.onChange(() => void this.repaint());
  }

  async repaint(): Promise<void> {
    const session = this.options.session;
    const [state, skeleton, series] = await Promise.all([
      this.api.state(session, this.shared.cursor),
      this.api.tree(session),
      this.api.metrics(session),
    ]);
    const root = this.options.root;
    root.replaceChildren();
    root.appendChild(this.renderNetworkPanel(this.network.render(state)));
    root.appendChild(this.renderTreePanel(this.tree.render(skeleton, this.treeMode)));
    root.appendChild(this.renderMetricsPanel(this.metrics.render([series])));
    root.appendChild(this.renderInspectorPanel(this.inspector.render(state)));
  }

  private panel(title: string): [HTMLElement, HTMLElement] {
    const box = document.createElement("section");
    const heading = document.createElement("h3");
    heading.textContent = title;
    box.appendChild(heading);
    const body = document.createElement("div");
    box.appendChild(body);
    return [box, body];
  }

  private renderNetworkPanel(model: ReturnType<NetworkView["render"]>): HTMLElement {
    const [box, body] = this.panel(`network (${model.totalNodes} nodes)`);
    if (model.mode === "list") {
      const list = document.createElement("ol");
      for (const node of model.nodes) {
        const item = document.createElement("li");
        item.textContent = `${node.label} [${node.status}] degree ${node.degree}`;
        item.style.color = node.color;
        item.onclick = () => this.network.clickNode(node.id);
        list.appendChild(item);
      }
      body.appendChild(list);
      return box;
    }
    const svgNs = "http://www.w3.org/2000/svg";
    const svg = document.createElementNS(svgNs, "svg");
    svg.setAttribute("viewBox", "0 0 600 400");
    const place = new Map<number, [number, number]>();
    model.nodes.forEach((node, index) => {
      const angle = (2 * Math.PI * index) / model.nodes.length;
      place.set(node.id, [300 + 240 * Math.cos(angle), 200 + 170 * Math.sin(angle)]);
    });
    for (const edge of model.edges) {
      const line = document.createElementNS(svgNs, "line");
      const [x1, y1] = place.get(edge.source)!;
      const [x2, y2] = place.get(edge.target)!;
      line.setAttribute("x1", String(x1));
      line.setAttribute("y1", String(y1));
      line.setAttribute("x2", String(x2));
      line.setAttribute("y2", String(y2));
      line.setAttribute("stroke", edge.selected ? "blue" : "#999");
      svg.appendChild(line);
    }
    for (const node of model.nodes) {
      const circle = document.createElementNS(svgNs, "circle");
      const [x, y] = place.get(node.id)!;
      circle.setAttribute("cx", String(x));
      circle.setAttribute("cy", String(y));
      circle.setAttribute("r", node.selected ? "9" : "6");
      circle.setAttribute("fill", node.color);
      circle.addEventListener("click", () => this.network.clickNode(node.id));
      svg.appendChild(circle);
    }
    body.appendChild(svg);
    return box;
  }

  private renderTreePanel(model: ReturnType<DerivationTreeView["render"]>): HTMLElement {
    const [box, body] = this.panel(`derivation tree (${model.mode})`);
    const list = document.createElement("ul");
    for (const node of model.nodes) {
      const item = document.createElement("li");
      item.textContent = node.rule === null
        ? `state ${node.state} (${node.applications} applications)`
        : `state ${node.state} via ${node.rule}`;
      if (node.isCursor) item.style.fontWeight = "bold";
      const jump = document.createElement("button");
      jump.textContent = "branch here";
      jump.onclick = () => void this.tree.branchHere(node.state);
      item.appendChild(jump);
      list.appendChild(item);
    }
    body.appendChild(list);
    return box;
  }

  private renderMetricsPanel(model: ReturnType<MetricsChart["render"]>): HTMLElement {
    const [box, body] = this.panel("metrics");
    if (model.emptyMessage !== null) {
      body.textContent = model.emptyMessage;
      return box;
    }
    const table = document.createElement("table");
    for (const series of model.series) {
      for (const point of series.points) {
        const row = document.createElement("tr");
        row.onmouseenter = () => void this.metrics.hoverStep(series, point.step);
        for (const cell of [series.label, point.step, point.active, point.visited]) {
          const td = document.createElement("td");
          td.textContent = String(cell);
          row.appendChild(td);
        }
        if (model.cursorStep !== null && point.step === model.cursorStep.step) {
          row.style.fontWeight = "bold";
        }
        table.appendChild(row);
      }
    }
    body.appendChild(table);
    return box;
  }

  private renderInspectorPanel(rows: ReturnType<StateInspector["render"]>): HTMLElement {
    const [box, body] = this.panel("state inspector");
    const list = document.createElement("ul");
    for (const row of rows) {
      const item = document.createElement("li");
      item.textContent = `${row.kind} ${row.id}: ${row.summary}`;
      if (row.highlighted) item.style.background = "#cce";
      list.appendChild(item);
    }
    body.appendChild(list);
    return box;
  }
}
