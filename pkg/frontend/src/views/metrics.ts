// Metric chart: per-step active/visited counts, several runs overlaid.

import type { ApiClient } from "../api.js";
import type { SharedState } from "../events.js";
import type { MetricSeriesDto } from "../types.js";

export interface ChartPoint {
  step: number;
  active: number;
  visited: number;
  efficiency: number | null;
  state: number;
}

export interface ChartSeries {
  label: string;
  leaf: number;
  points: ChartPoint[];
}

export interface ChartModel {
  series: ChartSeries[];
  maxStep: number;
  maxCount: number;
  emptyMessage: string | null;
  /** step of the series point matching the shared cursor, if any */
  cursorStep: { series: number; step: number } | null;
}

export class MetricsChart {
  constructor(private shared: SharedState, private api: ApiClient,
              private session: string) {}

  render(all: MetricSeriesDto[]): ChartModel {
    if (all.length === 0 || all.every((s) => s.steps.length === 0)) {
      return { series: [], maxStep: 0, maxCount: 0,
               emptyMessage: "no metric series yet", cursorStep: null };
    }
    const series: ChartSeries[] = all.map((dto, index) => ({
      label: dto.label || `run ${index + 1}`,
      leaf: dto.leaf,
      points: dto.steps.map((step, t) => ({
        step,
        active: dto.active[t],
        visited: dto.visited[t],
        efficiency: dto.efficiency[t],
        state: dto.states[t],
      })),
    }));
    let cursorStep: ChartModel["cursorStep"] = null;
    series.forEach((one, seriesIndex) => {
      for (const point of one.points) {
        if (point.state === this.shared.cursor) {
          cursorStep = { series: seriesIndex, step: point.step };
        }
      }
    });
    return {
      series,
      maxStep: Math.max(...series.map((s) => s.points.length - 1)),
      maxCount: Math.max(...series.flatMap((s) => s.points.map((p) =>
        Math.max(p.active, p.visited)))),
      emptyMessage: null,
      cursorStep,
    };
  }

  /** Hovering a step moves the shared cursor to that step's state; the move
   *  flows through the service so every panel follows. */
  hoverStep(series: ChartSeries, step: number): Promise<{ cursor: number }> {
    const point = series.points.find((p) => p.step === step);
    if (point === undefined) {
      return Promise.resolve({ cursor: this.shared.cursor });
    }
    return this.api.branch(this.session, point.state);
  }

  /** Element ids to emphasise in tooltips (the shared linked selection). */
  highlightedElements(): number[] {
    return [...this.shared.selection].sort((a, b) => a - b);
  }
}
