// Wire types mirroring the simulation service's JSON payloads.

export interface PropertyValue {
  kind: "bool" | "int" | "real" | "text" | "ref";
  v: boolean | number | string;
}

export type PropertyMap = Record<string, PropertyValue>;

export interface GraphNode {
  id: number;
  properties: PropertyMap;
}

export interface GraphPort {
  id: number;
  owner: number;
  properties: PropertyMap;
}

export interface GraphEdge {
  id: number;
  ends: [number, number];
  properties: PropertyMap;
}

export interface GraphState {
  nodes: GraphNode[];
  ports: GraphPort[];
  edges: GraphEdge[];
  position?: number[];
  banned?: number[];
}

export interface TreeStateRef {
  id: number;
  parent: number | null;
}

export interface TreeEdgeRef {
  parent: number;
  child: number;
  rule: string;
  app: number;
  group: number;
}

export interface TreeGroupRef {
  id: number;
  anchor: number;
  label: string | null;
  closed: boolean;
}

export interface TreeSkeleton {
  root: number;
  states: TreeStateRef[];
  edges: TreeEdgeRef[];
  groups: TreeGroupRef[];
  cursor?: number;
}

export interface MetricSeriesDto {
  leaf: number;
  label: string;
  steps: number[];
  active: number[];
  visited: number[];
  efficiency: (number | null)[];
  states: number[];
}

export type EventMessage =
  | { type: "applied"; payload: { rule: string; parent: number; child: number;
      image: number[]; group: number } }
  | { type: "selection"; payload: { elements: number[] } }
  | { type: "branch"; payload: { cursor: number } };

export function boolProp(props: PropertyMap, name: string): boolean {
  const value = props[name];
  return value !== undefined && value.kind === "bool" && value.v === true;
}

export function textProp(props: PropertyMap, name: string): string | null {
  const value = props[name];
  return value !== undefined && value.kind === "text" ? (value.v as string) : null;
}
