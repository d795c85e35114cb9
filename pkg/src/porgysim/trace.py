"""Append-only derivation tree of rewriting states.

Every rule application commits one edge (parent state -> child state) to
the tree; a committed state is never mutated. Edges are grouped into
propagation steps, one group per strategy execution, so a branch can be
read either application-by-application or round-by-round. Storage is
delta-based: a child records only the elements that differ from its
parent, and full states are rebuilt on demand (all of them are cached by
default; pass ``keep_all=False`` to keep only round boundaries).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass

from .errors import TraceError
from .graph import (Edge, GraphDelta, IdAllocator, Node, Port, PortGraph,
                    diff_graphs)
from . import graphio


@dataclass(frozen=True, slots=True)
class TreeEdge:
    parent: int
    child: int
    rule: str
    summary: dict
    app_index: int
    step_group: int


@dataclass(slots=True)
class StepGroup:
    id: int
    anchor: int            # state the strategy execution started from
    label: str | None = None
    closed: bool = False


@dataclass(frozen=True, slots=True)
class MetricSeries:
    """Per-step counts along one branch; index 0 is the initial state."""

    steps: tuple[int, ...]
    active: tuple[int, ...]
    visited: tuple[int, ...]
    efficiency: tuple[float | None, ...]
    state_ids: tuple[int, ...]
    leaf: int
    label: str = ""


@dataclass(frozen=True, slots=True)
class ElementSnapshot:
    state: int
    record: object  # Record
    changed: bool


@dataclass(frozen=True, slots=True)
class StepView:
    group: int
    edges: tuple[TreeEdge, ...]
    final_state: int
    complete: bool


class DerivationTree:
    def __init__(self, root: PortGraph, *, keep_all: bool = True):
        self.root_id = 0
        self._parents: dict[int, int] = {}
        self._deltas: dict[int, GraphDelta] = {}
        self._cache: dict[int, PortGraph] = {0: root}
        self._order: list[int] = [0]
        self.edges: list[TreeEdge] = []
        self._edges_by_child: dict[int, TreeEdge] = {}
        self.groups: dict[int, StepGroup] = {}
        self.alloc = IdAllocator(root.next_id)
        self.keep_all = keep_all
        self._next_state = 1
        self._next_group = 1
        self._app_counter = 0
        self._lock = threading.Lock()

    # -- step groups -----------------------------------------------------

    def open_step(self, anchor: int, label: str | None = None) -> int:
        with self._lock:
            if anchor not in self._cache and anchor not in self._parents and anchor != 0:
                raise TraceError(f"unknown anchor state {anchor}")
            gid = self._next_group
            self._next_group += 1
            self.groups[gid] = StepGroup(gid, anchor, label)
            return gid

    def close_step(self, gid: int) -> None:
        self.groups[gid].closed = True

    # -- commits ----------------------------------------------------------

    def commit_delta(self, parent: int, delta: GraphDelta, rule: str,
                     summary: dict, step_group: int) -> int:
        with self._lock:
            if not self._known(parent):
                raise TraceError(f"unknown parent state {parent}")
            if step_group not in self.groups:
                raise TraceError(f"unknown step group {step_group}")
            sid = self._next_state
            self._next_state += 1
            self._parents[sid] = parent
            self._deltas[sid] = delta
            self._order.append(sid)
            if self.keep_all:
                self._cache[sid] = delta.apply(self.state(parent))
            self._app_counter += 1
            edge = TreeEdge(parent, sid, rule, summary, self._app_counter, step_group)
            self.edges.append(edge)
            self._edges_by_child[sid] = edge
            return sid

    def commit_state(self, parent: int, child: PortGraph, rule: str,
                     summary: dict, step_group: int) -> int:
        """Commit a fully-built child graph (the delta is derived)."""
        if not self._known(parent):
            raise TraceError(f"unknown parent state {parent}")
        delta = diff_graphs(self.state(parent), child)
        return self.commit_delta(parent, delta, rule, summary, step_group)

    def _known(self, sid: int) -> bool:
        return sid == 0 or sid in self._parents

    # -- state access ------------------------------------------------------

    def state(self, sid: int) -> PortGraph:
        cached = self._cache.get(sid)
        if cached is not None:
            return cached
        if not self._known(sid):
            raise TraceError(f"unknown state {sid}")
        chain = []
        cur = sid
        while cur not in self._cache:
            chain.append(cur)
            cur = self._parents[cur]
        graph = self._cache[cur]
        for step in reversed(chain):
            graph = self._deltas[step].apply(graph)
        if self.keep_all:
            self._cache[sid] = graph
        return graph

    def retain(self, sid: int) -> None:
        """Pin a state in the cache (used for round boundaries when evicting)."""
        self._cache[sid] = self.state(sid)

    def state_ids(self) -> list[int]:
        return list(self._order)

    def parent_of(self, sid: int) -> int | None:
        return self._parents.get(sid)

    def leaves(self) -> list[int]:
        with_children = {e.parent for e in self.edges}
        return [sid for sid in self._order if sid not in with_children]

    def branch_path(self, leaf: int) -> list[int]:
        if not self._known(leaf):
            raise TraceError(f"unknown state {leaf}")
        path = [leaf]
        while path[-1] != 0:
            path.append(self._parents[path[-1]])
        path.reverse()
        return path

    # -- propagation steps ---------------------------------------------------

    def branch_steps(self, leaf: int) -> list[StepView]:
        """The branch's propagation steps: path edges grouped by strategy
        execution, plus any closed zero-application executions anchored at
        the leaf (fixpoint probes)."""
        path = self.branch_path(leaf)
        seen: dict[int, list[TreeEdge]] = {}
        group_order: list[int] = []
        for sid in path[1:]:
            edge = self._edges_by_child[sid]
            if edge.step_group not in seen:
                seen[edge.step_group] = []
                group_order.append(edge.step_group)
            seen[edge.step_group].append(edge)
        views = []
        for gid in group_order:
            edges = seen[gid]
            group = self.groups[gid]
            views.append(StepView(gid, tuple(edges), edges[-1].child, group.closed))
        empty = [g for g in self.groups.values()
                 if g.anchor == leaf and g.closed
                 and not any(e.step_group == g.id for e in self.edges)]
        for group in sorted(empty, key=lambda g: g.id):
            views.append(StepView(group.id, (), leaf, True))
        return views

    def branch_states(self, leaf: int) -> list[int]:
        """Round-boundary states root -> leaf (the simplified branch view)."""
        return [0] + [v.final_state for v in self.branch_steps(leaf)]

    # -- metrics ---------------------------------------------------------------

    def compute_metrics(self, leaf: int, label: str = "") -> MetricSeries:
        views = self.branch_steps(leaf)
        state_ids = [0] + [v.final_state for v in views]
        active: list[int] = []
        visited: list[int] = []
        for sid in state_ids:
            graph = self.state(sid)
            active.append(sum(1 for n in graph.nodes.values()
                              if n.record.get("active") is True))
            visited.append(sum(1 for n in graph.nodes.values()
                               if n.record.get("visited") is True))
        efficiency: list[float | None] = [None]
        for t in range(1, len(state_ids)):
            prev = visited[t - 1]
            efficiency.append(active[t] / prev if prev > 0 else None)
        return MetricSeries(tuple(range(len(state_ids))), tuple(active),
                            tuple(visited), tuple(efficiency),
                            tuple(state_ids), leaf, label)

    # -- element tracing ---------------------------------------------------------

    def trace_element(self, element_id: int) -> list[ElementSnapshot]:
        root = self._cache[0]
        records: dict[int, object] = {}
        snapshots: list[ElementSnapshot] = []
        found = False
        for sid in self._order:
            if sid == 0:
                rec = None
                if root.has_element(element_id):
                    rec = root.element(element_id).record
            else:
                parent_rec = records.get(self._parents[sid])
                delta = self._deltas[sid]
                rec = parent_rec
                if element_id in delta.removed:
                    rec = None
                else:
                    for coll in (delta.set_nodes, delta.set_ports, delta.set_edges):
                        for eid, elem in coll:
                            if eid == element_id:
                                rec = elem.record
            records[sid] = rec
            if rec is not None:
                found = True
                parent_rec = records.get(self._parents.get(sid, -1))
                changed = sid != 0 and parent_rec is not None and parent_rec != rec
                snapshots.append(ElementSnapshot(sid, rec, changed))
        if not found:
            raise TraceError(f"element {element_id} never existed in this tree")
        return snapshots

    # -- exports -------------------------------------------------------------------

    def export_metrics_csv(self, leaf: int) -> bytes:
        series = self.compute_metrics(leaf)
        lines = ["step,active,visited,efficiency"]
        for t in series.steps:
            eff = series.efficiency[t]
            lines.append(f"{t},{series.active[t]},{series.visited[t]},"
                         f"{'' if eff is None else repr(eff)}")
        return ("\n".join(lines) + "\n").encode("utf-8")

    def export_events_jsonl(self, leaf: int) -> bytes:
        out = []
        for step_no, view in enumerate(self.branch_steps(leaf), start=1):
            for edge in view.edges:
                obj = {"step": step_no, "app": edge.app_index, "rule": edge.rule,
                       "parent": edge.parent, "child": edge.child,
                       "image": edge.summary.get("image", [])}
                out.append(json.dumps(obj))
        return ("\n".join(out) + ("\n" if out else "")).encode("utf-8")

    def export_dot(self) -> bytes:
        lines = ["digraph derivation {"]
        for sid in self._order:
            lines.append(f'  {sid} [label="{sid}"];')
        for edge in self.edges:
            label = edge.rule.replace('"', '\\"')
            lines.append(f'  {edge.parent} -> {edge.child} [label="{label}"];')
        lines.append("}")
        return ("\n".join(lines) + "\n").encode("utf-8")

    def export(self, leaf: int, fmt: str) -> bytes:
        if fmt == "csv-metrics":
            return self.export_metrics_csv(leaf)
        if fmt == "jsonl-events":
            return self.export_events_jsonl(leaf)
        if fmt == "dot-tree":
            return self.export_dot()
        raise TraceError(f"unknown export format {fmt!r}")

    # -- skeleton / persistence --------------------------------------------------------

    def skeleton(self) -> dict:
        return {
            "root": 0,
            "states": [{"id": sid, "parent": self._parents.get(sid)}
                       for sid in self._order],
            "edges": [{"parent": e.parent, "child": e.child, "rule": e.rule,
                       "app": e.app_index, "group": e.step_group}
                      for e in self.edges],
            "groups": [{"id": g.id, "anchor": g.anchor, "label": g.label,
                        "closed": g.closed}
                       for g in sorted(self.groups.values(), key=lambda g: g.id)],
        }

    def to_json(self) -> dict:
        states = []
        for sid in self._order:
            if sid == 0:
                continue
            states.append({
                "id": sid,
                "parent": self._parents[sid],
                "delta": _delta_to_json(self._deltas[sid]),
            })
        return {
            "root": graphio.graph_to_json(self._cache[0]),
            "states": states,
            "edges": [{"parent": e.parent, "child": e.child, "rule": e.rule,
                       "summary": e.summary, "app": e.app_index,
                       "group": e.step_group} for e in self.edges],
            "groups": [{"id": g.id, "anchor": g.anchor, "label": g.label,
                        "closed": g.closed}
                       for g in sorted(self.groups.values(), key=lambda g: g.id)],
            "next_id": self.alloc.next_id,
        }

    @staticmethod
    def from_json(doc: dict, *, keep_all: bool = True) -> "DerivationTree":
        root = graphio.graph_from_json(doc["root"])
        if hasattr(root, "graph"):
            root = root.graph
        tree = DerivationTree(root, keep_all=keep_all)
        for sdoc in doc["states"]:
            sid = sdoc["id"]
            tree._parents[sid] = sdoc["parent"]
            tree._deltas[sid] = _delta_from_json(sdoc["delta"])
            tree._order.append(sid)
            tree._next_state = max(tree._next_state, sid + 1)
        for edoc in doc["edges"]:
            edge = TreeEdge(edoc["parent"], edoc["child"], edoc["rule"],
                            edoc.get("summary", {}), edoc["app"], edoc["group"])
            tree.edges.append(edge)
            tree._edges_by_child[edge.child] = edge
            tree._app_counter = max(tree._app_counter, edge.app_index)
        for gdoc in doc["groups"]:
            tree.groups[gdoc["id"]] = StepGroup(gdoc["id"], gdoc["anchor"],
                                                gdoc.get("label"), gdoc["closed"])
            tree._next_group = max(tree._next_group, gdoc["id"] + 1)
        tree.alloc.reserve(doc.get("next_id", root.next_id))
        if keep_all:
            for sid in tree._order:
                tree.state(sid)
        return tree


def _element_to_json(elem) -> dict:
    obj = {"id": elem.id, "properties": graphio.record_to_json(elem.record)}
    if isinstance(elem, Port):
        obj["owner"] = elem.node
    elif isinstance(elem, Edge):
        obj["ends"] = list(elem.ends)
    return obj


def _delta_to_json(delta: GraphDelta) -> dict:
    return {
        "nodes": [_element_to_json(e) for _, e in delta.set_nodes],
        "ports": [_element_to_json(e) for _, e in delta.set_ports],
        "edges": [_element_to_json(e) for _, e in delta.set_edges],
        "removed": sorted(delta.removed),
    }


def _delta_from_json(doc: dict) -> GraphDelta:
    nodes = tuple((o["id"], Node(o["id"], graphio.record_from_json(o["properties"])))
                  for o in doc.get("nodes", []))
    ports = tuple((o["id"], Port(o["id"], o["owner"],
                                 graphio.record_from_json(o["properties"])))
                  for o in doc.get("ports", []))
    edges = tuple((o["id"], Edge(o["id"], (o["ends"][0], o["ends"][1]),
                                 graphio.record_from_json(o["properties"])))
                  for o in doc.get("edges", []))
    return GraphDelta(nodes, ports, edges, frozenset(doc.get("removed", [])))
