"""Port graphs with property records.

Nodes expose named connection points (ports); undirected edges attach to
ports, never directly to nodes. Every element (node, port, edge) carries a
record of typed properties and a stable integer id that is unique across
the whole rewriting history, so an element can be followed through every
state it appears in.

Graphs are immutable once constructed: derived states are built with
:meth:`PortGraph.with_changes`, which shares untouched element objects
(and, when the topology is unchanged, the adjacency indexes) with the
parent graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import GraphError

# Absolute tolerance applied to comparisons between real-valued properties.
DEFAULT_EPS = 1e-9

VALUE_KINDS = ("bool", "int", "real", "text", "ref")


@dataclass(frozen=True, slots=True)
class Ref:
    """A property value referring to another element by id."""

    target: int


def kind_of(value) -> str:
    # bool must be tested before int: bool is an int subclass.
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "real"
    if isinstance(value, str):
        return "text"
    if isinstance(value, Ref):
        return "ref"
    raise GraphError(f"unsupported property value {value!r}", code="BAD_VALUE")


class Record:
    """Ordered, immutable collection of (attribute, value) properties.

    An attribute occurs at most once. Once an attribute holds a value of
    some kind, replacing it with a value of a different kind is rejected.
    """

    __slots__ = ("_data",)

    def __init__(self, entries: Mapping | Iterable[tuple[str, object]] | None = None):
        data: dict[str, object] = {}
        if entries is not None:
            pairs = entries.items() if isinstance(entries, Mapping) else entries
            for name, value in pairs:
                if name in data:
                    raise GraphError(f"duplicate attribute {name!r} in record", code="DUP_ATTR")
                kind_of(value)
                data[name] = value
        object.__setattr__(self, "_data", data)

    def get(self, name: str, default=None):
        return self._data.get(name, default)

    def __contains__(self, name: str) -> bool:
        return name in self._data

    def __len__(self) -> int:
        return len(self._data)

    def __iter__(self) -> Iterator[str]:
        return iter(self._data)

    def items(self):
        return self._data.items()

    def with_values(self, entries: Iterable[tuple[str, object]]) -> "Record":
        """Return a record with the given properties set (kind-stable)."""
        data = dict(self._data)
        for name, value in entries:
            new_kind = kind_of(value)
            if name in data:
                old_kind = kind_of(data[name])
                if old_kind != new_kind:
                    raise GraphError(
                        f"attribute {name!r} holds a {old_kind} value; cannot assign {new_kind}",
                        code="KIND_MISMATCH",
                    )
            data[name] = value
        rec = Record.__new__(Record)
        object.__setattr__(rec, "_data", data)
        return rec

    def __eq__(self, other) -> bool:
        if not isinstance(other, Record):
            return NotImplemented
        return list(self._data.items()) == list(other._data.items())

    def __hash__(self):
        return hash(tuple(self._data.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self._data.items())
        return f"Record({inner})"


EMPTY_RECORD = Record()


@dataclass(frozen=True, slots=True)
class Node:
    id: int
    record: Record


@dataclass(frozen=True, slots=True)
class Port:
    id: int
    node: int
    record: Record


@dataclass(frozen=True, slots=True)
class Edge:
    id: int
    ends: tuple[int, int]
    record: Record


class IdAllocator:
    """Monotonic element-id source; one per rewriting history."""

    __slots__ = ("_next",)

    def __init__(self, start: int = 1):
        self._next = start

    def fresh(self) -> int:
        nid = self._next
        self._next += 1
        return nid

    def reserve(self, floor: int) -> None:
        if floor > self._next:
            self._next = floor

    @property
    def next_id(self) -> int:
        return self._next


class PortGraph:
    """Immutable port graph. Use :class:`GraphBuilder` or ``with_changes``."""

    __slots__ = ("nodes", "ports", "edges", "_node_ports", "_port_edges",
                 "_pair_edge", "next_id")

    def __init__(self, nodes: dict[int, Node], ports: dict[int, Port],
                 edges: dict[int, Edge], *, _indexes=None):
        self.nodes = nodes
        self.ports = ports
        self.edges = edges
        if _indexes is not None:
            self._node_ports, self._port_edges, self._pair_edge = _indexes
        else:
            self._build_indexes()
        top = 0
        for coll in (nodes, ports, edges):
            if coll:
                top = max(top, max(coll))
        self.next_id = top + 1

    def _build_indexes(self):
        seen: set[int] = set()
        for coll, label in ((self.nodes, "node"), (self.ports, "port"), (self.edges, "edge")):
            for eid, elem in coll.items():
                if eid != elem.id:
                    raise GraphError(f"{label} keyed {eid} carries id {elem.id}", code="BAD_ID")
                if eid in seen:
                    raise GraphError(f"element id {eid} used more than once", code="DUP_ID")
                seen.add(eid)
        node_ports: dict[int, list[int]] = {nid: [] for nid in self.nodes}
        for pid, port in self.ports.items():
            if port.node not in self.nodes:
                raise GraphError(f"port {pid} owned by missing node {port.node}", code="ORPHAN_PORT")
            node_ports[port.node].append(pid)
        port_edges: dict[int, list[int]] = {pid: [] for pid in self.ports}
        pair_edge: dict[frozenset, int] = {}
        for eid, edge in self.edges.items():
            a, b = edge.ends
            for end in (a, b):
                if end not in self.ports:
                    raise GraphError(f"edge {eid} ends at missing port {end}", code="DANGLING_EDGE")
            key = frozenset((a, b))
            if key in pair_edge:
                raise GraphError(
                    f"duplicate edge between ports {a} and {b} (edges {pair_edge[key]}, {eid})",
                    code="DUP_EDGE",
                )
            pair_edge[key] = eid
            port_edges[a].append(eid)
            if b != a:
                port_edges[b].append(eid)
        self._node_ports = {nid: tuple(sorted(ps)) for nid, ps in node_ports.items()}
        self._port_edges = {pid: tuple(sorted(es)) for pid, es in port_edges.items()}
        self._pair_edge = pair_edge

    # -- lookups -------------------------------------------------------

    def element(self, eid: int):
        for coll in (self.nodes, self.ports, self.edges):
            if eid in coll:
                return coll[eid]
        raise GraphError(f"unknown element id {eid}", code="UNKNOWN_ELEMENT")

    def has_element(self, eid: int) -> bool:
        return eid in self.nodes or eid in self.ports or eid in self.edges

    def element_kind(self, eid: int) -> str:
        if eid in self.nodes:
            return "node"
        if eid in self.ports:
            return "port"
        if eid in self.edges:
            return "edge"
        raise GraphError(f"unknown element id {eid}", code="UNKNOWN_ELEMENT")

    def get_property(self, eid: int, name: str, default=None):
        """Current value of a property, or ``default`` when absent."""
        return self.element(eid).record.get(name, default)

    def node_ports(self, nid: int) -> tuple[int, ...]:
        return self._node_ports[nid]

    def port_edges(self, pid: int) -> tuple[int, ...]:
        return self._port_edges[pid]

    def edge_between(self, p1: int, p2: int) -> int | None:
        return self._pair_edge.get(frozenset((p1, p2)))

    def all_element_ids(self) -> Iterator[int]:
        yield from self.nodes
        yield from self.ports
        yield from self.edges

    def element_count(self) -> int:
        return len(self.nodes) + len(self.ports) + len(self.edges)

    # -- derivation ----------------------------------------------------

    def with_changes(self, *, set_nodes: Mapping[int, Node] = (),
                     set_ports: Mapping[int, Port] = (),
                     set_edges: Mapping[int, Edge] = (),
                     removed: Iterable[int] = ()) -> "PortGraph":
        """New graph with the given elements replaced/added/removed.

        When no element is added or removed and no port changes owner and
        no edge changes endpoints, the adjacency indexes are shared with
        this graph.
        """
        removed = set(removed)
        nodes = dict(self.nodes)
        ports = dict(self.ports)
        edges = dict(self.edges)
        topology_same = not removed
        for rid in removed:
            nodes.pop(rid, None)
            ports.pop(rid, None)
            edges.pop(rid, None)
        for nid, node in dict(set_nodes).items():
            if nid not in nodes:
                topology_same = False
            nodes[nid] = node
        for pid, port in dict(set_ports).items():
            old = ports.get(pid)
            if old is None or old.node != port.node:
                topology_same = False
            ports[pid] = port
        for eid, edge in dict(set_edges).items():
            old = edges.get(eid)
            if old is None or old.ends != edge.ends:
                topology_same = False
            edges[eid] = edge
        indexes = (self._node_ports, self._port_edges, self._pair_edge) if topology_same else None
        return PortGraph(nodes, ports, edges, _indexes=indexes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PortGraph):
            return NotImplemented
        return (self.nodes == other.nodes and self.ports == other.ports
                and self.edges == other.edges)

    def __hash__(self):
        raise TypeError("PortGraph is not hashable")

    def __repr__(self) -> str:
        return (f"PortGraph(nodes={len(self.nodes)}, ports={len(self.ports)}, "
                f"edges={len(self.edges)})")


def validate(graph: PortGraph) -> None:
    """Re-check every structural invariant; raises GraphError on violation."""
    PortGraph(dict(graph.nodes), dict(graph.ports), dict(graph.edges))


@dataclass(frozen=True, slots=True)
class GraphDelta:
    """Difference between a graph and its parent; enough to rebuild it."""

    set_nodes: tuple[tuple[int, Node], ...] = ()
    set_ports: tuple[tuple[int, Port], ...] = ()
    set_edges: tuple[tuple[int, Edge], ...] = ()
    removed: frozenset[int] = frozenset()

    def apply(self, graph: PortGraph) -> PortGraph:
        return graph.with_changes(set_nodes=dict(self.set_nodes),
                                  set_ports=dict(self.set_ports),
                                  set_edges=dict(self.set_edges),
                                  removed=self.removed)

    def is_empty(self) -> bool:
        return not (self.set_nodes or self.set_ports or self.set_edges or self.removed)


def diff_graphs(parent: PortGraph, child: PortGraph) -> GraphDelta:
    """Delta such that ``delta.apply(parent) == child``."""
    removed = [eid for eid in parent.all_element_ids() if not child.has_element(eid)]
    set_nodes = [(nid, n) for nid, n in child.nodes.items() if parent.nodes.get(nid) != n]
    set_ports = [(pid, p) for pid, p in child.ports.items() if parent.ports.get(pid) != p]
    set_edges = [(eid, e) for eid, e in child.edges.items() if parent.edges.get(eid) != e]
    return GraphDelta(tuple(set_nodes), tuple(set_ports), tuple(set_edges),
                      frozenset(removed))


@dataclass(frozen=True, slots=True)
class LocatedGraph:
    """A port graph with a focus (position) and a forbidden (banned) subset.

    Rewriting may only touch subgraphs that intersect ``position`` and must
    avoid ``banned`` entirely; when the two overlap, banned wins.
    """

    graph: PortGraph
    position: frozenset[int]
    banned: frozenset[int]

    @staticmethod
    def whole(graph: PortGraph) -> "LocatedGraph":
        return LocatedGraph(graph, frozenset(graph.all_element_ids()), frozenset())


def _checked_subset(graph: PortGraph, ids: Iterable[int], what: str) -> frozenset[int]:
    ids = frozenset(ids)
    for eid in ids:
        if not graph.has_element(eid):
            raise GraphError(f"{what} id {eid} is not in the graph", code="UNKNOWN_ELEMENT")
    return ids


def set_position(located: LocatedGraph, ids: Iterable[int]) -> LocatedGraph:
    return LocatedGraph(located.graph, _checked_subset(located.graph, ids, "position"),
                        located.banned)


def set_banned(located: LocatedGraph, ids: Iterable[int]) -> LocatedGraph:
    return LocatedGraph(located.graph, located.position,
                        _checked_subset(located.graph, ids, "banned"))


class GraphBuilder:
    """Incremental constructor that assigns fresh element ids."""

    def __init__(self, alloc: IdAllocator | None = None):
        self._alloc = alloc or IdAllocator()
        self._nodes: dict[int, Node] = {}
        self._ports: dict[int, Port] = {}
        self._edges: dict[int, Edge] = {}

    def add_node(self, record: Record | Mapping | None = None) -> int:
        nid = self._alloc.fresh()
        self._nodes[nid] = Node(nid, _as_record(record))
        return nid

    def add_port(self, node: int, record: Record | Mapping | None = None) -> int:
        if node not in self._nodes:
            raise GraphError(f"cannot attach port to missing node {node}", code="ORPHAN_PORT")
        pid = self._alloc.fresh()
        self._ports[pid] = Port(pid, node, _as_record(record))
        return pid

    def add_edge(self, p1: int, p2: int, record: Record | Mapping | None = None) -> int:
        for p in (p1, p2):
            if p not in self._ports:
                raise GraphError(f"edge endpoint {p} is not a port", code="DANGLING_EDGE")
        if any(frozenset((p1, p2)) == frozenset(e.ends) for e in self._edges.values()):
            raise GraphError(f"duplicate edge between ports {p1} and {p2}", code="DUP_EDGE")
        eid = self._alloc.fresh()
        self._edges[eid] = Edge(eid, (p1, p2), _as_record(record))
        return eid

    def build(self) -> PortGraph:
        return PortGraph(dict(self._nodes), dict(self._ports), dict(self._edges))


def _as_record(record) -> Record:
    if record is None:
        return EMPTY_RECORD
    if isinstance(record, Record):
        return record
    return Record(record)
