"""JSON persistence for port graphs.

Document layout: top-level arrays ``nodes``, ``ports``, ``edges`` of objects
``{id, owner?, ends?, properties: {name: value, ...}}`` plus optional
``position`` and ``banned`` id arrays. Property values are tagged
``{"kind": "bool|int|real|text|ref", "v": ...}``. Serialization is
deterministic, so round-trips are byte-stable.
"""

from __future__ import annotations

import json

from .errors import GraphError, ParseError
from .graph import Edge, LocatedGraph, Node, Port, PortGraph, Record, Ref, kind_of


def value_to_json(value) -> dict:
    kind = kind_of(value)
    return {"kind": kind, "v": value.target if kind == "ref" else value}


def value_from_json(obj) -> object:
    if not isinstance(obj, dict) or set(obj) != {"kind", "v"}:
        raise ParseError(f"expected a tagged value object, got {obj!r}")
    kind, v = obj["kind"], obj["v"]
    checks = {
        "bool": lambda x: isinstance(x, bool),
        "int": lambda x: isinstance(x, int) and not isinstance(x, bool),
        "real": lambda x: isinstance(x, (int, float)) and not isinstance(x, bool),
        "text": lambda x: isinstance(x, str),
        "ref": lambda x: isinstance(x, int) and not isinstance(x, bool),
    }
    if kind not in checks:
        raise ParseError(f"unknown value kind {kind!r}")
    if not checks[kind](v):
        raise ParseError(f"value {v!r} does not have kind {kind!r}")
    if kind == "ref":
        return Ref(v)
    if kind == "real":
        return float(v)
    return v


def record_to_json(record: Record) -> dict:
    return {name: value_to_json(value) for name, value in record.items()}


def record_from_json(obj) -> Record:
    if not isinstance(obj, dict):
        raise ParseError("properties must be an object")
    return Record([(name, value_from_json(v)) for name, v in obj.items()])


def graph_to_json(graph: PortGraph | LocatedGraph) -> dict:
    located = graph if isinstance(graph, LocatedGraph) else None
    if located is not None:
        graph = located.graph
    doc = {
        "nodes": [{"id": n.id, "properties": record_to_json(n.record)}
                  for n in sorted(graph.nodes.values(), key=lambda n: n.id)],
        "ports": [{"id": p.id, "owner": p.node, "properties": record_to_json(p.record)}
                  for p in sorted(graph.ports.values(), key=lambda p: p.id)],
        "edges": [{"id": e.id, "ends": list(e.ends), "properties": record_to_json(e.record)}
                  for e in sorted(graph.edges.values(), key=lambda e: e.id)],
    }
    if located is not None:
        doc["position"] = sorted(located.position)
        doc["banned"] = sorted(located.banned)
    return doc


def graph_from_json(doc) -> PortGraph | LocatedGraph:
    if not isinstance(doc, dict):
        raise ParseError("graph document must be a JSON object")
    for key in ("nodes", "ports", "edges"):
        if key not in doc or not isinstance(doc[key], list):
            raise ParseError(f"graph document is missing the {key!r} array")

    def need(obj, key, where):
        if key not in obj:
            raise ParseError(f"{where} is missing {key!r}")
        return obj[key]

    def elem_id(obj, where):
        eid = need(obj, "id", where)
        if not isinstance(eid, int) or isinstance(eid, bool):
            raise ParseError(f"{where} has non-integer id {eid!r}")
        return eid

    nodes: dict[int, Node] = {}
    for obj in doc["nodes"]:
        nid = elem_id(obj, "node")
        nodes[nid] = Node(nid, record_from_json(obj.get("properties", {})))
    ports: dict[int, Port] = {}
    for obj in doc["ports"]:
        pid = elem_id(obj, "port")
        ports[pid] = Port(pid, need(obj, "owner", f"port {pid}"),
                          record_from_json(obj.get("properties", {})))
    edges: dict[int, Edge] = {}
    for obj in doc["edges"]:
        eid = elem_id(obj, "edge")
        ends = need(obj, "ends", f"edge {eid}")
        if not (isinstance(ends, list) and len(ends) == 2):
            raise ParseError(f"edge {eid} needs a two-element ends array")
        edges[eid] = Edge(eid, (ends[0], ends[1]),
                          record_from_json(obj.get("properties", {})))

    try:
        graph = PortGraph(nodes, ports, edges)
    except GraphError as exc:
        raise ParseError(str(exc)) from exc

    if "position" in doc or "banned" in doc:
        position = frozenset(doc.get("position", []))
        banned = frozenset(doc.get("banned", []))
        for eid in position | banned:
            if not graph.has_element(eid):
                raise ParseError(f"position/banned id {eid} is not in the graph")
        return LocatedGraph(graph, position, banned)
    return graph


def dumps(graph: PortGraph | LocatedGraph) -> str:
    return json.dumps(graph_to_json(graph), indent=2) + "\n"


def dump_bytes(graph: PortGraph | LocatedGraph) -> bytes:
    return dumps(graph).encode("utf-8")


def loads(text: str | bytes) -> PortGraph | LocatedGraph:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno,
                         offset=exc.pos) from exc
    return graph_from_json(doc)


def load_file(path) -> PortGraph | LocatedGraph:
    with open(path, "rb") as fh:
        return loads(fh.read())


def save_file(path, graph: PortGraph | LocatedGraph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(graph))
