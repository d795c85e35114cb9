"""Rewrite rules over port graphs.

A rule pairs a pattern (left side, elements labelled with property
predicates) with a replacement (right side, elements labelled with
attribute-update expressions). The two sides are joined by an arrow node:
its ports, all of type ``bridge``, carry arrow edges designating which
left-side ports survive the application as which right-side ports. A rule
may additionally name two disjoint right-side subsets J and K used to
update the focus/ban sets of a located graph after application.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ParseError, RuleError
from .expressions import Expr, format_expression, parse_expression
from .graph import DEFAULT_EPS, Record, kind_of

COMPARATORS = ("=", "!=", "<", "<=", ">", ">=", "exists")


@dataclass(frozen=True, slots=True)
class Var:
    """Pattern variable; binds on first equality test, compares afterwards."""

    name: str


@dataclass(frozen=True, slots=True)
class PropertyPredicate:
    attr: str
    cmp: str
    operand: object = None  # literal value, Var, or None for 'exists'

    def __post_init__(self):
        if self.cmp not in COMPARATORS:
            raise RuleError(f"unknown comparator {self.cmp!r}")
        if self.cmp == "exists":
            if self.operand is not None:
                raise RuleError("'exists' takes no operand")
        elif self.operand is None:
            raise RuleError(f"comparator {self.cmp!r} needs an operand")
        elif not isinstance(self.operand, Var):
            kind = kind_of(self.operand)
            if self.cmp in ("<", "<=", ">", ">=") and kind not in ("int", "real"):
                raise RuleError(f"comparator {self.cmp!r} needs a numeric operand, got {kind}")


def check_predicate(record: Record, pred: PropertyPredicate, bindings: dict,
                    eps: float = DEFAULT_EPS) -> bool:
    """Test one predicate; may extend ``bindings`` (caller owns rollback)."""
    if pred.attr not in record:
        return False
    if pred.cmp == "exists":
        return True
    value = record.get(pred.attr)
    operand = pred.operand
    if isinstance(operand, Var):
        if operand.name in bindings:
            operand = bindings[operand.name]
        elif pred.cmp == "=":
            bindings[operand.name] = value
            return True
        else:
            raise RuleError(
                f"variable {operand.name!r} must be bound before use with {pred.cmp!r}")
    return compare_values(value, pred.cmp, operand, eps)


def compare_values(value, cmp: str, operand, eps: float = DEFAULT_EPS) -> bool:
    vk, ok = kind_of(value), kind_of(operand)
    numeric = {"int", "real"}
    if vk in numeric and ok in numeric:
        if vk == "real" or ok == "real":
            return _real_compare(float(value), cmp, float(operand), eps)
        return _exact_compare(value, cmp, operand)
    if vk != ok:
        return cmp == "!="
    if vk in ("bool", "text"):
        if cmp not in ("=", "!="):
            raise RuleError(f"comparator {cmp!r} does not apply to {vk} values")
        return (value == operand) if cmp == "=" else (value != operand)
    if vk == "ref":
        if cmp not in ("=", "!="):
            raise RuleError("references only support = and !=")
        return (value == operand) if cmp == "=" else (value != operand)
    return _exact_compare(value, cmp, operand)


_MISSING = object()
_NO_BINDINGS: dict = {}


def compile_ground_predicates(preds) -> "callable":
    """Fast checker over the variable-free predicates of one pattern element.

    Equality against bool/text literals (the overwhelmingly common case in
    match loops) is inlined; anything else falls back to check_predicate.
    Variable predicates are excluded: the matcher handles those itself.
    """
    simple = tuple((p.attr, p.operand) for p in preds
                   if not isinstance(p.operand, Var)
                   and p.cmp == "=" and isinstance(p.operand, (bool, str)))
    general = tuple(p for p in preds
                    if not isinstance(p.operand, Var)
                    and not (p.cmp == "=" and isinstance(p.operand, (bool, str))))

    def run(record: Record, eps: float) -> bool:
        data = record._data
        for attr, want in simple:
            value = data.get(attr, _MISSING)
            if type(value) is not type(want) or value != want:
                return False
        for pred in general:
            if not check_predicate(record, pred, _NO_BINDINGS, eps):
                return False
        return True

    return run


def _exact_compare(a, cmp, b) -> bool:
    return {"=": a == b, "!=": a != b, "<": a < b, "<=": a <= b,
            ">": a > b, ">=": a >= b}[cmp]


def _real_compare(a: float, cmp: str, b: float, eps: float) -> bool:
    # Absolute tolerance: x >= t iff x >= t - eps, and symmetrically.
    if cmp == "=":
        return abs(a - b) <= eps
    if cmp == "!=":
        return abs(a - b) > eps
    if cmp == "<":
        return a < b - eps
    if cmp == "<=":
        return a <= b + eps
    if cmp == ">":
        return a > b + eps
    return a >= b - eps


# -- pattern (left side) -------------------------------------------------

@dataclass(frozen=True, slots=True)
class PatternNode:
    id: int
    name: str
    preds: tuple[PropertyPredicate, ...]


@dataclass(frozen=True, slots=True)
class PatternPort:
    id: int
    node: int
    name: str
    preds: tuple[PropertyPredicate, ...]


@dataclass(frozen=True, slots=True)
class PatternEdge:
    id: int
    ends: tuple[int, int]
    name: str
    preds: tuple[PropertyPredicate, ...]


class PatternGraph:
    def __init__(self, nodes, ports, edges):
        self.nodes: dict[int, PatternNode] = {n.id: n for n in nodes}
        self.ports: dict[int, PatternPort] = {p.id: p for p in ports}
        self.edges: dict[int, PatternEdge] = {e.id: e for e in edges}
        self.node_ports: dict[int, tuple[int, ...]] = {nid: () for nid in self.nodes}
        for p in ports:
            if p.node not in self.nodes:
                raise RuleError(f"pattern port {p.id} owned by missing node {p.node}")
            self.node_ports[p.node] += (p.id,)
        for e in edges:
            for end in e.ends:
                if end not in self.ports:
                    raise RuleError(f"pattern edge {e.id} ends at missing port {end}")

    def all_ids(self):
        yield from self.nodes
        yield from self.ports
        yield from self.edges


# -- replacement (right side) ---------------------------------------------

@dataclass(frozen=True, slots=True)
class RhsNode:
    id: int
    name: str
    props: tuple[tuple[str, Expr], ...]


@dataclass(frozen=True, slots=True)
class RhsPort:
    id: int
    node: int
    name: str
    props: tuple[tuple[str, Expr], ...]


@dataclass(frozen=True, slots=True)
class RhsEdge:
    id: int
    ends: tuple[int, int]
    name: str
    props: tuple[tuple[str, Expr], ...]


class RhsGraph:
    def __init__(self, nodes, ports, edges):
        self.nodes: dict[int, RhsNode] = {n.id: n for n in nodes}
        self.ports: dict[int, RhsPort] = {p.id: p for p in ports}
        self.edges: dict[int, RhsEdge] = {e.id: e for e in edges}
        self.node_ports: dict[int, tuple[int, ...]] = {nid: () for nid in self.nodes}
        for p in ports:
            if p.node not in self.nodes:
                raise RuleError(f"replacement port {p.id} owned by missing node {p.node}")
            self.node_ports[p.node] += (p.id,)
        for e in edges:
            for end in e.ends:
                if end not in self.ports:
                    raise RuleError(f"replacement edge {e.id} ends at missing port {end}")

    def all_ids(self):
        yield from self.nodes
        yield from self.ports
        yield from self.edges


@dataclass(frozen=True, slots=True)
class ArrowPort:
    id: int
    type: str


@dataclass(frozen=True)
class RewriteRule:
    name: str
    lhs: PatternGraph
    rhs: RhsGraph
    arrow_ports: tuple[ArrowPort, ...]
    arrow_edges: tuple[tuple[int, int], ...]  # (arrow port id, lhs-or-rhs port id)
    j_ids: frozenset[int] | None = None  # None means: whole right side
    k_ids: frozenset[int] = frozenset()
    # derived: lhs port id -> rhs port ids it survives as
    survives: dict[int, tuple[int, ...]] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "survives", _derive_bridges(self))
        _validate_rule(self)


def _derive_bridges(rule: RewriteRule) -> dict[int, tuple[int, ...]]:
    lhs_ports = set(rule.lhs.ports)
    rhs_ports = set(rule.rhs.ports)
    by_arrow: dict[int, tuple[list[int], list[int]]] = {ap.id: ([], []) for ap in rule.arrow_ports}
    for ap_id, port_id in rule.arrow_edges:
        if ap_id not in by_arrow:
            raise RuleError(f"arrow edge references unknown arrow port {ap_id}")
        if port_id in lhs_ports:
            by_arrow[ap_id][0].append(port_id)
        elif port_id in rhs_ports:
            by_arrow[ap_id][1].append(port_id)
        else:
            raise RuleError(f"arrow edge references unknown port {port_id}")
    survives: dict[int, tuple[int, ...]] = {}
    for ap in rule.arrow_ports:
        if ap.type != "bridge":
            raise RuleError(
                f"arrow port type {ap.type!r} is not supported (only 'bridge')",
                code="UNSUPPORTED_ARROW")
        left, right = by_arrow[ap.id]
        if not left or not right:
            raise RuleError(
                f"bridge port {ap.id} must connect at least one port on each side")
        if len(left) > 1:
            raise RuleError(
                f"bridge port {ap.id} joins several left-side ports; merging is not supported",
                code="UNSUPPORTED_ARROW")
        lp = left[0]
        if lp in survives:
            raise RuleError(f"left-side port {lp} is bridged more than once")
        survives[lp] = tuple(sorted(right))
    return survives


def _validate_rule(rule: RewriteRule) -> None:
    overlap = set(rule.lhs.all_ids()) & set(rule.rhs.all_ids())
    if overlap:
        raise RuleError(f"rule element ids used on both sides: {sorted(overlap)}")
    rhs_ids = set(rule.rhs.all_ids())
    if rule.j_ids is not None and not rule.j_ids <= rhs_ids:
        raise RuleError("J must be a subset of the right side")
    if not rule.k_ids <= rhs_ids:
        raise RuleError("K must be a subset of the right side")
    j = rule.j_ids if rule.j_ids is not None else rhs_ids
    if j & rule.k_ids:
        raise RuleError("J and K must be disjoint")
    names: set[str] = set()
    for side in (rule.lhs, rule.rhs):
        for coll in (side.nodes, side.ports, side.edges):
            for elem in coll.values():
                if elem.name in names:
                    raise RuleError(f"duplicate element name {elem.name!r} in rule")
                names.add(elem.name)


# -- JSON form ------------------------------------------------------------

def _operand_to_json(operand):
    if operand is None:
        return None
    if isinstance(operand, Var):
        return {"var": operand.name}
    kind = kind_of(operand)
    return {"kind": kind, "v": operand.target if kind == "ref" else operand}


def _operand_from_json(obj):
    if obj is None:
        return None
    if not isinstance(obj, dict):
        raise ParseError(f"bad predicate operand {obj!r}")
    if "var" in obj:
        return Var(obj["var"])
    from .graphio import value_from_json
    return value_from_json(obj)


def _preds_to_json(preds):
    return [{"attr": p.attr, "cmp": p.cmp, "operand": _operand_to_json(p.operand)}
            for p in preds]


def _preds_from_json(items, where: str):
    if not isinstance(items, list):
        raise ParseError(f"{where}: predicates must be an array")
    out = []
    for obj in items:
        out.append(PropertyPredicate(obj["attr"], obj["cmp"],
                                     _operand_from_json(obj.get("operand"))))
    return tuple(out)


def rule_to_json(rule: RewriteRule) -> dict:
    def pat_elem(e, extra):
        d = {"id": e.id, "name": e.name, **extra, "predicates": _preds_to_json(e.preds)}
        return d

    def rhs_elem(e, extra):
        return {"id": e.id, "name": e.name, **extra,
                "properties": {a: format_expression(x) for a, x in e.props}}

    doc = {
        "name": rule.name,
        "lhs": {
            "nodes": [pat_elem(n, {}) for n in rule.lhs.nodes.values()],
            "ports": [pat_elem(p, {"owner": p.node}) for p in rule.lhs.ports.values()],
            "edges": [pat_elem(e, {"ends": list(e.ends)}) for e in rule.lhs.edges.values()],
        },
        "rhs": {
            "nodes": [rhs_elem(n, {}) for n in rule.rhs.nodes.values()],
            "ports": [rhs_elem(p, {"owner": p.node}) for p in rule.rhs.ports.values()],
            "edges": [rhs_elem(e, {"ends": list(e.ends)}) for e in rule.rhs.edges.values()],
        },
        "arrow": {
            "ports": [{"id": ap.id, "type": ap.type} for ap in rule.arrow_ports],
            "edges": [list(pair) for pair in rule.arrow_edges],
        },
    }
    if rule.j_ids is not None:
        doc["J"] = sorted(rule.j_ids)
    if rule.k_ids:
        doc["K"] = sorted(rule.k_ids)
    return doc


def rule_from_json(doc) -> RewriteRule:
    if not isinstance(doc, dict):
        raise ParseError("rule document must be a JSON object")
    name = doc.get("name", "rule")

    def auto_name(prefix, eid, given):
        return given if given else f"{prefix}{eid}"

    lhs_doc = doc.get("lhs", {})
    nodes = [PatternNode(o["id"], auto_name("n", o["id"], o.get("name")),
                         _preds_from_json(o.get("predicates", []), "lhs node"))
             for o in lhs_doc.get("nodes", [])]
    ports = [PatternPort(o["id"], o["owner"], auto_name("p", o["id"], o.get("name")),
                         _preds_from_json(o.get("predicates", []), "lhs port"))
             for o in lhs_doc.get("ports", [])]
    edges = [PatternEdge(o["id"], (o["ends"][0], o["ends"][1]),
                         auto_name("e", o["id"], o.get("name")),
                         _preds_from_json(o.get("predicates", []), "lhs edge"))
             for o in lhs_doc.get("edges", [])]
    lhs = PatternGraph(nodes, ports, edges)

    def parse_props(obj, where):
        props = obj.get("properties", {})
        if not isinstance(props, dict):
            raise ParseError(f"{where}: properties must be an object")
        return tuple((attr, parse_expression(text)) for attr, text in props.items())

    rhs_doc = doc.get("rhs", {})
    rnodes = [RhsNode(o["id"], auto_name("n", o["id"], o.get("name")),
                      parse_props(o, "rhs node"))
              for o in rhs_doc.get("nodes", [])]
    rports = [RhsPort(o["id"], o["owner"], auto_name("p", o["id"], o.get("name")),
                      parse_props(o, "rhs port"))
              for o in rhs_doc.get("ports", [])]
    redges = [RhsEdge(o["id"], (o["ends"][0], o["ends"][1]),
                      auto_name("e", o["id"], o.get("name")),
                      parse_props(o, "rhs edge"))
              for o in rhs_doc.get("edges", [])]
    rhs = RhsGraph(rnodes, rports, redges)

    arrow = doc.get("arrow", {})
    arrow_ports = tuple(ArrowPort(o["id"], o.get("type", "bridge"))
                        for o in arrow.get("ports", []))
    arrow_edges = tuple((pair[0], pair[1]) for pair in arrow.get("edges", []))
    j_ids = frozenset(doc["J"]) if "J" in doc else None
    k_ids = frozenset(doc.get("K", []))
    return RewriteRule(name, lhs, rhs, arrow_ports, arrow_edges, j_ids, k_ids)


def load_rules(text: str | bytes) -> dict[str, RewriteRule]:
    """Parse a rule library: either one rule object or an array of them."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno, offset=exc.pos) from exc
    docs = doc if isinstance(doc, list) else [doc]
    library: dict[str, RewriteRule] = {}
    for obj in docs:
        rule = rule_from_json(obj)
        if rule.name in library:
            raise ParseError(f"duplicate rule name {rule.name!r}")
        library[rule.name] = rule
    return library


def dump_rules(library: dict[str, RewriteRule]) -> str:
    return json.dumps([rule_to_json(r) for r in library.values()], indent=2) + "\n"
