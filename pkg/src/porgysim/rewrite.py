"""Pattern matching and rule application.

Matching finds injective, adjacency- and ownership-preserving embeddings of
a rule's left side into a host graph, keeps only those whose image touches
the focus set and avoids the banned set, and reports them in a canonical
order (host-id tuples) so that runs are replayable.

Application removes the matched image except for elements that survive
through the rule's bridge ports, instantiates the right side (surviving
elements keep their host ids, new ones draw fresh ids), evaluates all
attribute-update expressions against the pre-application state in one
simultaneous assignment, and finally updates the focus/ban sets. A failed
application leaves the host state untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ApplicationError, ExpressionError, GraphError
from .expressions import evaluate
from .graph import (DEFAULT_EPS, Edge, GraphDelta, IdAllocator, LocatedGraph,
                    Node, Port, PortGraph, Record)
from .rules import (RewriteRule, Var, check_predicate,
                    compile_ground_predicates)


@dataclass(frozen=True)
class Match:
    """Embedding of a rule's left side: lhs element id -> host element id."""

    morphism: dict[int, int]
    bindings: dict[str, object]
    key: tuple[int, ...]

    def image(self) -> frozenset[int]:
        return frozenset(self.morphism.values())


def _make_match(rule: RewriteRule, morphism: dict, bindings: dict) -> Match:
    key = tuple(morphism[lid] for lid in sorted(morphism))
    return Match(dict(morphism), dict(bindings), key)


class _RuleInfo:
    """Per-rule matching tables: compiled checkers and adjacency hints."""

    __slots__ = ("ground", "var_preds", "edge_hints", "lhs_adj", "has_vars")

    def __init__(self, rule: RewriteRule):
        lhs = rule.lhs
        self.ground = {}
        self.var_preds = {}
        for coll in (lhs.nodes, lhs.ports, lhs.edges):
            for eid, elem in coll.items():
                self.ground[eid] = compile_ground_predicates(elem.preds)
                self.var_preds[eid] = tuple(p for p in elem.preds
                                            if isinstance(p.operand, Var))
        self.has_vars = any(self.var_preds.values())
        # for each pattern node: its ports paired with the opposite port of
        # every pattern edge touching them (used to restrict candidates to
        # hosts adjacent to the already-matched image)
        hints: dict[int, list[tuple[int, int]]] = {ln: [] for ln in lhs.nodes}
        self.lhs_adj: dict[int, set[int]] = {ln: set() for ln in lhs.nodes}
        for edge in lhs.edges.values():
            pa, pb = edge.ends
            na, nb = lhs.ports[pa].node, lhs.ports[pb].node
            hints[na].append((pa, pb))
            hints[nb].append((pb, pa))
            self.lhs_adj[na].add(nb)
            self.lhs_adj[nb].add(na)
        self.edge_hints = {ln: tuple(pairs) for ln, pairs in hints.items()}


_RULE_INFO: dict[int, tuple[RewriteRule, _RuleInfo]] = {}


def _rule_info(rule: RewriteRule) -> _RuleInfo:
    entry = _RULE_INFO.get(id(rule))
    if entry is not None and entry[0] is rule:
        return entry[1]
    info = _RuleInfo(rule)
    _RULE_INFO[id(rule)] = (rule, info)
    return info


def find_matches(rule: RewriteRule, located: LocatedGraph, rng=None,
                 mode: str = "deterministic", eps: float = DEFAULT_EPS) -> list[Match]:
    """All matches overlapping the focus set and avoiding the banned set.

    ``mode="deterministic"`` sorts by the tuple of host ids;
    ``mode="random"`` shuffles that order with the supplied rng.
    """
    g = located.graph
    banned = located.banned
    position = located.position
    lhs = rule.lhs

    if not position:
        return []
    if mode == "random" and rng is None:
        raise ApplicationError("random mode needs an rng", code="NO_RNG")

    info = _rule_info(rule)
    has_vars = info.has_vars

    node_cands: dict[int, list[int]] = {}
    node_cand_sets: dict[int, set[int]] = {}
    for lnid in lhs.nodes:
        run = info.ground[lnid]
        cands = [hnid for hnid, node in g.nodes.items()
                 if hnid not in banned and run(node.record, eps)]
        cands.sort()
        node_cands[lnid] = cands
        node_cand_sets[lnid] = set(cands)

    # search order: cheapest candidate set first, then stay connected to the
    # already-ordered pattern so adjacency can prune the host side
    order: list[int] = []
    placed: set[int] = set()
    remaining = set(lhs.nodes)
    while remaining:
        pool = [ln for ln in remaining if info.lhs_adj[ln] & placed]
        if not pool:
            pool = list(remaining)
        nxt = min(pool, key=lambda ln: (len(node_cands[ln]), ln))
        order.append(nxt)
        placed.add(nxt)
        remaining.discard(nxt)

    matches: list[Match] = []
    morphism: dict[int, int] = {}
    bindings: dict[str, object] = {}
    used_nodes: set[int] = set()
    n_order = len(order)

    def var_preds_ok(eid: int, record: Record, trail: list[str]) -> bool:
        for pred in info.var_preds[eid]:
            before = len(bindings)
            if not check_predicate(record, pred, bindings, eps):
                return False
            if len(bindings) != before:
                trail.append(pred.operand.name)
        return True

    def element_ok(eid: int, record: Record, trail: list[str]) -> bool:
        if not info.ground[eid](record, eps):
            return False
        return var_preds_ok(eid, record, trail) if has_vars else True

    def check_incident_edges(lport: int, edge_trail: list[int],
                             bind_trail: list[str]) -> bool:
        # Pattern edges at lport whose other endpoint is already mapped must
        # map onto an existing, predicate-satisfying host edge.
        for leid, ledge in lhs.edges.items():
            if lport not in ledge.ends or leid in morphism:
                continue
            other = ledge.ends[0] if ledge.ends[1] == lport else ledge.ends[1]
            if other not in morphism:
                continue
            heid = g.edge_between(morphism[lport], morphism[other])
            if heid is None or heid in banned:
                return False
            if not element_ok(leid, g.edges[heid].record, bind_trail):
                return False
            morphism[leid] = heid
            edge_trail.append(leid)
        return True

    def assign_ports(lports: tuple[int, ...], i: int, host_ports: tuple[int, ...],
                     used_ports: set[int], k: int) -> None:
        if i == len(lports):
            extend(k + 1)
            return
        lp = lports[i]
        for hp in host_ports:
            if hp in used_ports or hp in banned:
                continue
            trail: list[str] = []
            if element_ok(lp, g.ports[hp].record, trail):
                morphism[lp] = hp
                edge_trail: list[int] = []
                if check_incident_edges(lp, edge_trail, trail):
                    used_ports.add(hp)
                    assign_ports(lports, i + 1, host_ports, used_ports, k)
                    used_ports.discard(hp)
                for leid in edge_trail:
                    del morphism[leid]
                del morphism[lp]
            _unbind(bindings, trail)

    def extend(k: int) -> None:
        if k == n_order:
            if not position.isdisjoint(morphism.values()):
                matches.append(_make_match(rule, morphism, bindings))
            return
        lnid = order[k]
        iterable = node_cands[lnid]
        restricted: set[int] | None = None
        for lp_self, lp_other in info.edge_hints[lnid]:
            hp = morphism.get(lp_other)
            if hp is None:
                continue
            near = set()
            for heid in g.port_edges(hp):
                ends = g.edges[heid].ends
                far = ends[0] if ends[1] == hp else ends[1]
                near.add(g.ports[far].node)
            restricted = near if restricted is None else restricted & near
        if restricted is not None:
            cset = node_cand_sets[lnid]
            iterable = sorted(h for h in restricted if h in cset)
        lports = lhs.node_ports[lnid]
        for hnid in iterable:
            if hnid in used_nodes:
                continue
            trail: list[str] = []
            ok = var_preds_ok(lnid, g.nodes[hnid].record, trail) if has_vars else True
            if ok:
                morphism[lnid] = hnid
                used_nodes.add(hnid)
                host_ports = g.node_ports(hnid)
                if len(host_ports) >= len(lports):
                    assign_ports(lports, 0, host_ports, set(), k)
                used_nodes.discard(hnid)
                del morphism[lnid]
            _unbind(bindings, trail)

    extend(0)
    matches.sort(key=lambda m: m.key)
    if mode == "random":
        rng.shuffle(matches)
    return matches


def _unbind(bindings: dict, trail: list[str]) -> None:
    for name in trail:
        bindings.pop(name, None)


@dataclass(frozen=True)
class RewriteResult:
    located: LocatedGraph
    delta: GraphDelta
    summary: dict


def apply_rule(rule: RewriteRule, match: Match, located: LocatedGraph, rng,
               alloc: IdAllocator | None = None) -> RewriteResult:
    """Apply ``rule`` at ``match``; returns the successor located graph.

    Fresh element ids are drawn from ``alloc`` (defaults to a throwaway
    allocator starting above the host graph's ids; callers tracking a whole
    rewriting history should pass the history's allocator).
    """
    g = located.graph
    m = match.morphism
    rhs = rule.rhs
    if alloc is None:
        alloc = IdAllocator(g.next_id)
    image = set(m.values())

    # 1. Survival: primary bridge targets keep the matched host port's id.
    inst: dict[int, int] = {}
    primary_of_lhs_port: dict[int, int] = {}
    extra_targets: list[tuple[int, int]] = []  # (lhs port, extra rhs port)
    for lp, rhs_ports in rule.survives.items():
        hp = m[lp]
        inst[rhs_ports[0]] = hp
        primary_of_lhs_port[lp] = rhs_ports[0]
        for rp in rhs_ports[1:]:
            extra_targets.append((lp, rp))

    # 2. A right-side node owning a surviving port continues that port's
    #    host node; nodes with no surviving port are created fresh.
    for rnid in sorted(rhs.nodes):
        owners = {g.ports[inst[rp]].node
                  for rp in rhs.node_ports[rnid] if rp in inst}
        if len(owners) > 1:
            raise ApplicationError(
                f"right-side node {rnid} inherits ports from several host nodes "
                f"{sorted(owners)}", code="APPLY_CONFLICT")
        inst[rnid] = owners.pop() if owners else alloc.fresh()

    # 3. Remaining right-side ports (unbridged, and extra fan-out targets).
    for rpid in sorted(rhs.ports):
        if rpid not in inst:
            inst[rpid] = alloc.fresh()

    # 4. Right-side edges: an edge between two surviving ports whose matched
    #    counterparts were joined by a pattern edge continues that host edge.
    rhs_pair: dict[frozenset, int] = {frozenset(e.ends): eid for eid, e in rhs.edges.items()}
    preserved_edge: dict[int, int] = {}
    for leid, ledge in rule.lhs.edges.items():
        la, lb = ledge.ends
        ra = primary_of_lhs_port.get(la)
        rb = primary_of_lhs_port.get(lb)
        if ra is None or rb is None:
            continue
        reid = rhs_pair.get(frozenset((ra, rb)))
        if reid is not None:
            preserved_edge[reid] = m[leid]
    for reid in sorted(rhs.edges):
        inst[reid] = preserved_edge[reid] if reid in preserved_edge else alloc.fresh()

    preserved_host = {inst[rid] for rid in inst} & image
    removed = image - preserved_host

    # 5. Context integrity: removing a port strands its host edges, and
    #    removing a node strands its ports, unless those are removed too.
    for hid in removed:
        if hid in g.ports:
            for heid in g.port_edges(hid):
                if heid not in removed:
                    raise ApplicationError(
                        f"removing port {hid} would leave edge {heid} dangling",
                        code="APPLY_DANGLING")
        elif hid in g.nodes:
            for hpid in g.node_ports(hid):
                if hpid not in removed:
                    raise ApplicationError(
                        f"removing node {hid} would orphan port {hpid}",
                        code="APPLY_DANGLING")

    # 6. Evaluate all update expressions against pre-application records.
    env: dict[str, Record] = {}
    for coll in (rule.lhs.nodes, rule.lhs.ports, rule.lhs.edges):
        for elem in coll.values():
            env[elem.name] = g.element(m[elem.id]).record
    for coll in (rhs.nodes, rhs.ports, rhs.edges):
        for elem in coll.values():
            hid = inst[elem.id]
            if hid in preserved_host:
                env[elem.name] = g.element(hid).record

    evaluated: dict[int, list[tuple[str, object]]] = {}
    try:
        for coll in (rhs.nodes, rhs.ports, rhs.edges):
            for rid in sorted(coll):
                entries = [(attr, evaluate(expr, env, rng)) for attr, expr in coll[rid].props]
                if entries:
                    evaluated[rid] = entries
    except ExpressionError as exc:
        raise ApplicationError(f"attribute update failed: {exc}", code=exc.code) from exc

    # 7. Assemble the successor state.
    set_nodes: dict[int, Node] = {}
    set_ports: dict[int, Port] = {}
    set_edges: dict[int, Edge] = {}

    def new_record(rid: int, hid: int) -> Record | None:
        entries = evaluated.get(rid)
        if hid in preserved_host:
            if not entries:
                return None  # untouched; keep the parent's element object
            try:
                return g.element(hid).record.with_values(entries)
            except GraphError as exc:
                raise ApplicationError(str(exc), code=exc.code) from exc
        return Record(entries or [])

    for rnid in rhs.nodes:
        hid = inst[rnid]
        rec = new_record(rnid, hid)
        if rec is not None:
            set_nodes[hid] = Node(hid, rec)
    for rpid, rport in rhs.ports.items():
        hid = inst[rpid]
        rec = new_record(rpid, hid)
        if rec is not None or hid not in preserved_host:
            owner = inst[rport.node]
            set_ports[hid] = Port(hid, owner, rec if rec is not None else g.ports[hid].record)
    for reid, redge in rhs.edges.items():
        hid = inst[reid]
        rec = new_record(reid, hid)
        ends = (inst[redge.ends[0]], inst[redge.ends[1]])
        if hid in preserved_host:
            if rec is not None:
                set_edges[hid] = Edge(hid, g.edges[hid].ends, rec)
        else:
            if _pair_taken(g, ends, removed, set_edges):
                raise ApplicationError(
                    f"edge between ports {ends} would duplicate an existing edge",
                    code="DUP_EDGE")
            set_edges[hid] = Edge(hid, ends, rec if rec is not None else Record())

    # 8. Fan-out: a bridge naming several right-side targets duplicates the
    #    host port's context edges onto each extra target.
    for lp, rp in sorted(extra_targets, key=lambda t: (t[0], t[1])):
        hp = m[lp]
        np_ = inst[rp]
        for heid in g.port_edges(hp):
            if heid in removed or heid in image:
                continue
            hedge = g.edges[heid]
            far = hedge.ends[0] if hedge.ends[1] == hp else hedge.ends[1]
            dup_ends = (np_, far)
            if _pair_taken(g, dup_ends, removed, set_edges):
                raise ApplicationError(
                    f"duplicating context edge {heid} would violate the one-edge "
                    f"invariant between ports {dup_ends}", code="DUP_EDGE")
            neid = alloc.fresh()
            set_edges[neid] = Edge(neid, dup_ends, hedge.record)

    delta = GraphDelta(tuple(sorted(set_nodes.items())), tuple(sorted(set_ports.items())),
                       tuple(sorted(set_edges.items())), frozenset(removed))
    try:
        new_graph = delta.apply(g)
    except GraphError as exc:
        raise ApplicationError(str(exc), code=exc.code) from exc

    # 9. Focus moves off the consumed image onto the instantiated J image
    #    (default: the whole right side); the ban set grows by K's image.
    j_ids = rule.j_ids if rule.j_ids is not None else frozenset(rhs.all_ids())
    j_image = {inst[rid] for rid in j_ids}
    new_position = (located.position - image) | j_image
    k_image = {inst[rid] for rid in rule.k_ids}
    new_banned = (located.banned - frozenset(removed)) | k_image

    fresh = {v for v in inst.values() if v not in image}
    fresh |= set(set_edges) - set(inst.values()) - image
    summary = {
        "rule": rule.name,
        "map": _name_map(rule, m),
        "image": sorted(image),
        "created": sorted(fresh),
    }
    new_located = LocatedGraph(new_graph, frozenset(new_position), frozenset(new_banned))
    return RewriteResult(new_located, delta, summary)


def _pair_taken(g: PortGraph, ends: tuple[int, int], removed: set[int],
                pending: dict[int, Edge]) -> bool:
    key = frozenset(ends)
    existing = g.edge_between(*ends)
    if existing is not None and existing not in removed:
        return True
    return any(frozenset(e.ends) == key for e in pending.values())


def _name_map(rule: RewriteRule, morphism: dict[int, int]) -> dict[str, int]:
    out = {}
    for coll in (rule.lhs.nodes, rule.lhs.ports, rule.lhs.edges):
        for elem in coll.values():
            out[elem.name] = morphism[elem.id]
    return out
