"""Strategy language: ordering rule applications over a located graph.

Programs are ``;``-separated instructions::

    repeat(RULE NAME)     apply while a match exists
    one(RULE NAME)        apply at most once
    setPos(FILTER)        replace the focus set
    setBan(FILTER)        replace the banned set

``FILTER`` is ``Property(CrtGraph, Node|Edge|Port, attr CMP "value")`` with
``CMP`` one of ``= != < <= > >=`` (quoted numerals are read as reals), or a
bare attribute name to test existence. Rule names may contain spaces:
everything up to the closing parenthesis is the name.

One execution of a whole program is one propagation step; every rule
application inside it appends a state to the derivation tree.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import BudgetExceeded, ApplicationError, ParseError, StrategyError
from .graph import (DEFAULT_EPS, LocatedGraph, PortGraph, diff_graphs,
                    set_banned, set_position)
from .rewrite import apply_rule, find_matches
from .rules import PropertyPredicate, RewriteRule
from .trace import DerivationTree

FILTER_KINDS = ("Node", "Edge", "Port")
DEFAULT_BUDGET = 1_000_000


@dataclass(frozen=True, slots=True)
class PropertyFilter:
    scope: str  # only CrtGraph (the current graph) is defined
    kind: str   # Node | Edge | Port
    pred: PropertyPredicate


@dataclass(frozen=True, slots=True)
class Repeat:
    rule: str


@dataclass(frozen=True, slots=True)
class One:
    rule: str


@dataclass(frozen=True, slots=True)
class SetPos:
    filter: PropertyFilter


@dataclass(frozen=True, slots=True)
class SetBan:
    filter: PropertyFilter


Instruction = Repeat | One | SetPos | SetBan


@dataclass(frozen=True, slots=True)
class StrategyProgram:
    instructions: tuple[Instruction, ...]

    def __iter__(self):
        return iter(self.instructions)

    def __len__(self):
        return len(self.instructions)


# -- parsing --------------------------------------------------------------

class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> ParseError:
        line = self.text.count("\n", 0, self.pos) + 1
        col = self.pos - (self.text.rfind("\n", 0, self.pos) + 1) + 1
        return ParseError(message, line=line, column=col)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def ident(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum()
                                             or self.text[self.pos] == "_"):
            self.pos += 1
        if self.pos == start:
            raise self.error("expected an instruction name")
        return self.text[start:self.pos]

    def expect(self, ch: str):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def until(self, stop: str) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] != stop:
            self.pos += 1
        if self.pos >= len(self.text):
            raise self.error(f"missing {stop!r}")
        return self.text[start:self.pos]


def parse_filter(text: str) -> PropertyFilter:
    """Parse a standalone ``Property(...)`` filter expression."""
    sc = _Scanner(text)
    flt = _parse_filter(sc)
    if not sc.at_end():
        raise sc.error("unexpected text after filter")
    return flt


def parse_strategy(text: str) -> StrategyProgram:
    sc = _Scanner(text)
    instructions: list[Instruction] = []
    while not sc.at_end():
        name = sc.ident()
        if name in ("repeat", "one"):
            sc.expect("(")
            rule = sc.until(")").strip()
            sc.expect(")")
            if not rule:
                raise sc.error(f"{name} needs a rule name")
            instructions.append(Repeat(rule) if name == "repeat" else One(rule))
        elif name in ("setPos", "setBan"):
            sc.expect("(")
            flt = _parse_filter(sc)
            sc.expect(")")
            instructions.append(SetPos(flt) if name == "setPos" else SetBan(flt))
        else:
            raise sc.error(f"unknown instruction {name!r}")
        sc.skip_ws()
        if sc.pos < len(sc.text):
            if sc.text[sc.pos] != ";":
                raise sc.error("expected ';' between instructions")
            sc.pos += 1
    return StrategyProgram(tuple(instructions))


def _parse_filter(sc: _Scanner) -> PropertyFilter:
    head = sc.ident()
    if head != "Property":
        raise sc.error(f"unknown filter {head!r} (expected Property)")
    sc.expect("(")
    scope = sc.ident()
    if scope != "CrtGraph":
        raise sc.error(f"unknown filter scope {scope!r} (expected CrtGraph)")
    sc.expect(",")
    kind = sc.ident()
    if kind not in FILTER_KINDS:
        raise sc.error(f"filter kind must be one of {FILTER_KINDS}, got {kind!r}")
    sc.expect(",")
    attr = sc.ident()
    sc.skip_ws()
    if sc.pos < len(sc.text) and sc.text[sc.pos] == ")":
        sc.pos += 1
        pred = PropertyPredicate(attr, "exists")
    else:
        cmp = _parse_cmp(sc)
        sc.expect('"')
        raw = sc.until('"')
        sc.expect('"')
        sc.expect(")")
        pred = PropertyPredicate(attr, cmp, _coerce_filter_value(raw))
    return PropertyFilter("CrtGraph", kind, pred)


def _parse_cmp(sc: _Scanner) -> str:
    sc.skip_ws()
    for cmp in (">=", "<=", "!=", ">", "<", "="):
        if sc.text.startswith(cmp, sc.pos):
            sc.pos += len(cmp)
            return cmp
    raise sc.error("expected a comparator (=, !=, <, <=, >, >=)")


def _coerce_filter_value(raw: str):
    try:
        return float(raw)
    except ValueError:
        pass
    if raw in ("true", "false"):
        return raw == "true"
    return raw


def format_strategy(program: StrategyProgram) -> str:
    parts = []
    for ins in program:
        if isinstance(ins, Repeat):
            parts.append(f"repeat({ins.rule})")
        elif isinstance(ins, One):
            parts.append(f"one({ins.rule})")
        elif isinstance(ins, (SetPos, SetBan)):
            keyword = "setPos" if isinstance(ins, SetPos) else "setBan"
            parts.append(f"{keyword}({_format_filter(ins.filter)})")
    return ";\n".join(parts)


def _format_filter(flt: PropertyFilter) -> str:
    pred = flt.pred
    if pred.cmp == "exists":
        body = pred.attr
    else:
        body = f'{pred.attr}{pred.cmp}"{_format_filter_value(pred.operand)}"'
    return f"Property({flt.scope},{flt.kind},{body})"


def _format_filter_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return str(int(value)) if value.is_integer() else repr(value)
    return str(value)


# -- interpretation ----------------------------------------------------------

def evaluate_filter(flt: PropertyFilter, graph: PortGraph,
                    eps: float = DEFAULT_EPS) -> frozenset[int]:
    coll = {"Node": graph.nodes, "Edge": graph.edges, "Port": graph.ports}[flt.kind]
    out = []
    for eid, elem in coll.items():
        if _pred_holds(elem.record, flt.pred, eps):
            out.append(eid)
    return frozenset(out)


def _pred_holds(record, pred: PropertyPredicate, eps: float) -> bool:
    from .rules import check_predicate
    return check_predicate(record, pred, {}, eps)


class Budget:
    """Shared cap on rule applications for one simulation run."""

    __slots__ = ("remaining",)

    def __init__(self, limit: int = DEFAULT_BUDGET):
        self.remaining = limit

    def consume(self):
        if self.remaining <= 0:
            raise BudgetExceeded("application budget exhausted")
        self.remaining -= 1


@dataclass(frozen=True, slots=True)
class AppliedStep:
    rule: str
    summary: dict
    parent_state: int
    child_state: int


@dataclass(frozen=True)
class StrategyOutcome:
    located: LocatedGraph
    log: tuple[AppliedStep, ...]
    status: str  # completed | no-progress | aborted
    step_group: int
    final_state: int
    error: str | None = None


def run_strategy(program: StrategyProgram, located: LocatedGraph,
                 library: dict[str, RewriteRule], rng, mode: str,
                 tree: DerivationTree, cursor: int | None = None,
                 budget: Budget | None = None,
                 eps: float = DEFAULT_EPS) -> StrategyOutcome:
    """Execute the whole program once (= one propagation step)."""
    for ins in program:
        if isinstance(ins, (Repeat, One)) and ins.rule not in library:
            raise StrategyError(f"unknown rule {ins.rule!r}", code="UNKNOWN_RULE")
    if cursor is None:
        cursor = tree.root_id
    if budget is None:
        budget = Budget()
    gid = tree.open_step(cursor, label=None)
    log: list[AppliedStep] = []
    status, error = "completed", None
    try:
        for ins in program:
            if isinstance(ins, (Repeat, One)):
                rule = library[ins.rule]
                while True:
                    matches = find_matches(rule, located, rng, mode, eps)
                    if not matches:
                        break
                    budget.consume()
                    result = apply_rule(rule, matches[0], located, rng, tree.alloc)
                    sid = tree.commit_delta(cursor, result.delta, rule.name,
                                            result.summary, gid)
                    log.append(AppliedStep(rule.name, result.summary, cursor, sid))
                    located, cursor = result.located, sid
                    if isinstance(ins, One):
                        break
            elif isinstance(ins, SetPos):
                located = set_position(
                    located, evaluate_filter(ins.filter, located.graph, eps))
            elif isinstance(ins, SetBan):
                located = set_banned(
                    located, evaluate_filter(ins.filter, located.graph, eps))
        tree.close_step(gid)
    except (BudgetExceeded, ApplicationError) as exc:
        status, error = "aborted", f"{exc.code}: {exc}"
    return StrategyOutcome(located, tuple(log), status, gid, cursor, error)


def run_rounds(program: StrategyProgram, located: LocatedGraph,
               library: dict[str, RewriteRule], rng, mode: str,
               tree: DerivationTree, max_rounds: int, cursor: int | None = None,
               budget: Budget | None = None, eps: float = DEFAULT_EPS,
               round_hook=None) -> list[StrategyOutcome]:
    """Re-run the program until a round applies no rule, or max_rounds.

    ``round_hook(located, round_index)`` may return an updated located graph
    before each round (e.g. reloading edge probabilities); a changed graph is
    committed to the tree as one ``reload`` step so provenance stays intact.
    """
    if max_rounds < 1:
        raise StrategyError("max_rounds must be at least 1")
    if budget is None:
        budget = Budget()
    if cursor is None:
        cursor = tree.root_id
    outcomes: list[StrategyOutcome] = []
    for round_index in range(max_rounds):
        if round_hook is not None:
            updated = round_hook(located, round_index)
            if updated is not None and updated is not located:
                located, cursor = _commit_reload(tree, located, updated, cursor)
        outcome = run_strategy(program, located, library, rng, mode, tree,
                               cursor, budget, eps)
        if outcome.status == "completed" and not outcome.log:
            outcome = replace(outcome, status="no-progress")
        outcomes.append(outcome)
        if outcome.status != "completed":
            break
        located, cursor = outcome.located, outcome.final_state
        tree.retain(cursor)
    return outcomes


def _commit_reload(tree: DerivationTree, located: LocatedGraph,
                   updated: LocatedGraph, cursor: int):
    delta = diff_graphs(located.graph, updated.graph)
    if delta.is_empty():
        return updated, cursor
    touched = sorted({eid for eid, _ in delta.set_nodes}
                     | {eid for eid, _ in delta.set_ports}
                     | {eid for eid, _ in delta.set_edges}
                     | set(delta.removed))
    gid = tree.open_step(cursor, label="reload")
    sid = tree.commit_delta(cursor, delta, "reload",
                            {"rule": "reload", "image": touched}, gid)
    tree.close_step(gid)
    return updated, sid
