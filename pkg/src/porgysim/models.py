"""Built-in propagation models: independent cascade and linear threshold.

Both models are expressed purely as rewrite rules plus a strategy; nothing
in the engine is specific to them. Each model uses two *trial* rules (one
per emulated edge direction, selected through the ``In``/``Out`` port
names) and one *activation* rule gated by the strategy's focus filter on
``sigma``. A node is ready to activate once ``sigma >= 1``:

* cascade: ``sigma = max(p / r, sigma)`` with ``r`` drawn from (0, 1], so a
  trial succeeds exactly when ``r <= p``;
* threshold: ``sigma = jointInfluence / theta`` where ``jointInfluence``
  is the combined probability that the active neighbourhood influences the
  node, maintained incrementally (see :func:`replace_influence`).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from importlib import resources

from .errors import ConfigError, EngineError, GraphError, ParseError
from .expressions import BinOp, Call, Lit, Prop
from .graph import DEFAULT_EPS, Edge, LocatedGraph, Node, PortGraph
from .rules import (ArrowPort, PatternEdge, PatternGraph, PatternNode,
                    PatternPort, PropertyPredicate, RewriteRule, RhsEdge,
                    RhsGraph, RhsNode, RhsPort)
from .strategy import Budget, StrategyOutcome, parse_strategy, run_rounds
from .trace import DerivationTree

# theta below this is treated as zero: any positive influence activates
# (the division sentinel keeps sigma exact for every realistic theta).
THETA_FLOOR = 1e-18
SENTINEL_SCALE = 1e18


class InfluenceError(EngineError):
    code = "INFLUENCE"


# -- joint influence mathematics -------------------------------------------

def joint_influence(probabilities) -> float:
    """Combined influence 1 - prod(1 - p) of a set of probabilities."""
    out = 1.0
    for p in probabilities:
        if not 0.0 <= p <= 1.0:
            raise InfluenceError(f"probability {p} outside [0, 1]")
        out *= 1.0 - p
    return 1.0 - out


def remove_influence(ps: float, p_uw: float) -> float:
    """Joint influence after dropping one contributor: (ps - p) / (1 - p)."""
    if p_uw >= 1.0:
        raise InfluenceError("cannot remove a certain (p = 1) influence")
    return (ps - p_uw) / (1.0 - p_uw)


def add_influence(ps: float, p_uw: float) -> float:
    """Joint influence after one more contributor: ps + (1 - ps) * p."""
    return ps + (1.0 - ps) * p_uw


def replace_influence(ps: float, p_old: float, p_new: float) -> float:
    """Swap one contributor's probability in a single combined update."""
    return add_influence(remove_influence(ps, p_old), p_new)


# -- rule construction --------------------------------------------------------

def _pred(attr, cmp, operand=None):
    return PropertyPredicate(attr, cmp, operand)


_DIRECTIONS = {
    # active node's port name, inactive node's port name, probability attr
    "d2s": ("In", "Out", "p_i2o"),
    "s2d": ("Out", "In", "p_o2i"),
}


def _trial_skeleton(name: str, direction: str, w_updates, e_updates) -> RewriteRule:
    active_port, inactive_port, _ = _DIRECTIONS[direction]
    lhs = PatternGraph(
        nodes=[PatternNode(1, "v", (_pred("active", "=", True),)),
               PatternNode(2, "w", (_pred("active", "=", False),))],
        ports=[PatternPort(3, 1, "vp", (_pred("name", "=", active_port),)),
               PatternPort(4, 2, "wp", (_pred("name", "=", inactive_port),))],
        edges=[PatternEdge(5, (3, 4), "e", (_pred("marked", "=", False),))],
    )
    rhs = RhsGraph(
        nodes=[RhsNode(6, "v2", ()), RhsNode(7, "w2", tuple(w_updates))],
        ports=[RhsPort(8, 6, "vp2", ()), RhsPort(9, 7, "wp2", ())],
        edges=[RhsEdge(10, (8, 9), "e2", tuple(e_updates))],
    )
    return RewriteRule(
        name, lhs, rhs,
        arrow_ports=(ArrowPort(100, "bridge"), ArrowPort(101, "bridge")),
        arrow_edges=((100, 3), (100, 8), (101, 4), (101, 9)),
    )


def _activate_rule(name: str) -> RewriteRule:
    lhs = PatternGraph(
        nodes=[PatternNode(1, "w", (_pred("visited", "=", True),
                                    _pred("active", "=", False)))],
        ports=[PatternPort(2, 1, "wi", (_pred("name", "=", "In"),)),
               PatternPort(3, 1, "wo", (_pred("name", "=", "Out"),))],
        edges=[],
    )
    rhs = RhsGraph(
        nodes=[RhsNode(4, "w2", (("active", Lit(True)),))],
        ports=[RhsPort(5, 4, "wi2", ()), RhsPort(6, 4, "wo2", ())],
        edges=[],
    )
    return RewriteRule(
        name, lhs, rhs,
        arrow_ports=(ArrowPort(100, "bridge"), ArrowPort(101, "bridge")),
        arrow_edges=((100, 2), (100, 5), (101, 3), (101, 6)),
    )


def build_ic_rules() -> dict[str, RewriteRule]:
    """Independent cascade: one-shot trials, best withstood influence wins."""
    rules = {}
    for direction in ("d2s", "s2d"):
        p_attr = _DIRECTIONS[direction][2]
        sigma = Call("max", (BinOp("/", Prop("e", p_attr), Call("random", (Lit(1),))),
                             Prop("w", "sigma")))
        rules[f"IC trial {direction}"] = _trial_skeleton(
            f"IC trial {direction}", direction,
            w_updates=[("visited", Lit(True)), ("sigma", sigma)],
            e_updates=[("marked", Lit(True))],
        )
    rules["IC activate"] = _activate_rule("IC activate")
    return rules


def build_lt_rules() -> dict[str, RewriteRule]:
    """Linear threshold: incremental joint influence against a threshold."""
    rules = {}
    for direction in ("d2s", "s2d"):
        p_attr = _DIRECTIONS[direction][2]
        prev_attr = f"p_prev_{p_attr[2:]}"
        ji = Prop("w", "jointInfluence")
        p = Prop("e", p_attr)
        prev = Prop("e", prev_attr)
        # influence with the previously-counted contribution taken out;
        # prev starts at 0, so the first trial is a plain addition
        base = BinOp("/", BinOp("-", ji, prev), BinOp("-", Lit(1), prev))
        new_ji = BinOp("+", base, BinOp("*", BinOp("-", Lit(1), base), p))
        sigma = Call("min", (
            BinOp("*", new_ji, Lit(SENTINEL_SCALE)),
            BinOp("/", new_ji, Call("max", (Prop("w", "theta"), Lit(THETA_FLOOR)))),
        ))
        rules[f"LT trial {direction}"] = _trial_skeleton(
            f"LT trial {direction}", direction,
            w_updates=[("visited", Lit(True)), ("jointInfluence", new_ji),
                       ("sigma", sigma)],
            e_updates=[("marked", Lit(True)), (prev_attr, p)],
        )
    rules["LT activate"] = _activate_rule("LT activate")
    return rules


def builtin_rules(model: str) -> dict[str, RewriteRule]:
    if model == "ic":
        return build_ic_rules()
    if model == "lt":
        return build_lt_rules()
    raise ConfigError(f"unknown model {model!r} (expected ic or lt)")


def builtin_strategy_text(model: str, strict_sigma: bool = False) -> str:
    if model not in ("ic", "lt"):
        raise ConfigError(f"unknown model {model!r} (expected ic or lt)")
    text = resources.files("porgysim").joinpath(f"strategies/{model}.strat").read_text()
    if strict_sigma:
        text = text.replace('sigma>="1"', 'sigma>"1"')
    return text


# -- configuration ----------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class DistSpec:
    """Initial-value source: constant, uniform range, or per-edge file."""

    kind: str  # const | uniform | file
    a: float = 0.0
    b: float = 0.0
    path: str | None = None

    def draw(self, rng) -> float:
        if self.kind == "const":
            return self.a
        if self.kind == "uniform":
            return rng.uniform(self.a, self.b)
        raise ConfigError("per-edge files cannot be sampled per element")

    def describe(self) -> str:
        if self.kind == "const":
            return f"const:{self.a}"
        if self.kind == "uniform":
            return f"uniform:{self.a},{self.b}"
        return f"file:{self.path}"


def parse_dist(spec) -> DistSpec:
    if isinstance(spec, DistSpec):
        return spec
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        spec = f"const:{spec}"
    if not isinstance(spec, str) or ":" not in spec:
        raise ConfigError(f"bad distribution spec {spec!r} "
                          "(use const:X, uniform:LO,HI or file:PATH)")
    kind, _, rest = spec.partition(":")
    if kind == "const":
        value = _float_or_error(rest, spec)
        _check_unit(value, spec)
        return DistSpec("const", value, value)
    if kind == "uniform":
        parts = rest.split(",")
        if len(parts) != 2:
            raise ConfigError(f"uniform needs two bounds, got {spec!r}")
        lo, hi = (_float_or_error(p, spec) for p in parts)
        if lo > hi:
            raise ConfigError(f"uniform bounds out of order in {spec!r}")
        _check_unit(lo, spec)
        _check_unit(hi, spec)
        return DistSpec("uniform", lo, hi)
    if kind == "file":
        return DistSpec("file", path=rest)
    raise ConfigError(f"unknown distribution kind {kind!r} in {spec!r}")


def _float_or_error(text, spec):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"bad number {text!r} in distribution spec {spec!r}") from None


def _check_unit(value, spec):
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"distribution {spec!r} leaves the [0, 1] range")


@dataclass(frozen=True)
class ModelConfig:
    model: str
    seeds: tuple = ()
    p: DistSpec = field(default_factory=lambda: DistSpec("const", 0.5, 0.5))
    theta: DistSpec | None = None
    rng_seed: int = 0
    max_rounds: int = 100
    mode: str = "random"
    strict_sigma: bool = False
    eps: float = DEFAULT_EPS
    budget: int = 1_000_000

    def __post_init__(self):
        if self.model not in ("ic", "lt"):
            raise ConfigError(f"unknown model {self.model!r} (expected ic or lt)")
        if not self.seeds:
            raise ConfigError("at least one seed node is required")
        if self.mode not in ("random", "deterministic"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "p", parse_dist(self.p))
        if self.theta is not None:
            object.__setattr__(self, "theta", parse_dist(self.theta))
        if self.model == "lt" and self.theta is None:
            raise ConfigError("theta required for LT", code="THETA_REQUIRED")


def load_model_config(path, **overrides) -> ModelConfig:
    """Read a config file ([model], [init], [rng] sections; TOML or JSON)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    text = raw.decode("utf-8")
    doc = None
    if str(path).endswith(".json") or text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    else:
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            doc = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ParseError(str(exc)) from exc
    model = doc.get("model", {})
    init = doc.get("init", {})
    rng = doc.get("rng", {})
    fields = {
        "model": model.get("kind"),
        "seeds": tuple(model.get("seeds", ())),
        "max_rounds": model.get("max_rounds", 100),
        "mode": model.get("mode", "random"),
        "strict_sigma": model.get("strict_sigma", False),
        "p": init.get("p", "const:0.5"),
        "theta": init.get("theta"),
        "rng_seed": rng.get("seed", 0),
    }
    fields.update({k: v for k, v in overrides.items() if v is not None})
    if fields["model"] is None:
        raise ConfigError("config is missing model.kind")
    return ModelConfig(**fields)


# -- simulation setup ------------------------------------------------------------------

def resolve_seed(graph: PortGraph, token) -> int:
    """Seed reference: a node id, 'n<id>', or a node 'label' property."""
    if isinstance(token, int):
        if token in graph.nodes:
            return token
        raise ConfigError(f"seed node {token} is not in the graph")
    text = str(token)
    if text.isdigit() and int(text) in graph.nodes:
        return int(text)
    if text.startswith("n") and text[1:].isdigit() and int(text[1:]) in graph.nodes:
        return int(text[1:])
    for nid, node in graph.nodes.items():
        if node.record.get("label") == text:
            return nid
    raise ConfigError(f"seed node {token!r} is not in the graph")


def _edge_file_table(path) -> dict[frozenset, tuple[float, float]]:
    table = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if len(parts) != 4:
                raise ParseError("edge probability lines need: u v p_i2o p_o2i",
                                 line=lineno)
            u, v = int(parts[0]), int(parts[1])
            table[frozenset((u, v))] = (float(parts[2]), float(parts[3]))
    return table


def setup_simulation(graph: PortGraph, config: ModelConfig, rng=None) -> LocatedGraph:
    """Materialize the propagation properties and focus the whole graph.

    Seeds start active; every other node is inactive and unvisited. Edge
    probabilities are drawn before node thresholds so that two models set
    up from the same rng seed see identical probability draws.
    """
    if rng is None:
        rng = random.Random(config.rng_seed)
    seed_ids = {resolve_seed(graph, s) for s in config.seeds}

    p_table = None
    if config.p.kind == "file":
        p_table = _edge_file_table(config.p.path)

    set_edges = {}
    for eid in sorted(graph.edges):
        edge = graph.edges[eid]
        if p_table is not None:
            u = graph.ports[edge.ends[0]].node
            v = graph.ports[edge.ends[1]].node
            try:
                p_i2o, p_o2i = p_table[frozenset((u, v))]
            except KeyError:
                raise ConfigError(f"no probabilities for edge between nodes {u} and {v}")
        else:
            p_i2o = config.p.draw(rng)
            p_o2i = config.p.draw(rng)
        for value in (p_i2o, p_o2i):
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"edge probability {value} outside [0, 1]")
        entries = [("marked", False), ("p_i2o", p_i2o), ("p_o2i", p_o2i)]
        if config.model == "lt":
            entries += [("p_prev_i2o", 0.0), ("p_prev_o2i", 0.0)]
        set_edges[eid] = Edge(eid, edge.ends, edge.record.with_values(entries))

    set_nodes = {}
    for nid in sorted(graph.nodes):
        node = graph.nodes[nid]
        entries = [("active", nid in seed_ids), ("visited", False), ("sigma", 0.0)]
        if config.model == "lt":
            theta = config.theta.draw(rng)
            if not 0.0 <= theta <= 1.0:
                raise ConfigError(f"theta {theta} outside [0, 1]")
            entries += [("theta", theta), ("jointInfluence", 0.0)]
        set_nodes[nid] = Node(nid, node.record.with_values(entries))

    try:
        prepared = graph.with_changes(set_nodes=set_nodes, set_edges=set_edges)
    except GraphError as exc:
        raise ConfigError(str(exc)) from exc
    return LocatedGraph.whole(prepared)


def reload_probabilities(located: LocatedGraph, table) -> LocatedGraph:
    """Swap in new edge probabilities between rounds (time-varying models).

    ``table`` maps ``frozenset((u, v))`` node pairs to ``(p_i2o, p_o2i)``.
    Edges whose probability actually changed get their ``marked`` flag
    cleared, re-enabling exactly one more trial per affected pair; the
    previously counted contribution stays in ``p_prev_*``, so the trial's
    combined update replaces the old influence instead of double-counting.
    A change also refocuses the whole graph (the previous round's focus may
    be empty when nothing activated). The engine itself never mutates
    probabilities: call this from a ``round_hook`` (see ``run_rounds``).
    """
    g = located.graph
    set_edges = {}
    for eid, edge in g.edges.items():
        u = g.ports[edge.ends[0]].node
        v = g.ports[edge.ends[1]].node
        pair = table.get(frozenset((u, v)))
        if pair is None:
            continue
        new_i2o, new_o2i = pair
        for value in pair:
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"edge probability {value} outside [0, 1]")
        entries = []
        if edge.record.get("p_i2o") != new_i2o:
            entries.append(("p_i2o", new_i2o))
        if edge.record.get("p_o2i") != new_o2i:
            entries.append(("p_o2i", new_o2i))
        if entries:
            entries.append(("marked", False))
            set_edges[eid] = Edge(eid, edge.ends, edge.record.with_values(entries))
    if not set_edges:
        return located
    updated = g.with_changes(set_edges=set_edges)
    return LocatedGraph(updated, frozenset(updated.all_element_ids()),
                        located.banned)


def probability_reload_hook(source):
    """Round hook reloading probabilities from a file path or a table."""
    def hook(located, round_index):
        table = source if isinstance(source, dict) else _edge_file_table(source)
        return reload_probabilities(located, table)
    return hook


# -- end-to-end run ---------------------------------------------------------------------

@dataclass(frozen=True)
class SimulationResult:
    tree: DerivationTree
    outcomes: tuple[StrategyOutcome, ...]
    final: LocatedGraph
    leaf: int

    @property
    def rounds_run(self) -> int:
        return len(self.outcomes)

    @property
    def applications(self) -> int:
        return sum(len(o.log) for o in self.outcomes)


def run_simulation(graph: PortGraph, config: ModelConfig, *,
                   setup_rng=None, run_rng=None) -> SimulationResult:
    """Setup + repeated strategy execution until fixpoint or round cap."""
    rng = setup_rng or random.Random(config.rng_seed)
    located = setup_simulation(graph, config, rng)
    library = builtin_rules(config.model)
    program = parse_strategy(builtin_strategy_text(config.model, config.strict_sigma))
    tree = DerivationTree(located.graph)
    outcomes = run_rounds(program, located, library, run_rng or rng, config.mode,
                          tree, config.max_rounds, budget=Budget(config.budget),
                          eps=config.eps)
    final = outcomes[-1].located
    leaf = outcomes[-1].final_state
    return SimulationResult(tree, tuple(outcomes), final, leaf)
