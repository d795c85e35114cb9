"""Reproducible input networks: a random generator and edge-list ingestion.

The generator grows a simple graph by attaching each new node to ``m``
existing ones (preferential or uniform choice), optionally closing triads
by redirecting attachments to a neighbour of the first target. Every node
gets one ``In`` and one ``Out`` port and a ``label`` property ``n<id>``;
edge orientation (which endpoint uses which port) is drawn from the seed
too, so both emulated directions occur.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

from .errors import ConfigError, ParseError
from .graph import Edge, Node, Port, PortGraph, Record

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class GeneratorConfig:
    node_count: int
    attachment: str = "preferential"  # preferential | uniform
    edges_per_new_node: int = 2
    triad_closure_prob: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        if self.node_count < 1:
            raise ConfigError("node_count must be at least 1")
        if self.attachment not in ("preferential", "uniform"):
            raise ConfigError(f"unknown attachment {self.attachment!r}")
        if self.edges_per_new_node < 1:
            raise ConfigError("edges_per_new_node must be at least 1")
        if not 0.0 <= self.triad_closure_prob <= 1.0:
            raise ConfigError("triad_closure_prob must lie in [0, 1]")


class _Assembler:
    """Builds nodes 1..n with In/Out ports at predictable ids."""

    def __init__(self, n: int):
        self.n = n
        self.nodes = {i: Node(i, Record({"label": f"n{i}"})) for i in range(1, n + 1)}
        self.ports: dict[int, Port] = {}
        for i in range(1, n + 1):
            in_id, out_id = self.in_port(i), self.out_port(i)
            self.ports[in_id] = Port(in_id, i, Record({"name": "In"}))
            self.ports[out_id] = Port(out_id, i, Record({"name": "Out"}))
        self.edges: dict[int, Edge] = {}
        self.next_edge = 3 * n + 1

    def in_port(self, node: int) -> int:
        return self.n + 2 * (node - 1) + 1

    def out_port(self, node: int) -> int:
        return self.n + 2 * (node - 1) + 2

    def connect(self, source: int, dest: int) -> int:
        eid = self.next_edge
        self.next_edge += 1
        self.edges[eid] = Edge(eid, (self.out_port(source), self.in_port(dest)),
                               Record())
        return eid

    def build(self) -> PortGraph:
        return PortGraph(self.nodes, self.ports, self.edges)


def generate(config: GeneratorConfig) -> PortGraph:
    rng = random.Random(config.rng_seed)
    asm = _Assembler(config.node_count)
    degree = {i: 0 for i in range(1, config.node_count + 1)}
    neighbours: dict[int, list[int]] = {i: [] for i in degree}

    def link(a: int, b: int):
        # orientation is cosmetic for undirected reachability; randomize it
        # so that both In->Out and Out->In patterns occur
        if rng.random() < 0.5:
            a, b = b, a
        asm.connect(a, b)
        degree[a] += 1
        degree[b] += 1
        neighbours[a].append(b)
        neighbours[b].append(a)

    for new in range(2, config.node_count + 1):
        existing = list(range(1, new))
        m = min(config.edges_per_new_node, len(existing))
        chosen: list[int] = []
        for k in range(m):
            candidates = [v for v in existing if v not in chosen]
            if not candidates:
                break
            target = None
            if k > 0 and chosen and rng.random() < config.triad_closure_prob:
                closers = [v for v in neighbours[chosen[0]]
                           if v != new and v not in chosen]
                if closers:
                    target = rng.choice(sorted(set(closers)))
            if target is None:
                if config.attachment == "preferential":
                    weights = [degree[v] + 1 for v in candidates]
                    target = rng.choices(candidates, weights=weights, k=1)[0]
                else:
                    target = rng.choice(candidates)
            chosen.append(target)
            link(new, target)
    graph = asm.build()
    log.info("generated network: %d nodes, %d edges", len(graph.nodes), len(graph.edges))
    return graph


def import_edge_list(text: str | bytes) -> PortGraph:
    """Parse whitespace-separated ``u v [p_i2o p_o2i]`` lines.

    Nodes are materialized with In/Out ports; duplicate node pairs are
    collapsed (keeping the first) with a warning.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    pairs: list[tuple[int, int, float | None, float | None]] = []
    node_ids: set[int] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if len(parts) not in (2, 4):
            raise ParseError("expected 'u v' or 'u v p_i2o p_o2i'", line=lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"bad node id in {line.strip()!r}", line=lineno) from None
        if u == v:
            raise ParseError("self-loops are not supported", line=lineno)
        p_i2o = p_o2i = None
        if len(parts) == 4:
            try:
                p_i2o, p_o2i = float(parts[2]), float(parts[3])
            except ValueError:
                raise ParseError(f"bad probability in {line.strip()!r}",
                                 line=lineno) from None
        pairs.append((u, v, p_i2o, p_o2i))
        node_ids.update((u, v))

    n = max(node_ids) if node_ids else 0
    asm = _Assembler(n)
    if node_ids:
        asm.nodes = {i: asm.nodes[i] for i in sorted(node_ids)}
        asm.ports = {pid: port for pid, port in asm.ports.items()
                     if port.node in node_ids}
    seen: set[frozenset] = set()
    for u, v, p_i2o, p_o2i in pairs:
        key = frozenset((u, v))
        if key in seen:
            log.warning("duplicate edge between nodes %d and %d collapsed", u, v)
            continue
        seen.add(key)
        eid = asm.connect(u, v)
        if p_i2o is not None:
            edge = asm.edges[eid]
            asm.edges[eid] = Edge(eid, edge.ends,
                                  Record({"p_i2o": p_i2o, "p_o2i": p_o2i}))
    return asm.build()
