import itertools
import random

import pytest

from porgysim.graph import GraphBuilder, LocatedGraph
from porgysim.rules import Var


def build_star(leaves=3):
    """K_{1,n}: center node 1 with edges center.Out -- leaf.In."""
    b = GraphBuilder()
    center = b.add_node({"label": "n1"})
    c_in = b.add_port(center, {"name": "In"})
    c_out = b.add_port(center, {"name": "Out"})
    for i in range(2, leaves + 2):
        n = b.add_node({"label": f"n{i}"})
        n_in = b.add_port(n, {"name": "In"})
        b.add_port(n, {"name": "Out"})
        b.add_edge(c_out, n_in)
    return b.build()


def build_path(n=3):
    """Path n1 - n2 - ... - n_k, each edge previous.Out -- next.In."""
    b = GraphBuilder()
    prev_out = None
    for i in range(1, n + 1):
        node = b.add_node({"label": f"n{i}"})
        n_in = b.add_port(node, {"name": "In"})
        n_out = b.add_port(node, {"name": "Out"})
        if prev_out is not None:
            b.add_edge(prev_out, n_in)
        prev_out = n_out
    return b.build()


def build_pair(active_in_port=True, marked=False, p_i2o=0.5, p_o2i=0.5,
               v_active=True, w_active=False):
    """Two nodes joined by one edge, already carrying propagation properties.

    With ``active_in_port`` the active node v attaches through its In port
    (the d2s orientation), otherwise through Out.
    """
    b = GraphBuilder()
    v = b.add_node({"label": "n1", "active": v_active, "visited": False, "sigma": 0.0})
    v_in = b.add_port(v, {"name": "In"})
    v_out = b.add_port(v, {"name": "Out"})
    w = b.add_node({"label": "n2", "active": w_active, "visited": False, "sigma": 0.0})
    w_in = b.add_port(w, {"name": "In"})
    w_out = b.add_port(w, {"name": "Out"})
    ends = (v_in, w_out) if active_in_port else (v_out, w_in)
    b.add_edge(*ends, {"marked": marked, "p_i2o": p_i2o, "p_o2i": p_o2i})
    return b.build(), v, w


class StubRng:
    """random()-compatible stub returning scripted values."""

    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)

    def shuffle(self, items):
        pass

    def randrange(self, n):
        return 0


# -- independent brute-force matcher (test oracle) -------------------------

def _oracle_pred_ok(record, pred, eps=1e-9):
    if pred.attr not in record:
        return False
    if pred.cmp == "exists":
        return True
    value = record.get(pred.attr)
    operand = pred.operand
    assert not isinstance(operand, Var), "oracle does not model variables"
    if isinstance(value, bool) or isinstance(operand, bool):
        return (value is operand) if pred.cmp == "=" else (value is not operand)
    if isinstance(value, str) or isinstance(operand, str):
        return (value == operand) if pred.cmp == "=" else (value != operand)
    a, t = float(value), float(operand)
    return {"=": abs(a - t) <= eps, "!=": abs(a - t) > eps,
            "<": a < t - eps, "<=": a <= t + eps,
            ">": a > t + eps, ">=": a >= t - eps}[pred.cmp]


def brute_force_matches(rule, located: LocatedGraph, eps=1e-9):
    """Enumerate every injective embedding of rule.lhs by exhaustion."""
    g = located.graph
    lhs = rule.lhs
    lnodes = sorted(lhs.nodes)
    results = []
    for assignment in itertools.permutations(sorted(g.nodes), len(lnodes)):
        node_map = dict(zip(lnodes, assignment))
        if not all(_oracle_pred_ok(g.nodes[h].record, p, eps)
                   for ln, h in node_map.items() for p in lhs.nodes[ln].preds):
            continue
        per_node_choices = []
        feasible = True
        for ln in lnodes:
            lports = sorted(lhs.node_ports[ln])
            hports = sorted(g.node_ports(node_map[ln]))
            choices = []
            for sel in itertools.permutations(hports, len(lports)):
                pairs = list(zip(lports, sel))
                if all(_oracle_pred_ok(g.ports[hp].record, p, eps)
                       for lp, hp in pairs for p in lhs.ports[lp].preds):
                    choices.append(dict(pairs))
            if not choices:
                feasible = False
                break
            per_node_choices.append(choices)
        if not feasible:
            continue
        for combo in itertools.product(*per_node_choices):
            port_map = {}
            for part in combo:
                port_map.update(part)
            edge_map = {}
            good = True
            for leid in sorted(lhs.edges):
                ledge = lhs.edges[leid]
                heid = g.edge_between(port_map[ledge.ends[0]], port_map[ledge.ends[1]])
                if heid is None or not all(
                        _oracle_pred_ok(g.edges[heid].record, p, eps)
                        for p in ledge.preds):
                    good = False
                    break
                edge_map[leid] = heid
            if not good:
                continue
            morphism = {**node_map, **port_map, **edge_map}
            image = set(morphism.values())
            if image & set(located.banned):
                continue
            if not image & set(located.position):
                continue
            results.append(morphism)
    return results


@pytest.fixture
def rng():
    return random.Random(1234)
