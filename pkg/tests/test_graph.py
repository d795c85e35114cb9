import pytest

from porgysim.errors import GraphError
from porgysim.graph import (GraphBuilder, LocatedGraph, PortGraph, Record, Ref,
                            diff_graphs, kind_of, set_banned, set_position,
                            validate)

from conftest import build_star


def test_empty_graph_is_valid():
    graph = GraphBuilder().build()
    validate(graph)
    assert graph.element_count() == 0


def test_minimal_adjacency():
    b = GraphBuilder()
    n1 = b.add_node()
    n2 = b.add_node()
    p1 = b.add_port(n1, {"name": "In"})
    b.add_port(n1, {"name": "Out"})
    b.add_port(n2, {"name": "In"})
    p4 = b.add_port(n2, {"name": "Out"})
    b.add_edge(p1, p4)
    g = b.build()
    assert len(g.nodes) == 2 and len(g.ports) == 4 and len(g.edges) == 1
    validate(g)


def test_duplicate_edge_rejected():
    b = GraphBuilder()
    n1, n2 = b.add_node(), b.add_node()
    p1, p2 = b.add_port(n1), b.add_port(n2)
    b.add_edge(p1, p2)
    with pytest.raises(GraphError, match="duplicate edge"):
        b.add_edge(p1, p2)
    with pytest.raises(GraphError, match="duplicate edge"):
        b.add_edge(p2, p1)


def test_orphan_port_and_dangling_edge_rejected():
    b = GraphBuilder()
    with pytest.raises(GraphError):
        b.add_port(99)
    n = b.add_node()
    p = b.add_port(n)
    with pytest.raises(GraphError):
        b.add_edge(p, 12345)


def test_record_duplicate_attribute():
    with pytest.raises(GraphError, match="duplicate attribute"):
        Record([("a", 1), ("a", 2)])


def test_record_kind_stability():
    rec = Record({"sigma": 0.0})
    rec2 = rec.with_values([("sigma", 1.5)])
    assert rec2.get("sigma") == 1.5
    with pytest.raises(GraphError, match="cannot assign"):
        rec.with_values([("sigma", True)])


def test_record_order_matters_for_equality():
    assert Record([("a", 1), ("b", 2)]) != Record([("b", 2), ("a", 1)])
    assert Record([("a", 1), ("b", 2)]) == Record([("a", 1), ("b", 2)])


def test_kind_of():
    assert kind_of(True) == "bool"
    assert kind_of(3) == "int"
    assert kind_of(0.5) == "real"
    assert kind_of("x") == "text"
    assert kind_of(Ref(7)) == "ref"
    with pytest.raises(GraphError):
        kind_of([1])


def test_get_property_and_absence():
    star = build_star()
    node = min(star.nodes)
    assert star.get_property(node, "label") == "n1"
    assert star.get_property(node, "theta") is None
    with pytest.raises(GraphError, match="unknown element"):
        star.get_property(10**9, "x")


def test_set_position_and_ban():
    star = build_star()
    located = LocatedGraph.whole(star)
    nodes = frozenset(star.nodes)
    located = set_position(located, nodes)
    assert located.position == nodes
    located = set_position(located, [])
    assert located.position == frozenset()
    located = set_banned(located, [min(nodes)])
    assert located.banned == {min(nodes)}
    with pytest.raises(GraphError):
        set_position(located, [10**9])


def test_with_changes_shares_untouched_elements():
    star = build_star()
    nid = min(star.nodes)
    node = star.nodes[nid]
    changed = star.with_changes(
        set_nodes={nid: type(node)(nid, node.record.with_values([("active", True)]))})
    untouched = [i for i in star.nodes if i != nid]
    for i in untouched:
        assert changed.nodes[i] is star.nodes[i]
    # record-only change keeps the adjacency indexes shared
    assert changed._node_ports is star._node_ports
    removed = star.with_changes(removed=[max(star.edges)])
    assert removed._node_ports is not star._node_ports
    validate(removed)


def test_diff_graphs_roundtrip():
    star = build_star()
    nid = min(star.nodes)
    node = star.nodes[nid]
    child = star.with_changes(
        set_nodes={nid: type(node)(nid, node.record.with_values([("active", True)]))},
        removed=[max(star.edges)])
    delta = diff_graphs(star, child)
    assert delta.apply(star) == child


def test_duplicate_ids_across_kinds_rejected():
    from porgysim.graph import Node, Port
    nodes = {1: Node(1, Record())}
    ports = {1: Port(1, 1, Record())}
    with pytest.raises(GraphError, match="used more than once"):
        PortGraph(nodes, ports, {})
