from __future__ import annotations

import random
from collections import Counter

import pytest

from caprag.cypher import CypherExecutionError, execute, parse_cypher
from caprag.graph_store import PropertyGraph, build_graph

from conftest import three_chunk_corpus
from generators import random_property_graph, random_query
from oracles import oracle_execute, plain_graph


@pytest.fixture()
def chunk_graph():
    return build_graph(three_chunk_corpus())


def test_linked_pairs_on_fixture(chunk_graph):
    ast = parse_cypher("MATCH (c:Chunk)-[:LINKED]->(d:Chunk) RETURN c.chunk_id, d.chunk_id")
    table = execute(ast, chunk_graph)
    assert table.columns == ["c.chunk_id", "d.chunk_id"]
    assert len(table.rows) == 2
    assert Counter(table.rows) == Counter(oracle_execute(ast, plain_graph(chunk_graph)))


def test_no_person_nodes_zero_rows(chunk_graph):
    ast = parse_cypher("MATCH (n:Person) RETURN n.name")
    assert execute(ast, chunk_graph).rows == []


def test_property_map_filtering(chunk_graph):
    ast = parse_cypher('MATCH (c:Chunk {seq: 1}) RETURN c.chunk_id')
    assert execute(ast, chunk_graph).rows == [("d:chunk:1",)]


def test_hop_range_ancestor_scan():
    graph = PropertyGraph()
    # Section chain s0 <- s1 <- s2 <- s3 via UNDER_SECTION (child -> parent).
    ids = [graph.add_node("Section", {"heading": f"s{i}"}) for i in range(4)]
    for child, parent in ((1, 0), (2, 1), (3, 2)):
        graph.add_edge("UNDER_SECTION", ids[child], ids[parent])
    ast = parse_cypher(
        "MATCH (s:Section)-[:UNDER_SECTION*1..3]->(r:Section) WHERE r.heading = $h "
        "RETURN s.heading"
    )
    table = execute(ast, graph, {"h": "s0"})
    assert Counter(table.rows) == Counter([("s1",), ("s2",), ("s3",)])
    assert Counter(table.rows) == Counter(
        oracle_execute(ast, plain_graph(graph), {"h": "s0"})
    )


def test_relationship_uniqueness_within_match():
    graph = PropertyGraph()
    a = graph.add_node("Chunk", {"n": "a"})
    b = graph.add_node("Chunk", {"n": "b"})
    graph.add_edge("LINKED", a, b)
    # A 2-hop out-and-back would need to reuse the single edge; "any" direction
    # makes the reverse step available, but relationship uniqueness forbids it.
    ast = parse_cypher("MATCH (x)-[:LINKED*2..2]-(y) RETURN x.n, y.n")
    assert execute(ast, graph).rows == []


def test_missing_parameter_is_execution_error(chunk_graph):
    ast = parse_cypher("MATCH (c:Chunk) WHERE c.seq = $wanted RETURN c.chunk_id")
    with pytest.raises(CypherExecutionError):
        execute(ast, chunk_graph, {})


def test_missing_property_is_null_not_error(chunk_graph):
    ast = parse_cypher("MATCH (c:Chunk) RETURN c.no_such_property")
    table = execute(ast, chunk_graph)
    assert table.rows == [(None,), (None,), (None,)]


def test_null_comparison_excludes_row(chunk_graph):
    ast = parse_cypher("MATCH (c:Chunk) WHERE c.no_such_property = 1 RETURN c.chunk_id")
    table = execute(ast, chunk_graph)
    assert table.rows == []
    assert table.type_mismatches == 0


def test_type_mismatch_counted_and_excluded(chunk_graph):
    ast = parse_cypher('MATCH (c:Chunk) WHERE c.seq = "one" RETURN c.chunk_id')
    table = execute(ast, chunk_graph)
    assert table.rows == []
    assert table.type_mismatches == 3


def test_not_of_unknown_stays_unknown(chunk_graph):
    # NOT(type mismatch) must not smuggle rows back in.
    ast = parse_cypher('MATCH (c:Chunk) WHERE NOT c.seq = "one" RETURN c.chunk_id')
    assert execute(ast, chunk_graph).rows == []


def test_order_by_desc_and_limit(chunk_graph):
    ast = parse_cypher("MATCH (c:Chunk) RETURN c.chunk_id ORDER BY c.seq DESC LIMIT 2")
    assert execute(ast, chunk_graph).rows == [("d:chunk:2",), ("d:chunk:1",)]


def test_order_by_nulls_last():
    graph = PropertyGraph()
    graph.add_node("Chunk", {"name": "has", "w": 1})
    graph.add_node("Chunk", {"name": "missing"})
    ast = parse_cypher("MATCH (c:Chunk) RETURN c.name ORDER BY c.w ASC")
    assert execute(ast, graph).rows == [("has",), ("missing",)]
    ast = parse_cypher("MATCH (c:Chunk) RETURN c.name ORDER BY c.w DESC")
    assert execute(ast, graph).rows == [("has",), ("missing",)]


def test_anonymous_nodes_multiply_rows(chunk_graph):
    # Each LINKED edge contributes one binding of the anonymous endpoint.
    ast = parse_cypher("MATCH (c:Chunk)-[:LINKED]->() RETURN c.chunk_id")
    assert Counter(execute(ast, chunk_graph).rows) == Counter(
        [("d:chunk:0",), ("d:chunk:1",)]
    )


def test_multi_pattern_cross_product(chunk_graph):
    ast = parse_cypher(
        "MATCH (a:Section), (b:Section) WHERE a.heading < b.heading RETURN a.heading, b.heading"
    )
    assert execute(ast, chunk_graph).rows == [("Alpha", "Beta")]


def test_geodist_in_query_matches_direct_call():
    from caprag.cypher import geodist_km

    graph = PropertyGraph()
    graph.add_node("Location", {"name": "paris", "longitude": 2.3522, "latitude": 48.8566})
    ast = parse_cypher(
        "MATCH (l:Location) RETURN l.name, geodist(l.longitude, l.latitude, $lon, $lat)"
    )
    table = execute(ast, graph, {"lon": -0.1276, "lat": 51.5072})
    assert table.rows[0][0] == "paris"
    assert table.rows[0][1] == pytest.approx(geodist_km(2.3522, 48.8566, -0.1276, 51.5072))


def test_geodist_wrong_arity_rejected():
    graph = PropertyGraph()
    graph.add_node("Location", {"longitude": 1.0})
    ast = parse_cypher("MATCH (l:Location) RETURN geodist(l.longitude, l.longitude)")
    with pytest.raises(CypherExecutionError):
        execute(ast, graph)


def test_unknown_function_rejected(chunk_graph):
    ast = parse_cypher("MATCH (c:Chunk) RETURN mystery(c.seq)")
    with pytest.raises(CypherExecutionError):
        execute(ast, chunk_graph)


def test_oracle_equivalence_random():
    """Random grammar-conformant queries over random graphs agree with the
    naive enumerate-all-bindings oracle on the full row multiset."""
    rng = random.Random(1234)
    for _ in range(60):
        graph = random_property_graph(rng)
        query, params = random_query(rng)
        engine_rows = execute(query, graph, params).rows
        oracle_rows = oracle_execute(query, plain_graph(graph), params)
        if query.order_by is None and query.limit is None:
            assert Counter(engine_rows) == Counter(oracle_rows)
        else:
            assert engine_rows == oracle_rows
