"""Build the property graph and query it with the Cypher subset, including the
geospatial nearest-ATM query.

Run from the repo root:  python demos/04_graph_and_cypher.py
"""

from pathlib import Path

from caprag import build_graph, execute, ingest_directory, parse_cypher

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

graph = build_graph(ingest_directory(FIXTURES / "corpus_src"))
by_label = {}
for node in graph.nodes.values():
    by_label[node.label] = by_label.get(node.label, 0) + 1
print(f"graph: {len(graph.nodes)} nodes {dict(sorted(by_label.items()))}, {len(graph.edges)} edges")


def show(title, query, params=None):
    print(f"\n{title}\n  {query}")
    table = execute(parse_cypher(query), graph, params or {})
    print(f"  -> columns {table.columns}")
    for row in table.rows:
        print(f"     {row}")


show(
    "passages mentioning a person:",
    'MATCH (c)-[:PERSON_LINK]->(p:Person {name: "Maria R."}) RETURN c.chunk_id, p.name',
)

show(
    "section ancestry via a hop range:",
    "MATCH (s:Section)-[:UNDER_SECTION*1..3]->(r:Section) RETURN s.heading, r.heading",
)

show(
    "tables and their consecutive neighbours:",
    "MATCH (t:Table)-[:CONSECUTIVE]->(n) RETURN t.table_id, n.seq ORDER BY t.table_id ASC",
)

show(
    "nearest ATM to the Ariana coordinates:",
    'MATCH (l:Location) WHERE l.kind = "ATM" '
    "RETURN l.name AS name, geodist(l.longitude, l.latitude, $lon, $lat) AS km "
    "ORDER BY geodist(l.longitude, l.latitude, $lon, $lat) ASC LIMIT 1",
    {"lon": 10.1647, "lat": 36.8665},
)
