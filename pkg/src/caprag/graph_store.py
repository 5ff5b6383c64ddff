"""In-memory property graph and the schema builder that populates it.

Node labels: Document, Section, Chunk, Table, Person, Product, Location.
Edge types and their endpoints, as emitted by :func:`build_graph`:

- ``UNDER_SECTION``  Section -> parent Section (non-root sections only)
- ``HAS_DOCUMENT``   Section -> Document (every section)
- ``HAS_PARENT``     Chunk|Table -> owning Section
- ``LINKED``         Chunk -> next Chunk in document seq order, tables skipped
- ``CONSECUTIVE``    Table -> the immediately previous and next seq item
- ``PERSON_LINK``    Chunk|Table -> Person
- ``PRODUCT_LINK``   Chunk|Table -> Product
- ``LOCATED_IN``     Chunk|Table -> Location

``LOCATED_IN`` is the extension slot for location linkage, symmetric with the
named person/product links. Node ids are dense integers assigned in
deterministic corpus order so exports are stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .corpus import ChunkRecord, Corpus
from .errors import ContractError

NODE_LABELS = ("Document", "Section", "Chunk", "Table", "Person", "Product", "Location")
EDGE_TYPES = (
    "UNDER_SECTION",
    "HAS_DOCUMENT",
    "HAS_PARENT",
    "LINKED",
    "CONSECUTIVE",
    "PERSON_LINK",
    "PRODUCT_LINK",
    "LOCATED_IN",
)

PropertyValue = str | float | int | bool


@dataclass(frozen=True)
class GraphNode:
    node_id: int
    label: str
    properties: dict[str, PropertyValue]


@dataclass(frozen=True)
class GraphEdge:
    edge_id: int
    type: str
    src: int
    dst: int


class PropertyGraph:
    """Directed multigraph with label and (label, property) lookup support."""

    def __init__(self):
        self.nodes: dict[int, GraphNode] = {}
        self.edges: dict[int, GraphEdge] = {}
        self._out: dict[int, dict[str, list[GraphEdge]]] = {}
        self._in: dict[int, dict[str, list[GraphEdge]]] = {}
        self._by_label: dict[str, list[int]] = {}

    def __len__(self) -> int:
        return len(self.nodes)

    def add_node(
        self, label: str, properties: dict[str, PropertyValue], node_id: int | None = None
    ) -> int:
        if label not in NODE_LABELS:
            raise ContractError(f"unknown node label {label!r}")
        if node_id is None:
            node_id = len(self.nodes)
        if node_id in self.nodes:
            raise ContractError(f"duplicate node id {node_id}")
        self.nodes[node_id] = GraphNode(node_id=node_id, label=label, properties=dict(properties))
        self._out[node_id] = {}
        self._in[node_id] = {}
        self._by_label.setdefault(label, []).append(node_id)
        return node_id

    def add_edge(self, edge_type: str, src: int, dst: int, edge_id: int | None = None) -> int:
        if edge_type not in EDGE_TYPES:
            raise ContractError(f"unknown edge type {edge_type!r}")
        if src not in self.nodes or dst not in self.nodes:
            raise ContractError(f"edge {edge_type} endpoints {src}->{dst} must exist")
        if edge_id is None:
            edge_id = len(self.edges)
        if edge_id in self.edges:
            raise ContractError(f"duplicate edge id {edge_id}")
        edge = GraphEdge(edge_id=edge_id, type=edge_type, src=src, dst=dst)
        self.edges[edge_id] = edge
        self._out[src].setdefault(edge_type, []).append(edge)
        self._in[dst].setdefault(edge_type, []).append(edge)
        return edge_id

    def nodes_with_label(self, label: str) -> list[int]:
        return list(self._by_label.get(label, []))

    def find(self, label: str, prop: str, value: PropertyValue) -> list[int]:
        return [
            nid
            for nid in self._by_label.get(label, [])
            if self.nodes[nid].properties.get(prop) == value
        ]

    def out_edges(self, node_id: int, edge_type: str | None = None) -> list[GraphEdge]:
        table = self._out.get(node_id, {})
        if edge_type is None:
            return [e for group in table.values() for e in group]
        return list(table.get(edge_type, []))

    def in_edges(self, node_id: int, edge_type: str | None = None) -> list[GraphEdge]:
        table = self._in.get(node_id, {})
        if edge_type is None:
            return [e for group in table.values() for e in group]
        return list(table.get(edge_type, []))


def neighbors(graph: PropertyGraph, node_id: int, edge_type: str, direction: str) -> list[int]:
    """Adjacent node ids via edges of one type and direction, deduped and sorted."""
    if node_id not in graph.nodes:
        raise ContractError(f"unknown node {node_id}")
    if direction == "out":
        found = {e.dst for e in graph.out_edges(node_id, edge_type)}
    elif direction == "in":
        found = {e.src for e in graph.in_edges(node_id, edge_type)}
    else:
        raise ContractError(f"direction must be 'out' or 'in', got {direction!r}")
    return sorted(found)


def build_graph(corpus: Corpus) -> PropertyGraph:
    """Populate a PropertyGraph from a validated corpus.

    Requires ``validate_corpus(corpus) == []``; the build itself cannot fail on
    well-formed input.
    """
    graph = PropertyGraph()
    section_node: dict[str, int] = {}
    item_node: dict[str, int] = {}

    for doc in corpus.documents:
        props: dict[str, PropertyValue] = dict(doc.metadata)
        props.update(
            {"doc_id": doc.doc_id, "title": doc.title, "source_path": doc.source_path}
        )
        doc_node = graph.add_node("Document", props)

        doc_sections = [s for s in corpus.sections if s.doc_id == doc.doc_id]
        for section in doc_sections:
            section_node[section.section_id] = graph.add_node(
                "Section",
                {
                    "section_id": section.section_id,
                    "doc_id": section.doc_id,
                    "heading": section.heading,
                    "depth": section.depth,
                    "order_index": section.order_index,
                },
            )
        for section in doc_sections:
            if section.parent_section_id is not None:
                graph.add_edge(
                    "UNDER_SECTION",
                    section_node[section.section_id],
                    section_node[section.parent_section_id],
                )
            graph.add_edge("HAS_DOCUMENT", section_node[section.section_id], doc_node)

        items = corpus.items_in_order(doc.doc_id)
        for item in items:
            if isinstance(item, ChunkRecord):
                node_id = graph.add_node(
                    "Chunk",
                    {
                        "chunk_id": item.chunk_id,
                        "section_id": item.section_id,
                        "doc_id": item.doc_id,
                        "text": item.text,
                        "seq": item.seq,
                    },
                )
                item_node[item.chunk_id] = node_id
            else:
                table_props: dict[str, PropertyValue] = {
                    "table_id": item.table_id,
                    "section_id": item.section_id,
                    "doc_id": item.doc_id,
                    "seq": item.seq,
                    "header": " | ".join(item.header),
                    "n_rows": len(item.rows),
                    "text": item.render_text(),
                }
                if item.caption:
                    table_props["caption"] = item.caption
                node_id = graph.add_node("Table", table_props)
                item_node[item.table_id] = node_id
            graph.add_edge("HAS_PARENT", node_id, section_node[item.section_id])

        chunk_items = [it for it in items if isinstance(it, ChunkRecord)]
        for prev, nxt in zip(chunk_items, chunk_items[1:]):
            graph.add_edge("LINKED", item_node[prev.chunk_id], item_node[nxt.chunk_id])

        for idx, item in enumerate(items):
            if isinstance(item, ChunkRecord):
                continue
            for neighbor_idx in (idx - 1, idx + 1):
                if 0 <= neighbor_idx < len(items):
                    neighbor = items[neighbor_idx]
                    nid = (
                        neighbor.chunk_id
                        if isinstance(neighbor, ChunkRecord)
                        else neighbor.table_id
                    )
                    graph.add_edge("CONSECUTIVE", item_node[item.table_id], item_node[nid])

    # Entity nodes are deduplicated corpus-wide and created in sorted order.
    all_items = list(corpus.chunks) + list(corpus.tables)
    person_node: dict[str, int] = {}
    for name in sorted({p for item in all_items for p in item.persons}):
        person_node[name] = graph.add_node("Person", {"name": name})
    product_node: dict[str, int] = {}
    for name in sorted({p for item in all_items for p in item.products}):
        product_node[name] = graph.add_node("Product", {"name": name})
    location_node: dict[tuple[str, float, float], int] = {}
    for key in sorted(
        {(l.name, l.longitude, l.latitude, l.kind) for item in all_items for l in item.locations}
    ):
        name, lon, lat, kind = key
        location_node[(name, lon, lat)] = graph.add_node(
            "Location",
            {"name": name, "longitude": lon, "latitude": lat, "kind": kind},
        )

    for doc in corpus.documents:
        for item in corpus.items_in_order(doc.doc_id):
            item_id = item.chunk_id if isinstance(item, ChunkRecord) else item.table_id
            src = item_node[item_id]
            for name in sorted(set(item.persons)):
                graph.add_edge("PERSON_LINK", src, person_node[name])
            for name in sorted(set(item.products)):
                graph.add_edge("PRODUCT_LINK", src, product_node[name])
            for key in sorted({(l.name, l.longitude, l.latitude) for l in item.locations}):
                graph.add_edge("LOCATED_IN", src, location_node[key])
    return graph


def graph_to_dict(graph: PropertyGraph) -> dict:
    return {
        "nodes": [
            {"id": n.node_id, "label": n.label, "properties": dict(sorted(n.properties.items()))}
            for n in sorted(graph.nodes.values(), key=lambda n: n.node_id)
        ],
        "edges": [
            {"id": e.edge_id, "type": e.type, "src": e.src, "dst": e.dst}
            for e in sorted(graph.edges.values(), key=lambda e: e.edge_id)
        ],
    }


def graph_from_dict(raw: dict) -> PropertyGraph:
    graph = PropertyGraph()
    for node in raw["nodes"]:
        graph.add_node(node["label"], node["properties"], node_id=node["id"])
    for edge in raw["edges"]:
        graph.add_edge(edge["type"], edge["src"], edge["dst"], edge_id=edge["id"])
    return graph


def export_graph(graph: PropertyGraph, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(graph_to_dict(graph), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def import_graph(path: str | Path) -> PropertyGraph:
    return graph_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
