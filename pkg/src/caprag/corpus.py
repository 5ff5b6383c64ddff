"""Corpus data model and ingestion of heading-structured source files.

Source format: UTF-8 text where ``#`` markers give the section depth,
consecutive ``|``-delimited lines form a table (an optional ``|---|`` ruler
after the header row is ignored), and blank-line-separated runs of other lines
are paragraphs. A paragraph starting with ``Table:`` directly after a table
becomes that table's caption. An optional JSON sidecar supplies person,
product and location annotations by character offset; each annotation is
attached to the paragraph or table whose span contains the offset.

All ids are deterministic ``<doc>:<kind>:<n>`` strings so that fixtures and
golden files stay stable across runs.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IngestionError

LOCATION_KINDS = ("ATM", "BRANCH", "OFFICE", "OTHER")

_HEADING_RE = re.compile(r"^(#+)\s*(.*)$")
_TABLE_RULER_RE = re.compile(r"^\|[\s\-:|]+\|?\s*$")
_SLUG_RE = re.compile(r"[^a-z0-9]+")


@dataclass
class LocationRef:
    name: str
    longitude: float
    latitude: float
    kind: str = "OTHER"


@dataclass
class CorpusDocument:
    doc_id: str
    title: str
    source_path: str
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass
class Section:
    section_id: str
    doc_id: str
    parent_section_id: str | None
    heading: str
    depth: int
    order_index: int


@dataclass
class ChunkRecord:
    chunk_id: str
    section_id: str
    doc_id: str
    text: str
    seq: int
    persons: list[str] = field(default_factory=list)
    products: list[str] = field(default_factory=list)
    locations: list[LocationRef] = field(default_factory=list)


@dataclass
class TableRecord:
    table_id: str
    section_id: str
    doc_id: str
    seq: int
    header: list[str]
    rows: list[list[str]]
    caption: str | None = None
    persons: list[str] = field(default_factory=list)
    products: list[str] = field(default_factory=list)
    locations: list[LocationRef] = field(default_factory=list)

    def render_text(self) -> str:
        """Pipe-joined text form used for graph node properties and context."""
        lines = [" | ".join(self.header)]
        lines.extend(" | ".join(row) for row in self.rows)
        if self.caption:
            lines.append(self.caption)
        return "\n".join(lines)


@dataclass
class Corpus:
    documents: list[CorpusDocument] = field(default_factory=list)
    sections: list[Section] = field(default_factory=list)
    chunks: list[ChunkRecord] = field(default_factory=list)
    tables: list[TableRecord] = field(default_factory=list)

    def merge(self, other: "Corpus") -> "Corpus":
        return Corpus(
            documents=self.documents + other.documents,
            sections=self.sections + other.sections,
            chunks=self.chunks + other.chunks,
            tables=self.tables + other.tables,
        )

    def items_in_order(self, doc_id: str) -> list[ChunkRecord | TableRecord]:
        """Chunks and tables of one document in shared-seq reading order."""
        items: list[ChunkRecord | TableRecord] = [
            c for c in self.chunks if c.doc_id == doc_id
        ]
        items.extend(t for t in self.tables if t.doc_id == doc_id)
        items.sort(key=lambda item: item.seq)
        return items


def slugify(text: str) -> str:
    slug = _SLUG_RE.sub("-", text.lower()).strip("-")
    return slug or "doc"


# --- ingestion -------------------------------------------------------------


@dataclass
class _Block:
    kind: str  # "para" | "table"
    start: int  # char offset of first line
    end: int  # char offset past last line
    section_index: int
    # para
    text: str = ""
    # table
    header: list[str] = field(default_factory=list)
    rows: list[list[str]] = field(default_factory=list)
    caption: str | None = None
    caption_span: tuple[int, int] | None = None


def _split_table_row(line: str) -> list[str]:
    body = line.strip()
    if body.startswith("|"):
        body = body[1:]
    if body.endswith("|"):
        body = body[:-1]
    return [cell.strip() for cell in body.split("|")]


def ingest_document(
    source_text: str,
    sidecar: dict | None = None,
    doc_meta: dict[str, str] | None = None,
    source_path: str = "<memory>",
) -> Corpus:
    """Parse one source file into a single-document corpus of raw blocks.

    Raises IngestionError (with the offending line number) on a table row whose
    cell count differs from its header and on a heading depth jump greater
    than one.
    """
    doc_meta = dict(doc_meta or {})
    lines = source_text.split("\n")

    # Pre-compute the char offset of each line start.
    offsets = []
    pos = 0
    for line in lines:
        offsets.append(pos)
        pos += len(line) + 1

    headings: list[tuple[int, str, int]] = []  # (depth, text, line_no)
    heading_lines: dict[int, int] = {}  # line index -> heading list index
    blocks: list[_Block] = []

    i = 0
    n = len(lines)
    while i < n:
        line = lines[i]
        stripped = line.strip()
        if not stripped:
            i += 1
            continue
        heading = _HEADING_RE.match(stripped)
        if heading:
            depth = len(heading.group(1))
            prev_depth = headings[-1][0] if headings else 0
            if depth > prev_depth + 1:
                raise IngestionError(
                    f"heading depth jumps from {prev_depth} to {depth}", line=i + 1
                )
            heading_lines[i] = len(headings)
            headings.append((depth, heading.group(2).strip(), i + 1))
            i += 1
            continue
        if stripped.startswith("|"):
            table_start = i
            header = _split_table_row(lines[i])
            rows = []
            i += 1
            while i < n and lines[i].strip().startswith("|"):
                if _TABLE_RULER_RE.match(lines[i].strip()):
                    i += 1
                    continue
                row = _split_table_row(lines[i])
                if len(row) != len(header):
                    raise IngestionError(
                        f"table row has {len(row)} cells, header has {len(header)}",
                        line=i + 1,
                    )
                rows.append(row)
                i += 1
            block = _Block(
                kind="table",
                start=offsets[table_start],
                end=offsets[i - 1] + len(lines[i - 1]),
                section_index=len(headings) - 1,
                header=header,
                rows=rows,
            )
            # A paragraph right after the table starting with "Table:" is its caption.
            j = i
            while j < n and not lines[j].strip():
                j += 1
            if j < n and lines[j].strip().startswith("Table:"):
                block.caption = lines[j].strip()
                block.caption_span = (offsets[j], offsets[j] + len(lines[j]))
                i = j + 1
            blocks.append(block)
            continue
        # paragraph: consecutive non-blank, non-heading, non-table lines
        para_start = i
        para_lines = []
        while i < n:
            cur = lines[i].strip()
            if not cur or _HEADING_RE.match(cur) or cur.startswith("|"):
                break
            para_lines.append(cur)
            i += 1
        blocks.append(
            _Block(
                kind="para",
                start=offsets[para_start],
                end=offsets[i - 1] + len(lines[i - 1]),
                section_index=len(headings) - 1,
                text=" ".join(para_lines),
            )
        )

    title = doc_meta.get("title") or (headings[0][1] if headings else Path(source_path).stem)
    doc_id = doc_meta.get("doc_id") or slugify(title)
    meta = {k: v for k, v in doc_meta.items() if k not in ("doc_id", "title")}
    document = CorpusDocument(
        doc_id=doc_id, title=title, source_path=source_path, metadata=meta
    )

    # Build the section tree. Content before any heading goes to an implicit
    # depth-1 section titled after the document.
    sections: list[Section] = []
    implicit_root: Section | None = None
    if blocks and blocks[0].section_index < 0:
        implicit_root = Section(
            section_id=f"{doc_id}:sec:0",
            doc_id=doc_id,
            parent_section_id=None,
            heading=title,
            depth=1,
            order_index=0,
        )
        sections.append(implicit_root)

    stack: list[Section] = []  # current ancestry, stack[d-1] has depth d
    siblings_at: dict[str | None, int] = {}
    section_by_heading_index: list[Section] = []
    for depth, text, _line in headings:
        del stack[depth - 1 :]
        parent = stack[depth - 2] if depth >= 2 else None
        parent_id = parent.section_id if parent else None
        order = siblings_at.get(parent_id, 0)
        siblings_at[parent_id] = order + 1
        section = Section(
            section_id=f"{doc_id}:sec:{len(sections)}",
            doc_id=doc_id,
            parent_section_id=parent_id,
            heading=text,
            depth=depth,
            order_index=order,
        )
        sections.append(section)
        section_by_heading_index.append(section)
        stack.append(section)

    chunks: list[ChunkRecord] = []
    tables: list[TableRecord] = []
    block_records: list[tuple[_Block, ChunkRecord | TableRecord]] = []
    seq = 0
    for block in blocks:
        if block.section_index >= 0:
            section = section_by_heading_index[block.section_index]
        else:
            section = implicit_root
        if block.kind == "para":
            record: ChunkRecord | TableRecord = ChunkRecord(
                chunk_id=f"{doc_id}:chunk:{seq}",
                section_id=section.section_id,
                doc_id=doc_id,
                text=block.text,
                seq=seq,
            )
            chunks.append(record)
        else:
            record = TableRecord(
                table_id=f"{doc_id}:table:{seq}",
                section_id=section.section_id,
                doc_id=doc_id,
                seq=seq,
                header=block.header,
                rows=block.rows,
                caption=block.caption,
            )
            tables.append(record)
        block_records.append((block, record))
        seq += 1

    if sidecar:
        _apply_sidecar(sidecar, block_records, source_path)

    return Corpus(documents=[document], sections=sections, chunks=chunks, tables=tables)


def _apply_sidecar(
    sidecar: dict,
    block_records: list[tuple[_Block, ChunkRecord | TableRecord]],
    source_path: str,
) -> None:
    for ann in sidecar.get("annotations", []):
        offset = int(ann["offset"])
        kind = ann["kind"]
        target = None
        for block, record in block_records:
            if block.start <= offset <= block.end or (
                block.caption_span
                and block.caption_span[0] <= offset <= block.caption_span[1]
            ):
                target = record
                break
        if target is None:
            raise IngestionError(
                f"annotation offset {offset} falls outside every block of {source_path}"
            )
        if kind == "person":
            target.persons.append(ann["name"])
        elif kind == "product":
            target.products.append(ann["name"])
        elif kind == "location":
            target.locations.append(
                LocationRef(
                    name=ann["name"],
                    longitude=float(ann["longitude"]),
                    latitude=float(ann["latitude"]),
                    kind=ann.get("location_kind", "OTHER"),
                )
            )
        else:
            raise IngestionError(f"unknown annotation kind {kind!r}")


def ingest_directory(directory: str | Path) -> Corpus:
    """Ingest every .txt/.md file of a directory (sorted by name) into one corpus.

    ``<name>.ann.json`` sidecars and ``<name>.meta.json`` metadata files next to
    a source file are picked up automatically.
    """
    directory = Path(directory)
    corpus = Corpus()
    sources = sorted(
        p for p in directory.iterdir() if p.suffix in (".txt", ".md") and p.is_file()
    )
    for path in sources:
        sidecar = None
        sidecar_path = path.with_suffix(path.suffix + ".ann.json")
        if not sidecar_path.exists():
            sidecar_path = path.parent / (path.stem + ".ann.json")
        if sidecar_path.exists():
            sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
        meta = {}
        meta_path = path.parent / (path.stem + ".meta.json")
        if meta_path.exists():
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
        doc = ingest_document(
            path.read_text(encoding="utf-8"),
            sidecar=sidecar,
            doc_meta=meta,
            source_path=str(path),
        )
        corpus = corpus.merge(doc)
    return corpus


# --- validation ------------------------------------------------------------


def validate_corpus(corpus: Corpus) -> list[str]:
    """Check every type invariant; violations are data, not errors."""
    violations: list[str] = []
    doc_ids = set()
    for doc in corpus.documents:
        if doc.doc_id in doc_ids:
            violations.append(f"document {doc.doc_id}: duplicate doc_id")
        doc_ids.add(doc.doc_id)
        if not doc.title:
            violations.append(f"document {doc.doc_id}: empty title")

    sections_by_id = {s.section_id: s for s in corpus.sections}
    for section in corpus.sections:
        if section.doc_id not in doc_ids:
            violations.append(f"section {section.section_id}: unknown doc {section.doc_id}")
        if section.depth < 1:
            violations.append(f"section {section.section_id}: depth {section.depth} < 1")
        if section.order_index < 0:
            violations.append(f"section {section.section_id}: negative order_index")
        if section.parent_section_id is None:
            if section.depth > 1:
                violations.append(
                    f"section {section.section_id}: depth {section.depth} without parent"
                )
        else:
            parent = sections_by_id.get(section.parent_section_id)
            if parent is None:
                violations.append(
                    f"section {section.section_id}: missing parent {section.parent_section_id}"
                )
            else:
                if parent.doc_id != section.doc_id:
                    violations.append(
                        f"section {section.section_id}: parent {parent.section_id} in other document"
                    )
                if parent.depth != section.depth - 1:
                    violations.append(
                        f"section {section.section_id} (depth {section.depth}): parent "
                        f"{parent.section_id} has depth {parent.depth}, expected {section.depth - 1}"
                    )

    for chunk in corpus.chunks:
        if not chunk.text:
            violations.append(f"chunk {chunk.chunk_id}: empty text")
        if chunk.section_id not in sections_by_id:
            violations.append(f"chunk {chunk.chunk_id}: unknown section {chunk.section_id}")
    for table in corpus.tables:
        if table.section_id not in sections_by_id:
            violations.append(f"table {table.table_id}: unknown section {table.section_id}")
        for idx, row in enumerate(table.rows):
            if len(row) != len(table.header):
                violations.append(
                    f"table {table.table_id}: row {idx} has {len(row)} cells, "
                    f"header has {len(table.header)}"
                )
    for record in list(corpus.chunks) + list(corpus.tables):
        for loc in record.locations:
            rid = record.chunk_id if isinstance(record, ChunkRecord) else record.table_id
            if not (-180.0 <= loc.longitude <= 180.0):
                violations.append(f"{rid}: location {loc.name} longitude {loc.longitude} out of range")
            if not (-90.0 <= loc.latitude <= 90.0):
                violations.append(f"{rid}: location {loc.name} latitude {loc.latitude} out of range")
            if loc.kind not in LOCATION_KINDS:
                violations.append(f"{rid}: location {loc.name} has unknown kind {loc.kind}")

    # Shared chunk/table seq space: unique and gapless from 0 per document.
    for doc in corpus.documents:
        by_seq: dict[int, list[str]] = {}
        for item in corpus.items_in_order(doc.doc_id):
            item_id = item.chunk_id if isinstance(item, ChunkRecord) else item.table_id
            by_seq.setdefault(item.seq, []).append(item_id)
        for seq, ids in sorted(by_seq.items()):
            if len(ids) > 1:
                violations.append(
                    f"document {doc.doc_id}: duplicate seq {seq} shared by {' and '.join(ids)}"
                )
        if by_seq:
            expected = set(range(len(by_seq)))
            if set(by_seq) != expected:
                missing = sorted(expected - set(by_seq))
                violations.append(
                    f"document {doc.doc_id}: seq values not gapless, missing {missing}"
                )
    return violations


# --- canonical serialization ------------------------------------------------

FORMAT_TAG = "caprag-corpus/1"


def _loc_to_dict(loc: LocationRef) -> dict:
    return {
        "name": loc.name,
        "longitude": loc.longitude,
        "latitude": loc.latitude,
        "kind": loc.kind,
    }


def corpus_to_dict(corpus: Corpus) -> dict:
    return {
        "format": FORMAT_TAG,
        "documents": [
            {
                "doc_id": d.doc_id,
                "title": d.title,
                "source_path": d.source_path,
                "metadata": dict(sorted(d.metadata.items())),
            }
            for d in corpus.documents
        ],
        "sections": [
            {
                "section_id": s.section_id,
                "doc_id": s.doc_id,
                "parent_section_id": s.parent_section_id,
                "heading": s.heading,
                "depth": s.depth,
                "order_index": s.order_index,
            }
            for s in corpus.sections
        ],
        "chunks": [
            {
                "chunk_id": c.chunk_id,
                "section_id": c.section_id,
                "doc_id": c.doc_id,
                "text": c.text,
                "seq": c.seq,
                "persons": c.persons,
                "products": c.products,
                "locations": [_loc_to_dict(l) for l in c.locations],
            }
            for c in corpus.chunks
        ],
        "tables": [
            {
                "table_id": t.table_id,
                "section_id": t.section_id,
                "doc_id": t.doc_id,
                "seq": t.seq,
                "header": t.header,
                "rows": t.rows,
                "caption": t.caption,
                "persons": t.persons,
                "products": t.products,
                "locations": [_loc_to_dict(l) for l in t.locations],
            }
            for t in corpus.tables
        ],
    }


def corpus_from_dict(raw: dict) -> Corpus:
    if raw.get("format") != FORMAT_TAG:
        raise IngestionError(f"unsupported corpus format {raw.get('format')!r}")

    def locs(items):
        return [LocationRef(**l) for l in items]

    return Corpus(
        documents=[CorpusDocument(**d) for d in raw["documents"]],
        sections=[Section(**s) for s in raw["sections"]],
        chunks=[
            ChunkRecord(
                chunk_id=c["chunk_id"],
                section_id=c["section_id"],
                doc_id=c["doc_id"],
                text=c["text"],
                seq=c["seq"],
                persons=list(c["persons"]),
                products=list(c["products"]),
                locations=locs(c["locations"]),
            )
            for c in raw["chunks"]
        ],
        tables=[
            TableRecord(
                table_id=t["table_id"],
                section_id=t["section_id"],
                doc_id=t["doc_id"],
                seq=t["seq"],
                header=list(t["header"]),
                rows=[list(r) for r in t["rows"]],
                caption=t["caption"],
                persons=list(t["persons"]),
                products=list(t["products"]),
                locations=locs(t["locations"]),
            )
            for t in raw["tables"]
        ],
    )


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(corpus_to_dict(corpus), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def load_corpus(path: str | Path) -> Corpus:
    return corpus_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
