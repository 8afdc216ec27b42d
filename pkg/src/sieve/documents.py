"""Document and attribute records plus their sharded JSONL serialization.

Document shards are JSON Lines (optionally gzip, detected by extension) with
keys ``id``, ``text``, ``url``, ``source``, ``created``.  Attribute sidecars
mirror document shards by relative path and hold one record per document:
``{"id": ..., "attributes": {name: [[start, end, score], ...]}}``.  Span
offsets are byte offsets into the UTF-8 encoding of the document text and must
fall on character boundaries.
"""

from __future__ import annotations

import gzip
import io
import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .errors import ParseError, SchemaError, SieveError, SpanError

Span = tuple[int, int, float]


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    url: str = ""
    source: str = ""
    created: str = ""


class ByteIndex:
    """Lazy char-offset -> byte-offset map for one text.

    Taggers work in character offsets (regex, slicing) but spans are stored as
    UTF-8 byte offsets; this builds the cumulative byte table only when a
    conversion is actually requested.
    """

    def __init__(self, text: str):
        self.text = text
        self._cum: np.ndarray | None = None
        self._byte_len: int | None = None

    def _table(self) -> np.ndarray:
        if self._cum is None:
            if not self.text:
                self._cum = np.zeros(0, dtype=np.int64)
            else:
                ords = np.frombuffer(self.text.encode("utf-32-le"), dtype=np.uint32)
                widths = (
                    1
                    + (ords > 0x7F).astype(np.int64)
                    + (ords > 0x7FF).astype(np.int64)
                    + (ords > 0xFFFF).astype(np.int64)
                )
                self._cum = np.cumsum(widths)
            self._byte_len = int(self._cum[-1]) if len(self._cum) else 0
        return self._cum

    @property
    def byte_len(self) -> int:
        if self._byte_len is None:
            if self._cum is None and self.text.isascii():
                self._byte_len = len(self.text)
            else:
                self._table()
        return self._byte_len  # type: ignore[return-value]

    def to_byte(self, char_offset: int) -> int:
        if char_offset == 0:
            return 0
        return int(self._table()[char_offset - 1])

    def boundaries(self) -> set[int]:
        """All valid byte offsets (character boundaries) for this text."""
        return {0} | {int(b) for b in self._table()}


def _check_spans(name: str, spans: list[Span]) -> None:
    prev_end = 0
    for span in spans:
        if len(span) != 3:
            raise SpanError(f"{name}: span must be (start, end, score), got {span!r}")
        start, end, _score = span
        if start < 0 or end < start:
            raise SpanError(f"{name}: invalid span bounds ({start}, {end})")
        if start < prev_end:
            raise SpanError(f"{name}: spans overlap or are unsorted at ({start}, {end})")
        prev_end = end


@dataclass
class SpanAttribute:
    """A named tagger verdict: ordered non-overlapping byte spans with scores."""

    name: str
    spans: list[Span]

    def __post_init__(self) -> None:
        _check_spans(self.name, self.spans)

    def validate_against(self, text: str) -> None:
        """Check bounds and UTF-8 character-boundary alignment for `text`."""
        if not self.spans:
            return
        index = ByteIndex(text)
        byte_len = index.byte_len
        boundaries = index.boundaries()
        _check_spans(self.name, self.spans)
        for start, end, _score in self.spans:
            if end > byte_len:
                raise SpanError(f"{self.name}: span end {end} beyond text byte length {byte_len}")
            if start not in boundaries or end not in boundaries:
                raise SpanError(f"{self.name}: span ({start}, {end}) not on character boundaries")

    @classmethod
    def whole_doc(cls, name: str, text: str, score: float) -> "SpanAttribute":
        return cls(name, [(0, len(text.encode("utf-8")), float(score))])


@dataclass
class AttributeRecord:
    id: str
    attributes: dict[str, list[Span]] = field(default_factory=dict)

    def validate(self) -> None:
        for name, spans in self.attributes.items():
            _check_spans(name, spans)

    @classmethod
    def from_span_attributes(cls, doc_id: str, attrs: Iterable[SpanAttribute]) -> "AttributeRecord":
        record = cls(doc_id)
        for attr in attrs:
            if attr.name in record.attributes:
                raise SieveError(f"duplicate attribute name {attr.name!r} for document {doc_id!r}")
            record.attributes[attr.name] = attr.spans
        return record


@dataclass
class ReadStats:
    """Per-file read accounting for lenient mode."""

    lines: int = 0
    skipped: int = 0


def parse_document(line: str, line_no: int | None = None, path: str | None = None) -> Document:
    """Parse one JSONL line into a Document; unknown keys are dropped."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON ({exc.msg})", path=path, line=line_no) from exc
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", path=path, line=line_no)
    doc_id = obj.get("id")
    text = obj.get("text")
    if not isinstance(doc_id, str) or not doc_id:
        raise SchemaError("missing or empty 'id'", path=path, line=line_no)
    if not isinstance(text, str):
        raise SchemaError("missing 'text'", path=path, line=line_no)
    fields = {}
    for key in ("url", "source", "created"):
        value = obj.get(key, "")
        if not isinstance(value, str):
            raise SchemaError(f"field {key!r} must be a string", path=path, line=line_no)
        fields[key] = value
    return Document(id=doc_id, text=text, **fields)


def document_to_json(doc: Document) -> str:
    return json.dumps(
        {"id": doc.id, "text": doc.text, "url": doc.url, "source": doc.source, "created": doc.created},
        ensure_ascii=False,
        separators=(",", ":"),
    )


def open_text_read(path: str) -> io.TextIOBase:
    if path.endswith(".gz"):
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def open_text_write(path: str) -> io.TextIOBase:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    if path.endswith(".gz"):
        # mtime=0 and no filename keep gzip output byte-stable across runs.
        raw = open(path, "wb")
        return io.TextIOWrapper(gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0), encoding="utf-8")
    return open(path, "w", encoding="utf-8")


def _read_lines(path: str, strict: bool, stats: ReadStats | None, parse_one):
    try:
        handle = open_text_read(path)
    except OSError as exc:
        raise SieveError(f"cannot open shard {path}: {exc}") from exc
    with handle:
        line_no = 0
        while True:
            try:
                line = handle.readline()
            except (OSError, EOFError, UnicodeDecodeError) as exc:
                raise SieveError(f"error reading {path}: {exc}") from exc
            if not line:
                break
            line_no += 1
            if stats is not None:
                stats.lines += 1
            stripped = line.rstrip("\n")
            try:
                yield parse_one(stripped, line_no, path)
            except ParseError:
                if strict:
                    raise
                if stats is not None:
                    stats.skipped += 1


def read_shard(path: str, strict: bool = True, stats: ReadStats | None = None) -> Iterator[Document]:
    return _read_lines(path, strict, stats, parse_document)


def write_shard(path: str, docs: Iterable[Document]) -> int:
    count = 0
    with open_text_write(path) as handle:
        for doc in docs:
            handle.write(document_to_json(doc))
            handle.write("\n")
            count += 1
    return count


def parse_attribute_record(line: str, line_no: int | None = None, path: str | None = None) -> AttributeRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON ({exc.msg})", path=path, line=line_no) from exc
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", path=path, line=line_no)
    rec_id = obj.get("id")
    attrs = obj.get("attributes")
    if not isinstance(rec_id, str) or not rec_id:
        raise SchemaError("missing or empty 'id'", path=path, line=line_no)
    if not isinstance(attrs, dict):
        raise SchemaError("missing 'attributes' object", path=path, line=line_no)
    record = AttributeRecord(rec_id)
    for name, raw_spans in attrs.items():
        if not isinstance(raw_spans, list):
            raise SchemaError(f"attribute {name!r} spans must be a list", path=path, line=line_no)
        spans: list[Span] = []
        for raw in raw_spans:
            if not isinstance(raw, list) or len(raw) != 3:
                raise SchemaError(f"attribute {name!r} span must be [start, end, score]", path=path, line=line_no)
            spans.append((int(raw[0]), int(raw[1]), float(raw[2])))
        try:
            _check_spans(name, spans)
        except SpanError as exc:
            raise SchemaError(str(exc), path=path, line=line_no) from exc
        record.attributes[name] = spans
    return record


def attribute_record_to_json(record: AttributeRecord) -> str:
    record.validate()
    attrs = {name: [[s, e, score] for s, e, score in spans] for name, spans in record.attributes.items()}
    return json.dumps({"id": record.id, "attributes": attrs}, ensure_ascii=False, separators=(",", ":"))


def read_attributes(path: str, strict: bool = True, stats: ReadStats | None = None) -> Iterator[AttributeRecord]:
    return _read_lines(path, strict, stats, parse_attribute_record)


def write_attributes(path: str, records: Iterable[AttributeRecord]) -> int:
    count = 0
    with open_text_write(path) as handle:
        for record in records:
            handle.write(attribute_record_to_json(record))
            handle.write("\n")
            count += 1
    return count


def list_shards(root: str) -> list[str]:
    """Relative paths of all .jsonl/.jsonl.gz files under root, sorted lexicographically.

    This order, with line order within each file, is the canonical corpus order
    used by deduplication.
    """
    found = []
    for dirpath, _dirnames, filenames in os.walk(root):
        for name in filenames:
            if name.endswith(".jsonl") or name.endswith(".jsonl.gz"):
                rel = os.path.relpath(os.path.join(dirpath, name), root)
                found.append(rel.replace(os.sep, "/"))
    return sorted(found)
