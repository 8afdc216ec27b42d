"""Combine document shards with attribute sidecars and apply the filter policy.

A policy is an ordered list of stages.  A drop stage has a predicate over
attribute scores stating the condition a document must satisfy to pass; a mask
stage splices the byte spans of named attributes out of the text (replacement
configurable, e.g. "" for corrupt Unicode, "||||" for PII).  Every document is
attributed to the first stage that drops it.  All attributes are computed on
the original text, so mask stages never change drop decisions.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .documents import (
    AttributeRecord,
    Document,
    Span,
    list_shards,
    read_attributes,
    read_shard,
    write_shard,
)
from .errors import AlignmentError, PolicyError, SieveError
from .thai import Tokenizer

_MAX_SCORE_SUFFIX = ".max_score"


# --- predicate expressions ------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_.]*)"
    r"|(?P<op><=|>=|==|<|>)"
    r"|(?P<lparen>\()"
    r"|(?P<rparen>\)))"
)

_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
}


@dataclass(frozen=True)
class Comparison:
    attr: str
    op: str
    value: float

    def evaluate(self, resolve) -> bool:
        return _OPS[self.op](resolve(self.attr), self.value)

    def attributes(self) -> set[str]:
        return {_base_name(self.attr)}


@dataclass(frozen=True)
class Not:
    inner: object

    def evaluate(self, resolve) -> bool:
        return not self.inner.evaluate(resolve)

    def attributes(self) -> set[str]:
        return self.inner.attributes()


@dataclass(frozen=True)
class BoolOp:
    kind: str  # "and" | "or"
    parts: tuple

    def evaluate(self, resolve) -> bool:
        if self.kind == "and":
            return all(p.evaluate(resolve) for p in self.parts)
        return any(p.evaluate(resolve) for p in self.parts)

    def attributes(self) -> set[str]:
        out: set[str] = set()
        for p in self.parts:
            out |= p.attributes()
        return out


def _base_name(attr: str) -> str:
    if attr.endswith(_MAX_SCORE_SUFFIX):
        return attr[: -len(_MAX_SCORE_SUFFIX)]
    return attr


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(source):
            m = _TOKEN.match(source, pos)
            if m is None or m.end() == m.start():
                if source[pos:].strip():
                    raise PolicyError(f"syntax error at position {pos} in {source!r}")
                break
            for kind in ("num", "name", "op", "lparen", "rparen"):
                value = m.group(kind)
                if value is not None:
                    self.tokens.append((kind, value, m.start(kind)))
                    break
            pos = m.end()
        self.i = 0

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _next(self):
        tok = self._peek()
        if tok is None:
            raise PolicyError(f"unexpected end of expression at position {len(self.source)} in {self.source!r}")
        self.i += 1
        return tok

    def parse(self):
        node = self._or()
        if self._peek() is not None:
            kind, value, pos = self._peek()
            raise PolicyError(f"unexpected {value!r} at position {pos} in {self.source!r}")
        return node

    def _or(self):
        parts = [self._and()]
        while self._peek() and self._peek()[0] == "name" and self._peek()[1] == "or":
            self._next()
            parts.append(self._and())
        return parts[0] if len(parts) == 1 else BoolOp("or", tuple(parts))

    def _and(self):
        parts = [self._not()]
        while self._peek() and self._peek()[0] == "name" and self._peek()[1] == "and":
            self._next()
            parts.append(self._not())
        return parts[0] if len(parts) == 1 else BoolOp("and", tuple(parts))

    def _not(self):
        tok = self._peek()
        if tok and tok[0] == "name" and tok[1] == "not":
            self._next()
            return Not(self._not())
        return self._atom()

    def _atom(self):
        kind, value, pos = self._next()
        if kind == "lparen":
            node = self._or()
            tok = self._next()
            if tok[0] != "rparen":
                raise PolicyError(f"expected ')' at position {tok[2]} in {self.source!r}")
            return node
        if kind != "name" or value in ("and", "or", "not"):
            raise PolicyError(f"expected attribute name at position {pos} in {self.source!r}")
        op_tok = self._next()
        if op_tok[0] != "op":
            raise PolicyError(f"expected comparison operator at position {op_tok[2]} in {self.source!r}")
        num_tok = self._next()
        if num_tok[0] != "num":
            raise PolicyError(f"expected numeric literal at position {num_tok[2]} in {self.source!r}")
        return Comparison(value, op_tok[1], float(num_tok[1]))


def parse_predicate(source: str):
    parser = _Parser(source)
    if not parser.tokens:
        raise PolicyError(f"empty predicate expression {source!r}")
    return parser.parse()


# --- policy ----------------------------------------------------------------

@dataclass(frozen=True)
class Stage:
    name: str
    action: str  # "drop" | "mask"
    predicate: object | None = None
    predicate_source: str | None = None
    mask_attributes: tuple[str, ...] = ()
    replacement: str = ""

    def attributes(self) -> set[str]:
        out = set(self.mask_attributes)
        if self.predicate is not None:
            out |= self.predicate.attributes()
        return out


@dataclass(frozen=True)
class FilterPolicy:
    stages: tuple[Stage, ...]

    def attributes(self) -> set[str]:
        out: set[str] = set()
        for stage in self.stages:
            out |= stage.attributes()
        return out


def compile_policy(config: dict, known_attributes: set[str] | None = None) -> FilterPolicy:
    """Compile and validate a policy config: {"stages": [{name, action, ...}]}.

    Drop stages carry a `predicate` (the keep condition); mask stages carry
    `attributes` (span sources) and an optional `replacement` string.
    """
    raw_stages = config.get("stages")
    if not isinstance(raw_stages, list):
        raise PolicyError("policy config must contain a 'stages' list")
    stages = []
    seen = set()
    for raw in raw_stages:
        name = raw.get("name")
        if not name or name in seen:
            raise PolicyError(f"stage name missing or duplicated: {name!r}")
        seen.add(name)
        action = raw.get("action", "drop")
        if action == "drop":
            source = raw.get("predicate")
            if not source:
                raise PolicyError(f"drop stage {name!r} needs a predicate")
            stages.append(
                Stage(name=name, action="drop", predicate=parse_predicate(source), predicate_source=source)
            )
        elif action == "mask":
            if raw.get("predicate"):
                raise PolicyError(f"mask stage {name!r} must not carry a predicate; spans select the bytes")
            attrs = raw.get("attributes")
            if not attrs:
                raise PolicyError(f"mask stage {name!r} needs an 'attributes' list")
            stages.append(
                Stage(
                    name=name,
                    action="mask",
                    mask_attributes=tuple(attrs),
                    replacement=raw.get("replacement", ""),
                )
            )
        else:
            raise PolicyError(f"stage {name!r}: unknown action {action!r}")
    policy = FilterPolicy(tuple(stages))
    if known_attributes is not None:
        unknown = sorted(policy.attributes() - set(known_attributes))
        if unknown:
            raise PolicyError(f"policy references unknown attributes: {', '.join(unknown)}")
    return policy


def attribute_score(attributes: dict[str, list[Span]], name: str, doc_byte_len: int) -> float:
    """Whole-document score for `name`: the span score when the attribute is a
    single whole-document span, otherwise the span count; the `.max_score`
    suffix selects the maximum span score instead."""
    base = _base_name(name)
    spans = attributes.get(base)
    if spans is None:
        raise PolicyError(f"attribute {base!r} not present in sidecars")
    if name.endswith(_MAX_SCORE_SUFFIX):
        return max((s[2] for s in spans), default=0.0)
    if len(spans) == 1 and spans[0][0] == 0 and spans[0][1] == doc_byte_len:
        return spans[0][2]
    return float(len(spans))


# --- mixing ----------------------------------------------------------------

@dataclass
class StageCount:
    name: str
    action: str
    documents_in: int = 0
    documents_dropped: int = 0
    tokens_in: int = 0
    tokens_dropped: int = 0


@dataclass
class MixReport:
    stages: list[StageCount]
    documents_in: int = 0
    documents_out: int = 0
    tokens_in: int = 0
    tokens_out: int = 0
    tokenizer: str = ""
    config_sha256: str = ""
    timestamp: str = ""

    def merge(self, other: "MixReport") -> None:
        for mine, theirs in zip(self.stages, other.stages):
            mine.documents_in += theirs.documents_in
            mine.documents_dropped += theirs.documents_dropped
            mine.tokens_in += theirs.tokens_in
            mine.tokens_dropped += theirs.tokens_dropped
        self.documents_in += other.documents_in
        self.documents_out += other.documents_out
        self.tokens_in += other.tokens_in
        self.tokens_out += other.tokens_out

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "config_sha256": self.config_sha256,
            "tokenizer": self.tokenizer,
            "stages": [
                {
                    "name": s.name,
                    "action": s.action,
                    "documents_in": s.documents_in,
                    "documents_dropped": s.documents_dropped,
                    "tokens_in": s.tokens_in,
                    "tokens_dropped": s.tokens_dropped,
                }
                for s in self.stages
            ],
            "totals": {
                "documents_in": self.documents_in,
                "documents_out": self.documents_out,
                "documents_dropped": self.documents_in - self.documents_out,
                "tokens_in": self.tokens_in,
                "tokens_out": self.tokens_out,
                "tokens_dropped": self.tokens_in - self.tokens_out,
            },
        }


def count_tokens(doc: Document | str, tokenizer: Tokenizer) -> int:
    text = doc.text if isinstance(doc, Document) else doc
    return len(tokenizer.spans(text))


def _splice(text: str, ops: list[tuple[int, int, bytes]]) -> str:
    """Apply byte-span replacements (original coordinates, sorted, disjoint)."""
    raw = text.encode("utf-8")
    parts = []
    prev = 0
    for start, end, replacement in ops:
        parts.append(raw[prev:start])
        parts.append(replacement)
        prev = end
    parts.append(raw[prev:])
    return b"".join(parts).decode("utf-8")


def _mask_ops(
    attributes: dict[str, list[Span]], stage: Stage, claimed: list[tuple[int, int]]
) -> list[tuple[int, int, bytes]]:
    replacement = stage.replacement.encode("utf-8")
    ops = []
    for attr_name in stage.mask_attributes:
        spans = attributes.get(attr_name)
        if spans is None:
            raise PolicyError(f"attribute {attr_name!r} not present in sidecars")
        for start, end, _score in spans:
            if any(start < ce and cs < end for cs, ce in claimed):
                continue  # earlier mask stage already claimed these bytes
            claimed.append((start, end))
            ops.append((start, end, replacement))
    return ops


def _mix_shard(
    relpath: str,
    doc_dir: str,
    attr_dirs: list[str],
    out_dir: str,
    policy: FilterPolicy,
    tokenizer: Tokenizer,
    strict: bool,
) -> MixReport:
    report = MixReport(stages=[StageCount(s.name, s.action) for s in policy.stages])
    doc_path = os.path.join(doc_dir, relpath)
    attr_paths = [os.path.join(d, relpath) for d in attr_dirs]
    for path in attr_paths:
        if not os.path.exists(path):
            raise SieveError(f"missing attribute file: {path}")

    docs = read_shard(doc_path, strict=strict)
    attr_streams = [read_attributes(path, strict=strict) for path in attr_paths]
    survivors: list[Document] = []

    line = 0
    needed = policy.attributes()
    while True:
        doc = next(docs, None)
        records: list[AttributeRecord | None] = [next(s, None) for s in attr_streams]
        if doc is None:
            for path, record in zip(attr_paths, records):
                if record is not None:
                    raise AlignmentError(f"{path} has more records than {doc_path}")
            break
        line += 1
        merged: dict[str, list[Span]] = {}
        for path, record in zip(attr_paths, records):
            if record is None:
                raise AlignmentError(f"{path} ended before {doc_path} at line {line}")
            if record.id != doc.id:
                raise AlignmentError(
                    f"{path}:{line}: attribute id {record.id!r} does not match document id {doc.id!r}"
                )
            for name, spans in record.attributes.items():
                if name in merged:
                    raise SieveError(f"attribute {name!r} appears in more than one sidecar for {doc.id!r}")
                merged[name] = spans

        missing = sorted(n for n in needed if n not in merged)
        if missing:
            raise PolicyError(f"{doc_path}:{line}: policy attributes missing from sidecars: {', '.join(missing)}")

        byte_len = len(doc.text.encode("utf-8"))
        current_text = doc.text
        current_tokens = count_tokens(doc, tokenizer)
        report.documents_in += 1
        report.tokens_in += current_tokens

        dropped = False
        claimed: list[tuple[int, int]] = []
        applied_ops: list[tuple[int, int, bytes]] = []
        for stage, counter in zip(policy.stages, report.stages):
            counter.documents_in += 1
            counter.tokens_in += current_tokens
            if stage.action == "drop":
                keep = stage.predicate.evaluate(
                    lambda name: attribute_score(merged, name, byte_len)
                )
                if not keep:
                    counter.documents_dropped += 1
                    counter.tokens_dropped += current_tokens
                    dropped = True
                    break
            else:
                new_ops = _mask_ops(merged, stage, claimed)
                if new_ops:
                    applied_ops = sorted(applied_ops + new_ops)
                    masked = _splice(doc.text, applied_ops)
                    masked_tokens = count_tokens(masked, tokenizer)
                    counter.tokens_dropped += current_tokens - masked_tokens
                    current_text = masked
                    current_tokens = masked_tokens
        if not dropped:
            report.documents_out += 1
            report.tokens_out += current_tokens
            if current_text is doc.text:
                survivors.append(doc)
            else:
                survivors.append(
                    Document(id=doc.id, text=current_text, url=doc.url, source=doc.source, created=doc.created)
                )

    write_shard(os.path.join(out_dir, relpath), survivors)
    return report


def _report_timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = int(epoch) if epoch else int(time.time())
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(moment))


def config_digest(config_obj) -> str:
    blob = json.dumps(config_obj, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _mix_shard_task(args) -> MixReport:
    return _mix_shard(*args)


def mix(
    doc_dir: str,
    attr_dirs: list[str],
    policy: FilterPolicy,
    out_dir: str,
    tokenizer: Tokenizer,
    strict: bool = True,
    workers: int = 1,
    config_sha256: str = "",
    write_report: bool = True,
) -> MixReport:
    """Apply `policy` over `doc_dir` + sidecars and write the cleaned corpus.

    Shards are processed independently (optionally in parallel) and the
    per-shard reports merged in deterministic shard order.
    """
    shards = list_shards(doc_dir)
    report = MixReport(
        stages=[StageCount(s.name, s.action) for s in policy.stages],
        tokenizer=getattr(tokenizer, "name", type(tokenizer).__name__),
        config_sha256=config_sha256,
        timestamp=_report_timestamp(),
    )
    tasks = [(rel, doc_dir, attr_dirs, out_dir, policy, tokenizer, strict) for rel in shards]
    if workers <= 1 or len(shards) <= 1:
        partials = [_mix_shard_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_mix_shard_task, tasks))
    for partial in partials:
        report.merge(partial)
    if write_report:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as handle:
            json.dump(report.to_dict(), handle, ensure_ascii=False, indent=2)
            handle.write("\n")
    return report
