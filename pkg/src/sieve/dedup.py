"""Bloom-filter deduplication by URL and by exact document text.

First-occurrence semantics require a fixed corpus order: shards sorted
lexicographically by relative path, then line order within each shard.  The
filter itself is a plain bit array with double hashing over a salted 128-bit
digest of the key bytes; it never yields false negatives.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from typing import Iterable, Iterator

from .documents import AttributeRecord, Document, SpanAttribute
from .errors import ConfigError, FormatError

_MAGIC = b"BLMF"
_VERSION = 1
_HEADER = struct.Struct("<4sIQIQQ")  # magic, version, m, k, salt, item_count


def bloom_sizing(expected_items: int, target_fpr: float) -> tuple[int, int]:
    """Standard sizing: m = ceil(-n ln p / (ln 2)^2), k = max(1, round((m/n) ln 2))."""
    if expected_items < 1:
        raise ConfigError("expected_items must be >= 1")
    if not 0.0 < target_fpr < 1.0:
        raise ConfigError("target_fpr must be in (0, 1)")
    m = math.ceil(-expected_items * math.log(target_fpr) / (math.log(2) ** 2))
    k = max(1, round((m / expected_items) * math.log(2)))
    return m, min(k, 32)


class BloomFilter:
    def __init__(self, bit_count: int, hash_count: int, salt: int = 0):
        if bit_count < 1:
            raise ConfigError("bit_count must be >= 1")
        if not 1 <= hash_count <= 32:
            raise ConfigError("hash_count must be in [1, 32]")
        self.bit_count = bit_count
        self.hash_count = hash_count
        self.salt = salt & 0xFFFFFFFFFFFFFFFF
        self.bits = bytearray((bit_count + 7) // 8)
        self.item_count = 0

    @property
    def capacity_estimate(self) -> int:
        """Item count at which the configured FPR is reached, from m and k."""
        return max(1, int(self.bit_count * math.log(2) / self.hash_count))

    def _positions(self, key: bytes) -> Iterator[int]:
        digest = hashlib.blake2b(key, digest_size=16, key=self.salt.to_bytes(8, "little")).digest()
        h1 = int.from_bytes(digest[:8], "little")
        h2 = int.from_bytes(digest[8:], "little")
        m = self.bit_count
        for i in range(self.hash_count):
            yield (h1 + i * h2) % m

    def insert(self, key: bytes) -> None:
        bits = self.bits
        for pos in self._positions(key):
            bits[pos >> 3] |= 1 << (pos & 7)
        self.item_count += 1

    def contains(self, key: bytes) -> bool:
        bits = self.bits
        for pos in self._positions(key):
            if not bits[pos >> 3] & (1 << (pos & 7)):
                return False
        return True

    def save(self, path: str) -> None:
        with open(path, "wb") as handle:
            handle.write(
                _HEADER.pack(_MAGIC, _VERSION, self.bit_count, self.hash_count, self.salt, self.item_count)
            )
            handle.write(bytes(self.bits))

    @classmethod
    def load(cls, path: str) -> "BloomFilter":
        with open(path, "rb") as handle:
            header = handle.read(_HEADER.size)
            if len(header) < _HEADER.size:
                raise FormatError(f"{path}: truncated Bloom filter header")
            magic, version, m, k, salt, item_count = _HEADER.unpack(header)
            if magic != _MAGIC:
                raise FormatError(f"{path}: bad magic {magic!r}")
            if version != _VERSION:
                raise FormatError(f"{path}: unsupported version {version}")
            body = handle.read()
        expected = (m + 7) // 8
        if len(body) != expected:
            raise FormatError(f"{path}: bit array has {len(body)} bytes, expected {expected}")
        bloom = cls(m, k, salt)
        bloom.bits = bytearray(body)
        bloom.item_count = item_count
        return bloom


def bloom_new(expected_items: int, target_fpr: float, salt: int = 0) -> BloomFilter:
    m, k = bloom_sizing(expected_items, target_fpr)
    return BloomFilter(m, k, salt)


def normalize_url(url: str) -> str:
    """Case-fold scheme and host, strip one trailing slash; path/query untouched."""
    if not url:
        return ""
    rest = url
    prefix = ""
    if "://" in rest:
        scheme, rest = rest.split("://", 1)
        prefix = scheme.lower() + "://"
    for sep in "/?#":
        cut = rest.find(sep)
        if cut != -1:
            host, tail = rest[:cut], rest[cut:]
            break
    else:
        host, tail = rest, ""
    normalized = prefix + host.lower() + tail
    if normalized.endswith("/"):
        normalized = normalized[:-1]
    return normalized


def dedup_key(doc: Document, mode: str) -> bytes | None:
    """Key bytes for one document, or None when the document has no key
    (empty URL in url mode: marked non-duplicate, never inserted)."""
    if mode == "url":
        normalized = normalize_url(doc.url)
        if not normalized:
            return None
        return normalized.encode("utf-8")
    if mode == "doc":
        return doc.text.encode("utf-8")
    raise ConfigError(f"unknown dedup mode {mode!r} (expected 'url' or 'doc')")


@dataclass
class DedupStats:
    documents: int = 0
    duplicates: int = 0
    capacity_warnings: int = 0


ATTRIBUTE_BY_MODE = {"url": "dedup.url_duplicate", "doc": "dedup.doc_duplicate"}


def dedup_pass(
    docs: Iterable[Document],
    mode: str,
    bloom: BloomFilter,
    stats: DedupStats | None = None,
) -> Iterator[AttributeRecord]:
    """Mark each document 1.0 if its key was seen before, else 0.0 and insert.

    The caller must feed documents in the canonical corpus order; this is the
    single sequential point of the pipeline.
    """
    attr_name = ATTRIBUTE_BY_MODE.get(mode)
    if attr_name is None:
        raise ConfigError(f"unknown dedup mode {mode!r} (expected 'url' or 'doc')")
    capacity = bloom.capacity_estimate
    for doc in docs:
        if stats is not None:
            stats.documents += 1
        key = dedup_key(doc, mode)
        if key is None:
            duplicate = False
        elif bloom.contains(key):
            duplicate = True
        else:
            bloom.insert(key)
            if bloom.item_count > capacity and stats is not None:
                stats.capacity_warnings += 1
            duplicate = False
        if duplicate and stats is not None:
            stats.duplicates += 1
        attr = SpanAttribute.whole_doc(attr_name, doc.text, 1.0 if duplicate else 0.0)
        yield AttributeRecord.from_span_attributes(doc.id, [attr])
