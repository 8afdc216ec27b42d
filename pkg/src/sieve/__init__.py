"""Desk-scale cleaning pipeline for Thai web text.

Tag documents with language/quality/content attributes, deduplicate by URL and
exact text with a Bloom filter, then mix tagged shards into a cleaned corpus
with per-rule removal accounting.
"""

from .documents import AttributeRecord, Document, SpanAttribute
from .taggers import GopherThresholds, Lexicon

__version__ = "0.1.0"

__all__ = [
    "AttributeRecord",
    "Document",
    "GopherThresholds",
    "Lexicon",
    "SpanAttribute",
    "__version__",
]
