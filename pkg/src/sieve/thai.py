"""Thai character classes, ratios, line splitting, and word tokenization.

Every rule that counts "words", "Thai characters", or "consonants" routes
through this module.  "Characters" always means Unicode scalar values.
"""

from __future__ import annotations

import re
from enum import Enum
from typing import Iterable

from .errors import ConfigError

THAI_BLOCK_START = 0x0E00
THAI_BLOCK_END = 0x0E7F

_THAI_RUN = re.compile(r"[฀-๿]+")
_CONSONANT_RUN = re.compile(r"[ก-ฮ]+")
_NONSPACE = re.compile(r"\S+")
_LINE = re.compile(r"[^\n]+")


class ThaiCharClass(Enum):
    CONSONANT = "consonant"
    VOWEL = "vowel"
    TONE_MARK = "tone_mark"
    THAI_DIGIT = "thai_digit"
    OTHER_THAI = "other_thai"
    NON_THAI = "non_thai"


def classify_char(ch: str) -> ThaiCharClass:
    """Classify one Unicode scalar; total over all scalar values."""
    cp = ord(ch)
    if cp < THAI_BLOCK_START or cp > THAI_BLOCK_END:
        return ThaiCharClass.NON_THAI
    if 0x0E01 <= cp <= 0x0E2E:
        return ThaiCharClass.CONSONANT
    if 0x0E30 <= cp <= 0x0E3A or 0x0E40 <= cp <= 0x0E45 or cp == 0x0E47:
        return ThaiCharClass.VOWEL
    if 0x0E48 <= cp <= 0x0E4B:
        return ThaiCharClass.TONE_MARK
    if 0x0E50 <= cp <= 0x0E59:
        return ThaiCharClass.THAI_DIGIT
    return ThaiCharClass.OTHER_THAI


def _run_total(pattern: re.Pattern, text: str) -> int:
    return sum(m.end() - m.start() for m in pattern.finditer(text))


def thai_char_ratio(text: str) -> float:
    """Fraction of scalars inside the Thai block U+0E00-U+0E7F; empty text -> 0.0."""
    if not text:
        return 0.0
    return _run_total(_THAI_RUN, text) / len(text)


def thai_consonant_char_ratio(text: str) -> float:
    """Fraction of scalars that are Thai consonants (U+0E01-U+0E2E); empty -> 0.0."""
    if not text:
        return 0.0
    return _run_total(_CONSONANT_RUN, text) / len(text)


def fraction_tokens_with_thai(tokens: list[str]) -> float:
    """Fraction of tokens containing at least one Thai-block scalar; empty list -> 0.0."""
    if not tokens:
        return 0.0
    return sum(1 for t in tokens if _THAI_RUN.search(t)) / len(tokens)


def split_lines(text: str) -> list[str]:
    """Split on maximal runs of '\\n', dropping empty segments."""
    return _LINE.findall(text)


def split_lines_with_spans(text: str) -> list[tuple[int, int]]:
    return [m.span() for m in _LINE.finditer(text)]


class WhitespaceTokenizer:
    """Baseline tokenizer: maximal runs of non-whitespace."""

    name = "whitespace"

    def spans(self, text: str) -> list[tuple[int, int]]:
        return [m.span() for m in _NONSPACE.finditer(text)]

    def tokenize(self, text: str) -> list[str]:
        return _NONSPACE.findall(text)


class DictionaryTokenizer:
    """Splits on whitespace and Thai/non-Thai script transitions, then segments
    contiguous Thai runs by dictionary maximal matching with single-character
    fallback."""

    name = "simple"

    _END = ""  # trie terminal marker; no real character equals ""

    def __init__(self, words: Iterable[str]):
        trie: dict = {}
        for word in words:
            if not word:
                continue
            node = trie
            for ch in word:
                node = node.setdefault(ch, {})
            node[self._END] = True
        self._trie = trie

    def _segment_run(self, text: str, start: int, end: int, out: list[tuple[int, int]]) -> None:
        trie = self._trie
        terminal = self._END
        i = start
        while i < end:
            node = trie
            j = i
            best = -1
            while j < end:
                node = node.get(text[j])
                if node is None:
                    break
                j += 1
                if terminal in node:
                    best = j
            if best < 0:
                best = i + 1
            out.append((i, best))
            i = best

    def spans(self, text: str) -> list[tuple[int, int]]:
        out: list[tuple[int, int]] = []
        for m in _NONSPACE.finditer(text):
            chunk_start, chunk_end = m.span()
            pos = chunk_start
            for run in _THAI_RUN.finditer(text, chunk_start, chunk_end):
                run_start, run_end = run.span()
                if run_start > pos:
                    out.append((pos, run_start))
                self._segment_run(text, run_start, run_end, out)
                pos = run_end
            if pos < chunk_end:
                out.append((pos, chunk_end))
        return out

    def tokenize(self, text: str) -> list[str]:
        return [text[s:e] for s, e in self.spans(text)]


Tokenizer = WhitespaceTokenizer | DictionaryTokenizer


def tokenize(text: str, tokenizer: Tokenizer) -> list[str]:
    return tokenizer.tokenize(text)


def load_wordlist(path: str) -> list[str]:
    """One term per line, UTF-8; blank lines and '#' comment lines ignored."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read word list {path}: {exc}") from exc
    return [line.strip() for line in lines if line.strip() and not line.lstrip().startswith("#")]
