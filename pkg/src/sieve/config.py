"""Pipeline configuration: tokenizer, lexicons, thresholds, dedup, classifiers.

The JSON form round-trips losslessly; unset fields fall back to the bundled
defaults under sieve/data at load time, not at serialization time.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from importlib import resources

from .errors import ConfigError
from .taggers import GopherThresholds, Lexicon
from .thai import DictionaryTokenizer, Tokenizer, WhitespaceTokenizer, load_wordlist


def default_data_path(name: str) -> str:
    return str(resources.files("sieve").joinpath("data", name))


@dataclass
class TokenizerSettings:
    mode: str = "simple"  # "simple" | "whitespace"
    dictionary: str | None = None  # None -> bundled thai_dict.txt


@dataclass
class LexiconSettings:
    stopwords: str | None = None
    naughty: str | None = None
    adult: str | None = None
    gambling: str | None = None
    truncation: str | None = None


@dataclass
class DedupSettings:
    mode: str = "url"  # "url" | "doc"
    expected_items: int = 1_000_000
    fpr: float = 0.01
    salt: int = 0
    bloom_in: str | None = None
    bloom_out: str | None = None


@dataclass
class ClassifierSettings:
    model_path: str
    threshold: float = 0.5


_DEFAULT_LEXICON_FILES = {
    "stopwords": "stopwords_th.txt",
    "naughty": "naughty_th.txt",
    "adult": "adult_th.txt",
    "gambling": "gambling_th.txt",
    "truncation": "truncation_th.txt",
}


def default_policy_config(classifier_thresholds: dict[str, float] | None = None) -> dict:
    """Default policy in pipeline order: language -> quality -> dedup -> content,
    with corrupt-Unicode removal and PII masking as mask stages.  Passing
    classifier thresholds appends one content drop stage per classifier."""
    quality = (
        "gopher.word_count >= 200 and gopher.word_count <= 100000"
        " and gopher.median_word_length >= 3 and gopher.median_word_length <= 10"
        " and gopher.symbol_to_word_ratio <= 0.10"
        " and gopher.fraction_words_with_thai >= 0.80"
        " and gopher.required_word_count >= 2"
        " and gopher.bullet_line_fraction <= 0.90"
        " and gopher.ellipsis_line_fraction <= 0.30"
        " and gopher.duplicate_line_fraction <= 0.30"
        " and gopher.duplicate_line_char_fraction <= 0.30"
        " and gopher.top_ngram_char_frac_2 <= 0.20"
        " and gopher.top_ngram_char_frac_3 <= 0.18"
        " and gopher.top_ngram_char_frac_4 <= 0.16"
        " and gopher.dup_ngram_char_frac_5 <= 0.15"
        " and gopher.dup_ngram_char_frac_6 <= 0.14"
        " and gopher.dup_ngram_char_frac_7 <= 0.13"
        " and gopher.dup_ngram_char_frac_8 <= 0.12"
        " and gopher.dup_ngram_char_frac_9 <= 0.11"
        " and gopher.dup_ngram_char_frac_10 <= 0.10"
        " and gopher.has_truncation_marker == 0"
        " and c4.has_curly_brace == 0 and c4.has_lorem_ipsum == 0"
        " and c4.has_javascript == 0 and c4.has_naughty_word == 0"
    )
    stages = [
        {"name": "language", "action": "drop", "predicate": "lang.thai_ratio >= 0.5"},
        {"name": "quality", "action": "drop", "predicate": quality},
        {"name": "corrupt_unicode", "action": "mask", "attributes": ["c4.corrupt_unicode"], "replacement": ""},
        {"name": "dedup_url", "action": "drop", "predicate": "dedup.url_duplicate == 0"},
        {"name": "dedup_doc", "action": "drop", "predicate": "dedup.doc_duplicate == 0"},
    ]
    for name, threshold in (classifier_thresholds or {}).items():
        stages.append(
            {
                "name": f"content_{name}",
                "action": "drop",
                "predicate": f"classify.{name} <= {threshold}",
            }
        )
    stages.append(
        {
            "name": "pii",
            "action": "mask",
            "attributes": ["pii.email", "pii.phone_th", "pii.ip"],
            "replacement": "||||",
        }
    )
    return {"stages": stages}


@dataclass
class PipelineConfig:
    tokenizer: TokenizerSettings = field(default_factory=TokenizerSettings)
    lexicons: LexiconSettings = field(default_factory=LexiconSettings)
    gopher: GopherThresholds = field(default_factory=GopherThresholds)
    dedup: DedupSettings = field(default_factory=DedupSettings)
    classifiers: dict[str, ClassifierSettings] = field(default_factory=dict)
    policy: dict | None = None
    workers: int | None = None
    strict: bool = True

    # --- serialization ---

    def to_dict(self) -> dict:
        out = asdict(self)
        if self.workers is None:
            del out["workers"]
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        known = {
            "tokenizer",
            "lexicons",
            "gopher",
            "dedup",
            "classifiers",
            "policy",
            "workers",
            "strict",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        gopher_raw = dict(raw.get("gopher", {}))
        for key in ("top_ngram_char_frac_max", "dup_ngram_char_frac_max"):
            if key in gopher_raw:
                gopher_raw[key] = {int(n): float(v) for n, v in gopher_raw[key].items()}
        try:
            return cls(
                tokenizer=TokenizerSettings(**raw.get("tokenizer", {})),
                lexicons=LexiconSettings(**raw.get("lexicons", {})),
                gopher=GopherThresholds(**gopher_raw),
                dedup=DedupSettings(**raw.get("dedup", {})),
                classifiers={
                    name: ClassifierSettings(**settings)
                    for name, settings in raw.get("classifiers", {}).items()
                },
                policy=raw.get("policy"),
                workers=raw.get("workers"),
                strict=raw.get("strict", True),
            )
        except TypeError as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    @classmethod
    def load(cls, path: str) -> "PipelineConfig":
        try:
            with open(path, "r", encoding="utf-8") as handle:
                raw = json.load(handle)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path} must be a JSON object")
        return cls.from_dict(raw)

    # --- resolution helpers ---

    def dictionary_path(self) -> str:
        return self.tokenizer.dictionary or default_data_path("thai_dict.txt")

    def lexicon_path(self, name: str) -> str:
        configured = getattr(self.lexicons, name)
        return configured or default_data_path(_DEFAULT_LEXICON_FILES[name])

    def load_lexicon(self, name: str) -> Lexicon:
        return Lexicon.load(self.lexicon_path(name), name=name)

    def truncation_phrases(self) -> tuple[str, ...]:
        return tuple(load_wordlist(self.lexicon_path("truncation")))

    def build_tokenizer(self, extra_terms: tuple[str, ...] = ()) -> Tokenizer:
        """Construct the configured tokenizer.  Lexicon terms are merged into
        the dictionary so lexicon matching sees them as whole tokens."""
        if self.tokenizer.mode == "whitespace":
            return WhitespaceTokenizer()
        if self.tokenizer.mode != "simple":
            raise ConfigError(f"unknown tokenizer mode {self.tokenizer.mode!r}")
        words = load_wordlist(self.dictionary_path())
        return DictionaryTokenizer(list(words) + list(extra_terms))

    def pipeline_tokenizer(self) -> Tokenizer:
        extras: list[str] = []
        if self.tokenizer.mode == "simple":
            for name in ("stopwords", "naughty", "adult", "gambling"):
                extras.extend(load_wordlist(self.lexicon_path(name)))
        return self.build_tokenizer(tuple(extras))

    def effective_workers(self, cli_value: int | None = None) -> int:
        if cli_value is not None:
            return max(1, cli_value)
        if self.workers is not None:
            return max(1, self.workers)
        env = os.environ.get("SIEVE_WORKERS")
        if env:
            try:
                return max(1, int(env))
            except ValueError as exc:
                raise ConfigError(f"SIEVE_WORKERS must be an integer, got {env!r}") from exc
        return 1

    def validate(self) -> None:
        if self.tokenizer.mode not in ("simple", "whitespace"):
            raise ConfigError(f"unknown tokenizer mode {self.tokenizer.mode!r}")
        self.gopher.validate()
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not 0.0 < self.dedup.fpr < 1.0:
            raise ConfigError("dedup fpr must be in (0, 1)")
        if self.dedup.expected_items < 1:
            raise ConfigError("dedup expected_items must be >= 1")
        if self.dedup.mode not in ("url", "doc"):
            raise ConfigError(f"unknown dedup mode {self.dedup.mode!r}")
        paths = [self.tokenizer.dictionary]
        paths.extend(getattr(self.lexicons, name) for name in _DEFAULT_LEXICON_FILES)
        paths.append(self.dedup.bloom_in)
        paths.extend(c.model_path for c in self.classifiers.values())
        for path in paths:
            if path and not os.path.exists(path):
                raise ConfigError(f"configured file does not exist: {path}")
