import json

import pytest

from sieve.config import (
    ClassifierSettings,
    PipelineConfig,
    default_policy_config,
)
from sieve.errors import ConfigError
from sieve.mixer import compile_policy
from sieve.taggers import DEFAULT_LANGUAGE_CUTOFF
from sieve.thai import DictionaryTokenizer, WhitespaceTokenizer


def test_defaults_resolve_to_bundled_data():
    cfg = PipelineConfig()
    cfg.validate()
    assert cfg.load_lexicon("stopwords").terms
    assert cfg.load_lexicon("naughty").terms
    assert cfg.load_lexicon("gambling").terms
    assert cfg.load_lexicon("adult").terms
    assert cfg.truncation_phrases()
    assert isinstance(cfg.pipeline_tokenizer(), DictionaryTokenizer)


def test_json_round_trip_lossless():
    cfg = PipelineConfig()
    cfg.gopher.min_words = 171
    cfg.dedup.fpr = 0.001
    cfg.classifiers["gambling"] = ClassifierSettings(model_path="/tmp/m.ltxm", threshold=0.7)
    cfg.workers = 4
    raw = json.loads(json.dumps(cfg.to_dict()))
    back = PipelineConfig.from_dict(raw)
    assert back == cfg
    assert back.gopher.top_ngram_char_frac_max == {2: 0.20, 3: 0.18, 4: 0.16}


def test_workers_key_absent_round_trips():
    cfg = PipelineConfig()
    assert cfg.workers is None
    raw = cfg.to_dict()
    assert "workers" not in raw
    assert PipelineConfig.from_dict(raw) == cfg


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({"tokeniser": {}})


def test_validate_missing_files():
    cfg = PipelineConfig()
    cfg.tokenizer.dictionary = "/nonexistent/dict.txt"
    with pytest.raises(ConfigError, match="nonexistent"):
        cfg.validate()


def test_validate_parameter_ranges():
    cfg = PipelineConfig()
    cfg.dedup.fpr = 1.5
    with pytest.raises(ConfigError):
        cfg.validate()
    cfg = PipelineConfig()
    cfg.workers = 0
    with pytest.raises(ConfigError):
        cfg.validate()
    cfg = PipelineConfig()
    cfg.tokenizer.mode = "icu"
    with pytest.raises(ConfigError):
        cfg.validate()


def test_whitespace_mode():
    cfg = PipelineConfig()
    cfg.tokenizer.mode = "whitespace"
    assert isinstance(cfg.pipeline_tokenizer(), WhitespaceTokenizer)


def test_effective_workers_precedence(monkeypatch):
    cfg = PipelineConfig()
    monkeypatch.delenv("SIEVE_WORKERS", raising=False)
    assert cfg.effective_workers() == 1
    monkeypatch.setenv("SIEVE_WORKERS", "6")
    assert cfg.effective_workers() == 6
    cfg.workers = 3
    assert cfg.effective_workers() == 3  # config beats env fallback
    assert cfg.effective_workers(8) == 8  # flag beats config
    monkeypatch.setenv("SIEVE_WORKERS", "oops")
    cfg.workers = None
    with pytest.raises(ConfigError):
        cfg.effective_workers()


def test_default_language_cutoff():
    assert DEFAULT_LANGUAGE_CUTOFF == 0.5
    policy = default_policy_config()
    language = policy["stages"][0]
    assert language["predicate"] == "lang.thai_ratio >= 0.5"


def test_default_policy_compiles_and_orders_stages():
    policy = compile_policy(default_policy_config())
    names = [s.name for s in policy.stages]
    assert names == ["language", "quality", "corrupt_unicode", "dedup_url", "dedup_doc", "pii"]
    actions = {s.name: s.action for s in policy.stages}
    assert actions["corrupt_unicode"] == "mask" and actions["pii"] == "mask"


def test_lexicon_terms_merged_into_tokenizer():
    cfg = PipelineConfig()
    tok = cfg.pipeline_tokenizer()
    # A gambling term absent from the base dictionary still tokenizes whole.
    assert tok.tokenize("บาคาร่า") == ["บาคาร่า"]
    assert tok.tokenize("เล่นบาคาร่าออนไลน์")[:2] == ["เล่น", "บาคาร่า"]
