import json
import random

import numpy as np
import pytest

from sieve.classify import (
    DEFAULT_PII_RULES,
    LinearTextModel,
    featurize,
    label_by_lexicon,
    model_load,
    model_save,
    predict,
    tag_pii,
    train_classifier,
    training_accuracy,
)
from sieve.documents import Document
from sieve.errors import ConfigError, FormatError, TrainingError
from sieve.synthetic import make_labeled_dataset
from sieve.taggers import Lexicon
from sieve.thai import WhitespaceTokenizer

WS = WhitespaceTokenizer()
LEX = Lexicon("cls", frozenset({"w1", "w2", "w3", "w4"}))


# --- label_by_lexicon -------------------------------------------------------

@pytest.mark.parametrize(
    "text,expected",
    [
        ("x y z", False),  # 0 matches
        ("w1 w1 w1 y", False),  # 1 distinct
        ("w1 w1 w2", False),  # 2 distinct < 3
        ("w1 w2 w3", True),  # exactly 3 distinct
        ("w1 w2 w3 w4", True),
        ("", False),
    ],
)
def test_label_by_lexicon_distinct_threshold(text, expected):
    assert label_by_lexicon(Document(id="d", text=text), LEX, WS) is expected


def test_label_by_lexicon_monotone_in_lexicon():
    text = "w1 w2 q3"
    small = Lexicon("s", frozenset({"w1", "w2"}))
    grown = Lexicon("g", frozenset({"w1", "w2", "q3"}))
    assert not label_by_lexicon(text, small, WS)
    assert label_by_lexicon(text, grown, WS)


# --- featurize ---------------------------------------------------------------

def test_featurize_empty_and_deterministic():
    assert featurize("", WS) == {}
    assert featurize("กิน ข้าว abc", WS) == featurize("กิน ข้าว abc", WS)


def test_featurize_counts_ngrams():
    feats = featurize("a b", WS, dim=1 << 20, ngram_max=2)
    assert len(feats) == 3  # "a", "b", "a b"
    assert sum(feats.values()) == 3.0
    feats = featurize("a a", WS, dim=1 << 20, ngram_max=1)
    assert list(feats.values()) == [2.0]


# --- training ----------------------------------------------------------------

def _separable(n=200, seed=1):
    rng = random.Random(seed)
    fillers = ["คำ", "ไทย", "ปกติ", "ทั่วไป", "ข้อความ"]
    out = []
    for i in range(n):
        words = [rng.choice(fillers) for _ in range(rng.randrange(5, 15))]
        label = i % 2 == 0
        if label:
            words[rng.randrange(len(words))] = "MARKER"
        out.append((" ".join(words), label))
    return out


def test_training_on_separable_data():
    data = _separable()
    model = train_classifier(data, "marker", WS, epochs=5, seed=3)
    assert training_accuracy(model, data, WS) >= 0.99
    assert model.hyperparams == {"epochs": 5, "lr": 0.1, "l2": 1e-6, "seed": 3}


def test_training_is_bit_reproducible():
    data = _separable()
    a = train_classifier(data, "m", WS, seed=11)
    b = train_classifier(data, "m", WS, seed=11)
    assert a.bias == b.bias
    assert a.weights.tobytes() == b.weights.tobytes()


def test_training_errors():
    with pytest.raises(TrainingError):
        train_classifier([], "m", WS)
    with pytest.raises(TrainingError):
        train_classifier([("a", True), ("b", True)], "m", WS)


def test_epoch_losses_non_increasing():
    data = _separable()
    model = train_classifier(data, "m", WS, epochs=5, seed=0)
    for earlier, later in zip(model.epoch_losses, model.epoch_losses[1:]):
        assert later <= earlier + 1e-6


def test_predict_bounds_and_monotonicity():
    model = LinearTextModel("m", 1 << 10, 1, np.zeros(1 << 10, dtype=np.float32))
    assert predict(model, "อะไร ก็ได้", WS) == 0.5
    data = _separable()
    trained = train_classifier(data, "m", WS, dim=1 << 10, ngram_max=1, seed=2)
    probs = [predict(trained, " ".join(["MARKER"] * k), WS) for k in range(1, 5)]
    assert all(b > a for a, b in zip(probs, probs[1:]))
    assert all(0.0 < p < 1.0 for p in probs)


def test_predict_strictly_inside_unit_interval_with_huge_weights():
    model = LinearTextModel("m", 1 << 10, 1, np.full(1 << 10, 1e9, dtype=np.float32), bias=1e9)
    p = predict(model, "a b c", WS)
    assert 0.0 < p < 1.0
    model.weights[:] = -1e9
    model.bias = -1e9
    p = predict(model, "a b c", WS)
    assert 0.0 < p < 1.0


def test_trained_marker_model_confidence():
    data = _separable()
    model = train_classifier(data, "m", WS, seed=5)
    assert predict(model, "คำ MARKER คำ ไทย MARKER", WS) > 0.9
    assert predict(model, "คำ ไทย ปกติ ทั่วไป ข้อความ คำ ไทย ปกติ", WS) < 0.1


# --- persistence ---------------------------------------------------------------

def test_model_round_trip_predict_equality(tmp_path):
    data = _separable()
    model = train_classifier(data, "round", WS, seed=9)
    path = str(tmp_path / "m.ltxm")
    model_save(model, path)
    back = model_load(path)
    assert back.label_name == "round"
    assert (back.dim, back.ngram_max) == (model.dim, model.ngram_max)
    assert back.bias == model.bias
    assert back.weights.tobytes() == model.weights.tobytes()
    rng = random.Random(0)
    for _ in range(50):
        text = " ".join(rng.choice(["คำ", "MARKER", "ไทย", "x"]) for _ in range(rng.randrange(0, 12)))
        assert predict(back, text, WS) == predict(model, text, WS)


def test_model_bad_magic(tmp_path):
    path = str(tmp_path / "bad.ltxm")
    open(path, "wb").write(b"WRNG" + b"\0" * 32)
    with pytest.raises(FormatError):
        model_load(path)


def test_model_dim_mismatch_is_config_error(tmp_path):
    model = train_classifier(_separable(20), "m", WS, dim=1 << 12)
    path = str(tmp_path / "m.ltxm")
    model_save(model, path)
    with pytest.raises(ConfigError):
        model_load(path, expected_dim=1 << 20)


def test_truncated_model_is_format_error(tmp_path):
    model = train_classifier(_separable(20), "m", WS, dim=1 << 12)
    path = str(tmp_path / "m.ltxm")
    model_save(model, path)
    blob = open(path, "rb").read()
    open(path, "wb").write(blob[: len(blob) // 2])
    with pytest.raises(FormatError):
        model_load(path)


def test_synthetic_labeled_dataset_is_separable(tmp_path, dict_tokenizer):
    path = str(tmp_path / "labels.jsonl")
    make_labeled_dataset(path, n=200, seed=7)
    examples = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            obj = json.loads(line)
            examples.append((obj["text"], bool(obj["label"])))
    assert sum(1 for _t, y in examples if y) == 100
    model = train_classifier(examples, "gambling", dict_tokenizer, epochs=5, seed=0)
    assert training_accuracy(model, examples, dict_tokenizer) >= 0.99


# --- PII ---------------------------------------------------------------------

def _pii(text):
    doc = Document(id="p", text=text)
    raw = text.encode("utf-8")
    out = {}
    for attr in tag_pii(doc):
        out[attr.name] = [raw[s:e].decode() for s, e, _ in attr.spans]
    return out


def test_pii_phone_formats():
    assert _pii("โทร 081-234-5678 ครับ")["pii.phone_th"] == ["081-234-5678"]
    assert _pii("โทร 0812345678")["pii.phone_th"] == ["0812345678"]
    assert _pii("+66 81 234 5678")["pii.phone_th"] == ["+66 81 234 5678"]
    assert _pii("02-123-4567")["pii.phone_th"] == ["02-123-4567"]
    assert _pii("+6621234567")["pii.phone_th"] == ["+6621234567"]


def test_pii_phone_rejections():
    assert _pii("123456789012345")["pii.phone_th"] == []  # long digit run
    assert _pii("0112345678")["pii.phone_th"] == []  # bad mobile prefix
    assert _pii("081-234-567")["pii.phone_th"] == []  # too short


def test_pii_email():
    assert _pii("contact a@b.co now")["pii.email"] == ["a@b.co"]
    assert _pii("бpage a.b@mail.example.org")["pii.email"] == ["a.b@mail.example.org"]
    assert _pii("no at sign b.co")["pii.email"] == []


def test_pii_ip():
    assert _pii("server 10.0.255.7 up")["pii.ip"] == ["10.0.255.7"]
    assert _pii("999.1.1.1")["pii.ip"] == []  # octet out of range
    assert _pii("1.2.3.4.5")["pii.ip"] == []


def test_pii_types_never_overlap():
    text = "mail a0812345678@b.co or call 0812345678 at 1.2.3.4"
    doc = Document(id="p", text=text)
    claimed = []
    for attr in tag_pii(doc, DEFAULT_PII_RULES):
        for s, e, _ in attr.spans:
            for cs, ce in claimed:
                assert not (s < ce and cs < e), "PII spans overlap"
            claimed.append((s, e))
    assert _pii(text)["pii.email"] == ["a0812345678@b.co"]
    assert _pii(text)["pii.phone_th"] == ["0812345678"]


def test_pii_thai_text_offsets_valid():
    text = "ติดต่อ ที่ 089 123 4567 หรือ a@b.th"
    doc = Document(id="p", text=text)
    for attr in tag_pii(doc):
        attr.validate_against(text)
