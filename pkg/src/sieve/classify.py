"""Trainable linear content classifiers and rule-based PII tagging.

The classifier is a hashed bag-of-token-n-grams logistic model trained by
plain SGD: deterministic for a fixed seed, fast enough for corpus-scale
scoring, and persisted as a dense little-endian float32 weight vector.
"""

from __future__ import annotations

import hashlib
import math
import random
import re
import struct
from dataclasses import dataclass, field

import numpy as np

from .documents import ByteIndex, Document, SpanAttribute
from .errors import ConfigError, FormatError, TrainingError
from .taggers import DocView, Lexicon
from .thai import Tokenizer

_MAGIC = b"LTXM"
_VERSION = 1

DEFAULT_DIM = 1 << 20
DEFAULT_NGRAM_MAX = 2


def label_by_lexicon(
    doc: Document | str,
    class_lexicon: Lexicon,
    tokenizer: Tokenizer,
    min_distinct: int = 3,
) -> bool:
    """True iff the document contains >= min_distinct distinct lexicon tokens."""
    text = doc.text if isinstance(doc, Document) else doc
    distinct = set(tokenizer.tokenize(text))
    return len(distinct & class_lexicon.terms) >= min_distinct


def _bucket(key: str, dim: int) -> int:
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % dim


def featurize(
    text: str,
    tokenizer: Tokenizer,
    dim: int = DEFAULT_DIM,
    ngram_max: int = DEFAULT_NGRAM_MAX,
) -> dict[int, float]:
    """Hashed counts of token 1..ngram_max-grams; deterministic."""
    tokens = tokenizer.tokenize(text)
    feats: dict[int, float] = {}
    for n in range(1, ngram_max + 1):
        for i in range(len(tokens) - n + 1):
            key = "\x1f".join(tokens[i : i + n])
            bucket = _bucket(key, dim)
            feats[bucket] = feats.get(bucket, 0.0) + 1.0
    return feats


@dataclass
class LinearTextModel:
    label_name: str
    dim: int
    ngram_max: int
    weights: np.ndarray  # float32, shape (dim,)
    bias: float = 0.0
    hyperparams: dict | None = None
    epoch_losses: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.dim & (self.dim - 1) or self.dim <= 0:
            raise ConfigError(f"feature dim {self.dim} must be a power of two")
        if self.weights.shape != (self.dim,):
            raise ConfigError("weight vector length does not match feature dim")


def _sigmoid(z: float) -> float:
    # Clamp keeps the output strictly inside (0, 1) in float64.
    z = max(-30.0, min(30.0, z))
    return 1.0 / (1.0 + math.exp(-z))


def _as_arrays(feats: dict[int, float]) -> tuple[np.ndarray, np.ndarray]:
    idx = np.fromiter(feats.keys(), dtype=np.int64, count=len(feats))
    val = np.fromiter(feats.values(), dtype=np.float32, count=len(feats))
    return idx, val


def _raw_score(model: LinearTextModel, idx: np.ndarray, val: np.ndarray) -> float:
    if len(idx) == 0:
        return model.bias
    return float(np.dot(model.weights[idx], val)) + model.bias


def predict(model: LinearTextModel, text: str, tokenizer: Tokenizer) -> float:
    idx, val = _as_arrays(featurize(text, tokenizer, model.dim, model.ngram_max))
    return _sigmoid(_raw_score(model, idx, val))


def train_classifier(
    examples,
    label_name: str,
    tokenizer: Tokenizer,
    dim: int = DEFAULT_DIM,
    ngram_max: int = DEFAULT_NGRAM_MAX,
    epochs: int = 5,
    lr: float = 0.1,
    l2: float = 1e-6,
    seed: int = 0,
) -> LinearTextModel:
    """Logistic regression by SGD over hashed n-gram counts.

    `examples` is an iterable of (document-or-text, bool).  Document order is
    shuffled per epoch by `seed`; the learning rate decays linearly over the
    total number of updates.
    """
    data = []
    for item, label in examples:
        text = item.text if isinstance(item, Document) else item
        idx, val = _as_arrays(featurize(text, tokenizer, dim, ngram_max))
        data.append((idx, val, 1.0 if label else 0.0))
    if not data:
        raise TrainingError("empty training stream")
    n_pos = sum(1 for _i, _v, y in data if y == 1.0)
    if n_pos == 0 or n_pos == len(data):
        raise TrainingError("training stream must contain both classes")

    model = LinearTextModel(
        label_name=label_name,
        dim=dim,
        ngram_max=ngram_max,
        weights=np.zeros(dim, dtype=np.float32),
        bias=0.0,
        hyperparams={"epochs": epochs, "lr": lr, "l2": l2, "seed": seed},
    )
    rng = random.Random(seed)
    order = list(range(len(data)))
    total_steps = max(1, epochs * len(data))
    step = 0
    weights = model.weights
    for _epoch in range(epochs):
        rng.shuffle(order)
        for i in order:
            idx, val, y = data[i]
            rate = lr * (1.0 - step / total_steps)
            step += 1
            p = _sigmoid(_raw_score(model, idx, val))
            err = p - y
            if len(idx):
                grad = np.float32(rate * err) * val + np.float32(rate * l2) * weights[idx]
                weights[idx] -= grad
            model.bias -= rate * err
        model.epoch_losses.append(_mean_loss(model, data))
    return model


def _mean_loss(model: LinearTextModel, data) -> float:
    total = 0.0
    for idx, val, y in data:
        p = _sigmoid(_raw_score(model, idx, val))
        total += -(y * math.log(p) + (1.0 - y) * math.log(1.0 - p))
    return total / len(data)


def training_accuracy(model: LinearTextModel, examples, tokenizer: Tokenizer, threshold: float = 0.5) -> float:
    correct = 0
    total = 0
    for item, label in examples:
        text = item.text if isinstance(item, Document) else item
        p = predict(model, text, tokenizer)
        correct += (p > threshold) == bool(label)
        total += 1
    return correct / total if total else 0.0


def model_save(model: LinearTextModel, path: str) -> None:
    label = model.label_name.encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(_MAGIC)
        handle.write(struct.pack("<IH", _VERSION, len(label)))
        handle.write(label)
        handle.write(struct.pack("<QId", model.dim, model.ngram_max, model.bias))
        handle.write(model.weights.astype("<f4", copy=False).tobytes())


def model_load(path: str, expected_dim: int | None = None) -> LinearTextModel:
    with open(path, "rb") as handle:
        blob = handle.read()
    if blob[:4] != _MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:4]!r}")
    offset = 4
    try:
        version, label_len = struct.unpack_from("<IH", blob, offset)
        offset += struct.calcsize("<IH")
        if version != _VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        label = blob[offset : offset + label_len].decode("utf-8")
        offset += label_len
        dim, ngram_max, bias = struct.unpack_from("<QId", blob, offset)
        offset += struct.calcsize("<QId")
    except struct.error as exc:
        raise FormatError(f"{path}: truncated model header") from exc
    body = blob[offset:]
    if len(body) != dim * 4:
        raise FormatError(f"{path}: weight array has {len(body)} bytes, expected {dim * 4}")
    if expected_dim is not None and dim != expected_dim:
        raise ConfigError(f"{path}: model dim {dim} does not match configured dim {expected_dim}")
    weights = np.frombuffer(body, dtype="<f4").astype(np.float32)
    return LinearTextModel(label_name=label, dim=dim, ngram_max=ngram_max, weights=weights, bias=bias)


def tag_classifier(
    doc: Document,
    model: LinearTextModel,
    tokenizer: Tokenizer,
    view: DocView | None = None,
) -> SpanAttribute:
    """Whole-document probability under `model`, named classify.<label>."""
    name = f"classify.{model.label_name}"
    score = predict(model, doc.text, tokenizer)
    if view is not None:
        return view.whole_doc(name, score)
    return SpanAttribute.whole_doc(name, doc.text, score)


# --- PII tagging ---------------------------------------------------------

# Thai phone numbers: "+66" or a leading "0", then 9 digits for mobile
# (leading 6/8/9) or 8 digits for landline (leading area code 2-7), with
# optional single "-" or space separators between digits.
_PHONE_TH = re.compile(
    r"(?<![\d+])(?:\+66|0)[ -]?(?:[689](?:[ -]?\d){8}|[2-7](?:[ -]?\d){7})(?!\d)"
)
_EMAIL = re.compile(r"\b[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}\b")
_IP = re.compile(
    r"(?<![\d.])(?:(?:25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)\.){3}"
    r"(?:25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)(?![\d.])"
)


@dataclass(frozen=True)
class PiiRules:
    email: re.Pattern = _EMAIL
    phone_th: re.Pattern = _PHONE_TH
    ip: re.Pattern = _IP


DEFAULT_PII_RULES = PiiRules()

# Resolution order: earlier rules claim their bytes first.
_PII_ORDER = ("email", "phone_th", "ip")


def tag_pii(
    doc: Document,
    rules: PiiRules = DEFAULT_PII_RULES,
    view: DocView | None = None,
) -> list[SpanAttribute]:
    """Spans of emails, Thai phone numbers, and IPv4 addresses.

    Spans never overlap across rule types: email wins over phone wins over ip.
    """
    text = doc.text
    index = view.byte_index if view is not None else ByteIndex(text)
    claimed: list[tuple[int, int]] = []
    attrs = []
    for kind in _PII_ORDER:
        pattern: re.Pattern = getattr(rules, kind)
        spans = []
        for m in pattern.finditer(text):
            start, end = m.span()
            if any(start < ce and cs < end for cs, ce in claimed):
                continue
            claimed.append((start, end))
            spans.append((index.to_byte(start), index.to_byte(end), 1.0))
        attrs.append(SpanAttribute(f"pii.{kind}", spans))
    return attrs
