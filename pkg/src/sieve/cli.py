"""Operator entry point: tag, dedupe, train-filter, mix, and stats subcommands.

Exit codes: 0 success, 1 I/O or runtime failure, 2 usage/config error.
Progress goes to stderr; machine-readable results to stdout or files.
Parallelism is per shard file; the dedupe subcommand is always sequential
because first-occurrence semantics depend on corpus order.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import classify, dedup, mixer, stats
from .config import PipelineConfig, default_policy_config
from .documents import (
    AttributeRecord,
    ReadStats,
    list_shards,
    read_shard,
    write_attributes,
)
from .errors import ConfigError, SieveError
from .taggers import DocView, lower_median, tag_c4, tag_gopher, tag_language

KNOWN_TAGGERS = ("lang", "c4", "gopher", "pii")

_WORKER_STATE: dict = {}


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _tagger_dir_name(tagger: str) -> str:
    return tagger.replace(":", "_")


def _load_tag_state(config: PipelineConfig, taggers: list[str]) -> dict:
    state = {
        "config": config,
        "taggers": taggers,
        "tokenizer": config.pipeline_tokenizer(),
        "strict": config.strict,
    }
    if "c4" in taggers:
        state["naughty"] = config.load_lexicon("naughty")
    if "gopher" in taggers:
        state["stopwords"] = config.load_lexicon("stopwords")
        state["truncation"] = config.truncation_phrases()
    state["models"] = {}
    for tagger in taggers:
        if tagger.startswith("classify:"):
            name = tagger.split(":", 1)[1]
            settings = config.classifiers.get(name)
            if settings is None:
                raise ConfigError(f"classifier {name!r} not configured (no model path)")
            state["models"][name] = classify.model_load(settings.model_path)
    return state


def _init_tag_worker(config: PipelineConfig, taggers: list[str], input_dir: str, output_dir: str) -> None:
    _WORKER_STATE.clear()
    _WORKER_STATE.update(_load_tag_state(config, taggers))
    _WORKER_STATE["input_dir"] = input_dir
    _WORKER_STATE["output_dir"] = output_dir


def _tag_shard(relpath: str) -> dict[str, int]:
    state = _WORKER_STATE
    config: PipelineConfig = state["config"]
    taggers: list[str] = state["taggers"]
    tokenizer = state["tokenizer"]
    in_path = os.path.join(state["input_dir"], relpath)
    records: dict[str, list[AttributeRecord]] = {t: [] for t in taggers}
    read_stats = ReadStats()
    for doc in read_shard(in_path, strict=state["strict"], stats=read_stats):
        view = DocView(doc, tokenizer)
        for tagger in taggers:
            if tagger == "lang":
                attrs = [tag_language(doc, view=view)]
            elif tagger == "c4":
                attrs = tag_c4(doc, state["naughty"], tokenizer, view=view)
            elif tagger == "gopher":
                attrs = tag_gopher(
                    doc,
                    config.gopher,
                    tokenizer,
                    state["stopwords"],
                    truncation_phrases=state["truncation"],
                    view=view,
                )
            elif tagger == "pii":
                attrs = classify.tag_pii(doc, view=view)
            else:
                name = tagger.split(":", 1)[1]
                attrs = [classify.tag_classifier(doc, state["models"][name], tokenizer, view=view)]
            records[tagger].append(AttributeRecord.from_span_attributes(doc.id, attrs))
    counts = {}
    for tagger, recs in records.items():
        out_path = os.path.join(state["output_dir"], _tagger_dir_name(tagger), relpath)
        write_attributes(out_path, recs)
        counts[tagger] = len(recs)
    if read_stats.skipped:
        counts["_skipped"] = read_stats.skipped
    return counts


def _parse_taggers(raw: str) -> list[str]:
    taggers = [t.strip() for t in raw.split(",") if t.strip()]
    if not taggers:
        raise ConfigError("no taggers requested")
    for tagger in taggers:
        if tagger in KNOWN_TAGGERS:
            continue
        if tagger.startswith("classify:") and tagger.split(":", 1)[1]:
            continue
        raise ConfigError(
            f"unknown tagger {tagger!r}; expected one of {', '.join(KNOWN_TAGGERS)} or classify:NAME"
        )
    return taggers


def cmd_tag(args) -> int:
    config = _load_config(args)
    taggers = _parse_taggers(args.taggers)
    workers = config.effective_workers(args.workers)
    shards = list_shards(args.input)
    _log(f"tag: {len(shards)} shards, taggers={','.join(taggers)}, workers={workers}")
    totals = {t: 0 for t in taggers}
    if workers <= 1 or len(shards) <= 1:
        _init_tag_worker(config, taggers, args.input, args.output)
        results = [_tag_shard(rel) for rel in shards]
    else:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_init_tag_worker,
            initargs=(config, taggers, args.input, args.output),
        ) as pool:
            results = list(pool.map(_tag_shard, shards))
    skipped = 0
    for counts in results:
        skipped += counts.pop("_skipped", 0)
        for tagger, count in counts.items():
            totals[tagger] += count
    for tagger in taggers:
        print(f"tagger={tagger} documents={totals[tagger]}")
    if skipped:
        _log(f"tag: skipped {skipped} malformed lines (lenient mode)")
    return 0


def cmd_dedupe(args) -> int:
    config = _load_config(args)
    mode = args.mode
    if mode == "doc_text":  # accepted alias
        mode = "doc"
    expected = args.expected_items if args.expected_items is not None else config.dedup.expected_items
    fpr = args.fpr if args.fpr is not None else config.dedup.fpr
    bloom_in = args.bloom_in or config.dedup.bloom_in
    bloom_out = args.bloom_out or config.dedup.bloom_out
    if bloom_in:
        bloom = dedup.BloomFilter.load(bloom_in)
    else:
        bloom = dedup.bloom_new(expected, fpr, salt=config.dedup.salt)
    output = args.output or os.path.join(os.path.dirname(os.path.abspath(args.input)), "attributes")
    sidecar = os.path.join(output, f"dedup_{mode}")
    shards = list_shards(args.input)
    _log(f"dedupe: {len(shards)} shards, mode={mode}, m={bloom.bit_count}, k={bloom.hash_count}")
    dedup_stats = dedup.DedupStats()
    for relpath in shards:
        docs = read_shard(os.path.join(args.input, relpath), strict=config.strict)
        records = list(dedup.dedup_pass(docs, mode, bloom, stats=dedup_stats))
        write_attributes(os.path.join(sidecar, relpath), records)
    if bloom_out:
        bloom.save(bloom_out)
    if dedup_stats.capacity_warnings:
        _log(
            f"dedupe: filter over capacity ({bloom.item_count} inserts > "
            f"~{bloom.capacity_estimate}); results valid but FPR degrades"
        )
    print(f"documents={dedup_stats.documents} duplicates={dedup_stats.duplicates}")
    return 0


def cmd_train_filter(args) -> int:
    config = _load_config(args)
    tokenizer = config.pipeline_tokenizer()
    examples = []
    with open(args.data, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                examples.append((str(obj["text"]), bool(int(obj["label"]))))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"{args.data}:{line_no}: bad labeled record: {exc}") from exc
    model = classify.train_classifier(
        examples,
        label_name=args.label,
        tokenizer=tokenizer,
        epochs=args.epochs,
        lr=args.lr,
        seed=args.seed,
    )
    classify.model_save(model, args.out)
    accuracy = classify.training_accuracy(model, examples, tokenizer)
    print(f"label={args.label} examples={len(examples)} training_accuracy={accuracy:.4f}")
    return 0


def cmd_mix(args) -> int:
    config = _load_config(args)
    tokenizer = config.pipeline_tokenizer()
    if args.policy:
        try:
            with open(args.policy, "r", encoding="utf-8") as handle:
                policy_config = json.load(handle)
        except OSError as exc:
            raise SieveError(f"cannot read policy {args.policy}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"policy {args.policy} is not valid JSON: {exc}") from exc
    elif config.policy is not None:
        policy_config = config.policy
    else:
        policy_config = default_policy_config()
    policy = mixer.compile_policy(policy_config)
    attr_dirs = [d for part in args.attrs for d in part.split(",") if d]
    workers = config.effective_workers(args.workers)
    digest = mixer.config_digest({"config": config.to_dict(), "policy": policy_config})
    report = mixer.mix(
        args.input,
        attr_dirs,
        policy,
        args.output,
        tokenizer,
        strict=config.strict,
        workers=workers,
        config_sha256=digest,
    )
    print(json.dumps(report.to_dict()["totals"]))
    return 0


def _init_stats_worker(config: PipelineConfig, input_dir: str, metric: str) -> None:
    _WORKER_STATE.clear()
    _WORKER_STATE.update(
        {
            "config": config,
            "tokenizer": config.pipeline_tokenizer(),
            "input_dir": input_dir,
            "metric": metric,
        }
    )


def _stats_shard(relpath: str) -> list[int]:
    state = _WORKER_STATE
    tokenizer = state["tokenizer"]
    metric = state["metric"]
    values = []
    for doc in read_shard(os.path.join(state["input_dir"], relpath), strict=state["config"].strict):
        tokens = tokenizer.tokenize(doc.text)
        if metric == "word_count":
            values.append(len(tokens))
        else:
            values.append(lower_median([len(t) for t in tokens]))
    return values


def cmd_stats(args) -> int:
    config = _load_config(args)
    workers = config.effective_workers(args.workers)
    shards = list_shards(args.input)
    if workers <= 1 or len(shards) <= 1:
        _init_stats_worker(config, args.input, args.metric)
        chunks = [_stats_shard(rel) for rel in shards]
    else:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_init_stats_worker,
            initargs=(config, args.input, args.metric),
        ) as pool:
            chunks = list(pool.map(_stats_shard, shards))
    values = [v for chunk in chunks for v in chunk]
    result: dict = {"metric": args.metric}
    if args.metric == "word_count":
        result.update(stats.summarize(values))
    else:
        result["count"] = len(values)
        result["value_counts"] = stats.value_counts(values)
    if args.bins:
        result["histogram"] = stats.histogram(values, args.bins)
    print(json.dumps(result, ensure_ascii=False))
    return 0


def _load_config(args) -> PipelineConfig:
    if getattr(args, "config", None):
        config = PipelineConfig.load(args.config)
    else:
        config = PipelineConfig()
    config.validate()
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sieve", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, workers=True):
        p.add_argument("--config", help="pipeline config JSON")
        if workers:
            p.add_argument("--workers", type=int, default=None, help="shard-level parallelism")

    p = sub.add_parser("tag", help="write attribute sidecars for the requested taggers")
    p.add_argument("--input", required=True, help="document shard directory")
    p.add_argument("--output", required=True, help="attribute root directory")
    p.add_argument("--taggers", required=True, help="comma list: lang,c4,gopher,pii,classify:NAME")
    common(p)
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("dedupe", help="mark URL or exact-text duplicates (sequential)")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", required=True, choices=["url", "doc", "doc_text"])
    p.add_argument("--fpr", type=float, default=None)
    p.add_argument("--expected-items", type=int, default=None)
    p.add_argument("--bloom-in", default=None, help="resume from a saved filter")
    p.add_argument("--bloom-out", default=None, help="persist the filter")
    p.add_argument("--output", default=None, help="attribute root (default: <input>/../attributes)")
    common(p, workers=False)
    p.set_defaults(func=cmd_dedupe)

    p = sub.add_parser("train-filter", aliases=["train_filter"], help="train a content classifier")
    p.add_argument("--data", required=True, help="JSONL with 'text' and 'label' (0/1)")
    p.add_argument("--label", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    common(p, workers=False)
    p.set_defaults(func=cmd_train_filter)

    p = sub.add_parser("mix", help="apply the filter policy and write the cleaned corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--attrs", required=True, action="append", help="attribute dir(s), comma separated")
    p.add_argument("--policy", default=None, help="policy JSON (default: built-in policy)")
    p.add_argument("--output", required=True)
    common(p)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("stats", help="descriptive corpus statistics")
    p.add_argument("--input", required=True)
    p.add_argument("--metric", choices=["word_count", "median_word_length"], default="word_count")
    p.add_argument("--bins", type=int, default=None, help="equal-width histogram bins")
    common(p)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _log(f"error: {exc}")
        return 2
    except SieveError as exc:
        _log(f"error: {exc}")
        return 1
    except OSError as exc:
        _log(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
