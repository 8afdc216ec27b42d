#!/usr/bin/env python3
"""End-to-end demo: generate a planted corpus, train the gambling filter, tag,
dedupe, mix, and print the per-stage accounting next to the plant plan.

Usage:
    python scripts/run_pipeline_demo.py --workdir /tmp/sieve-demo [--total 1000]
"""

import argparse
import json
import os
import sys
import time

from sieve.cli import main as sieve
from sieve.config import default_policy_config
from sieve.synthetic import make_labeled_dataset, make_planted_corpus

TAGGERS = "lang,c4,gopher,pii,classify:gambling"
ATTR_DIRS = ("lang", "c4", "gopher", "pii", "classify_gambling", "dedup_url", "dedup_doc")


def run(argv) -> None:
    code = sieve(argv)
    if code != 0:
        print(f"command {' '.join(argv)} failed with exit code {code}", file=sys.stderr)
        sys.exit(code)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", required=True)
    parser.add_argument("--total", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=20240701)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    root = args.workdir
    docs = os.path.join(root, "documents")
    attrs = os.path.join(root, "attributes")
    out = os.path.join(root, "cleaned")
    started = time.monotonic()

    plan = make_planted_corpus(docs, total=args.total, seed=args.seed)
    labels = os.path.join(root, "labels.jsonl")
    make_labeled_dataset(labels, n=200, seed=7)
    model = os.path.join(root, "gambling.ltxm")
    run(["train-filter", "--data", labels, "--label", "gambling", "--out", model, "--seed", "0"])

    config = os.path.join(root, "config.json")
    with open(config, "w", encoding="utf-8") as handle:
        json.dump({"classifiers": {"gambling": {"model_path": model}}}, handle)
    policy = os.path.join(root, "policy.json")
    with open(policy, "w", encoding="utf-8") as handle:
        json.dump(default_policy_config({"gambling": 0.5}), handle)

    workers = ["--workers", str(args.workers)]
    run(["tag", "--input", docs, "--output", attrs, "--taggers", TAGGERS, "--config", config] + workers)
    run(["dedupe", "--input", docs, "--mode", "url", "--expected-items", "10000", "--fpr", "0.01"])
    run(["dedupe", "--input", docs, "--mode", "doc", "--expected-items", "10000", "--fpr", "0.01"])
    attr_list = ",".join(os.path.join(attrs, d) for d in ATTR_DIRS)
    run(["mix", "--input", docs, "--attrs", attr_list, "--policy", policy,
         "--output", out, "--config", config] + workers)

    report = json.load(open(os.path.join(out, "report.json"), encoding="utf-8"))
    print(f"\n{'stage':<18} {'in':>6} {'dropped':>8} {'planted':>8} {'tokens dropped':>15}")
    for stage in report["stages"]:
        planted = plan.expected_drops.get(stage["name"], 0)
        print(
            f"{stage['name']:<18} {stage['documents_in']:>6} {stage['documents_dropped']:>8}"
            f" {planted:>8} {stage['tokens_dropped']:>15}"
        )
    totals = report["totals"]
    print(f"\n{totals['documents_in']} documents in, {totals['documents_out']} out "
          f"({totals['tokens_out']} tokens) in {time.monotonic() - started:.1f}s")
    print(f"cleaned corpus: {out}")


if __name__ == "__main__":
    main()
