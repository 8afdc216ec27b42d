#!/usr/bin/env python3
"""Throughput benchmark: generate an N-megabyte corpus and time each stage.

Usage:
    python scripts/benchmark_throughput.py --workdir /tmp/sieve-bench --mb 100 --workers 1 8
"""

import argparse
import json
import os
import sys
import time

from sieve.cli import main as sieve
from sieve.config import default_policy_config
from sieve.synthetic import make_throughput_corpus


def timed(label, argv):
    start = time.monotonic()
    code = sieve(argv)
    elapsed = time.monotonic() - start
    if code != 0:
        print(f"{label} failed with exit code {code}", file=sys.stderr)
        sys.exit(code)
    print(f"{label}: {elapsed:.1f}s")
    return elapsed


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", required=True)
    parser.add_argument("--mb", type=int, default=100)
    parser.add_argument("--workers", type=int, nargs="+", default=[1])
    parser.add_argument("--seed", type=int, default=99)
    args = parser.parse_args()

    docs = os.path.join(args.workdir, "documents")
    written = make_throughput_corpus(docs, target_bytes=args.mb * 1024 * 1024, seed=args.seed)
    print(f"corpus: {written / 1e6:.1f} MB under {docs}")

    policy = os.path.join(args.workdir, "policy.json")
    with open(policy, "w", encoding="utf-8") as handle:
        json.dump(default_policy_config(), handle)

    tag_times = {}
    for workers in args.workers:
        attrs = os.path.join(args.workdir, f"attributes-w{workers}")
        tag_times[workers] = timed(
            f"tag (workers={workers})",
            ["tag", "--input", docs, "--output", attrs,
             "--taggers", "lang,c4,gopher,pii", "--workers", str(workers)],
        )
    baseline = min(args.workers)
    for workers, seconds in tag_times.items():
        if workers != baseline:
            print(f"tag speedup {baseline}->{workers} workers: {tag_times[baseline] / seconds:.2f}x")

    attrs = os.path.join(args.workdir, f"attributes-w{baseline}")
    timed("dedupe url", ["dedupe", "--input", docs, "--mode", "url", "--output", attrs,
                         "--expected-items", "1000000", "--fpr", "0.01"])
    timed("dedupe doc", ["dedupe", "--input", docs, "--mode", "doc", "--output", attrs,
                         "--expected-items", "1000000", "--fpr", "0.01"])
    attr_list = ",".join(
        os.path.join(attrs, d) for d in ("lang", "c4", "gopher", "pii", "dedup_url", "dedup_doc")
    )
    timed("mix", ["mix", "--input", docs, "--attrs", attr_list, "--policy", policy,
                  "--output", os.path.join(args.workdir, "cleaned"), "--workers", str(baseline)])


if __name__ == "__main__":
    main()
