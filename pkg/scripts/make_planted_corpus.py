#!/usr/bin/env python3
"""Generate a planted-defect corpus plus its plan file.

Usage:
    python scripts/make_planted_corpus.py --out corpus/ --total 1000 --seed 20240701
"""

import argparse
import os

from sieve.synthetic import make_planted_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="corpus root; documents go in <out>/documents")
    parser.add_argument("--total", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=20240701)
    parser.add_argument("--shards", type=int, default=4)
    args = parser.parse_args()

    doc_dir = os.path.join(args.out, "documents")
    plan = make_planted_corpus(doc_dir, total=args.total, seed=args.seed, shards=args.shards)
    plan_path = os.path.join(args.out, "plan.json")
    plan.save(plan_path)
    print(f"wrote {args.total} documents to {doc_dir}")
    print(f"plan: {plan_path}")
    for stage, count in plan.expected_drops.items():
        print(f"  expected drops at {stage}: {count}")


if __name__ == "__main__":
    main()
