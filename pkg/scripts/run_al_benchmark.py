#!/usr/bin/env python3
"""Run the margin-vs-random label-efficiency benchmark.

Executes both acquisition arms over several seeds on the confusable
synthetic corpus and prints per-seed trajectories, the label-spend
ratio at the target macro-F1, and mean per-round trajectories.
"""

import argparse
import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gdprscan.benchmark import (BenchmarkConfig, label_ratio,
                                mean_f1_trajectory, run_benchmark)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=5,
                        help="number of seeds to average over")
    parser.add_argument("--target", type=float, default=None,
                        help="macro-F1 target (default from BenchmarkConfig)")
    parser.add_argument("--out", type=Path, default=None,
                        help="write the full result table as JSON")
    args = parser.parse_args()

    config = BenchmarkConfig()
    if args.target is not None:
        config = BenchmarkConfig(
            corpus=config.corpus, n_eval_docs=config.n_eval_docs,
            embedding=config.embedding, classifier=config.classifier,
            al=config.al, max_rounds=config.max_rounds, target_f1=args.target)

    started = time.monotonic()
    results = run_benchmark(config, seeds=range(args.seeds))
    elapsed = time.monotonic() - started

    for res in results:
        m = res.margin.labels_to_target(config.target_f1)
        r = res.random.labels_to_target(config.target_f1)
        print("seed %d" % res.seed)
        print("  margin f1:     %s" % ([round(x, 3) for x in res.margin.f1_per_round],))
        print("  random f1:     %s" % ([round(x, 3) for x in res.random.f1_per_round],))
        print("  labels to %.2f: margin %s random %s"
              % (config.target_f1, m, r))
    ratio = label_ratio(results, config.target_f1)
    margin_mean = mean_f1_trajectory(results, arm="margin")
    random_mean = mean_f1_trajectory(results, arm="random")
    print("label ratio at %.2f: %.3f" % (config.target_f1, ratio))
    print("mean margin trajectory: %s" % ([round(x, 3) for x in margin_mean],))
    print("mean random trajectory: %s" % ([round(x, 3) for x in random_mean],))
    print("elapsed: %.1fs" % elapsed)

    if args.out:
        table = {
            "target_f1": config.target_f1,
            "label_ratio": ratio,
            "mean_margin_f1": margin_mean,
            "mean_random_f1": random_mean,
            "elapsed_seconds": elapsed,
            "seeds": [
                {
                    "seed": res.seed,
                    "margin_f1": res.margin.f1_per_round,
                    "margin_labels": res.margin.labels_per_round,
                    "random_f1": res.random.f1_per_round,
                    "random_labels": res.random.labels_per_round,
                }
                for res in results
            ],
        }
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(table, fh, ensure_ascii=True, indent=2, sort_keys=True)
            fh.write("\n")
        print("wrote %s" % args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
