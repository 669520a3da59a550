"""Fuzz both algorithms and both label policies, reporting failure counts.

    python scripts/fuzz_sweep.py --runs 1000
"""

import argparse
import time

from asyncq.fuzz import fuzz, summarize


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=1000)
    ap.add_argument("--start", type=int, default=0)
    ap.add_argument("--max-ops", type=int, default=30)
    args = ap.parse_args()

    for algorithm, policy in [("fifo", "bounded"), ("relaxed", "bounded"), ("relaxed", "unbounded")]:
        t0 = time.perf_counter()
        s = summarize(fuzz(algorithm, args.runs, args.start, label_policy=policy, max_ops=args.max_ops))
        kinds = {}
        for o in s.failures:
            for f in o.failures():
                kinds[f.split(":")[0]] = kinds.get(f.split(":")[0], 0) + 1
        print(f"{algorithm:8} {policy:10} runs={s.runs} failures={len(s.failures)} "
              f"oracle_checked={s.oracle_checked} ({time.perf_counter() - t0:.1f}s)")
        for kind, count in sorted(kinds.items(), key=lambda kv: -kv[1]):
            print(f"    {kind}: {count}")


if __name__ == "__main__":
    main()
