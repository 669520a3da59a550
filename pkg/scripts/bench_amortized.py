"""Sweep k under heavy load and print cost against the theorem bound and the FIFO baseline.

    python scripts/bench_amortized.py --n 2 --m 100 --ks 2,4,8 --out results/amortized.csv
"""

import argparse
from pathlib import Path

from asyncq.bench import bench_amortized, to_csv
from asyncq.config import DelayModel


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--m", type=int, default=100, help="Dequeues per process")
    ap.add_argument("--ks", default="2,4,8")
    ap.add_argument("--delay", default="fixed:1")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()

    rows = bench_amortized(args.n, [int(k) for k in args.ks.split(",")], args.m,
                           DelayModel.parse(args.delay), args.seed)
    print(f"{'k':>4} {'l':>3} {'cost':>6} {'bound':>8} {'slow':>5} {'fast':>5} "
          f"{'vs first':>9} {'vs fifo':>8} {'group':>6}")
    for r in rows:
        print(f"{r.k:>4} {r.quota:>3} {r.total_cost:>6} {r.bound_closed:>8.1f} {r.slow:>5} {r.fast:>5} "
              f"{r.ratio_to_first:>9.3f} {r.ratio_to_fifo:>8.3f} {r.mean_group_size:>6.2f}")
    print(f"fifo baseline cost {rows[0].fifo_cost}")
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(to_csv(rows))


if __name__ == "__main__":
    main()
