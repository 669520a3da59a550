"""Command line: run, check, bench, fuzz.

Exit status is 0 when everything verified, 1 on a verification failure and
2 on usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path
from typing import Optional

from . import lincheck
from . import workload as wl
from .audits import verify_trace
from .bench import bench_amortized, to_csv
from .config import DelayModel, RunConfig
from .errors import ConfigurationError, ProtocolViolation
from .fuzz import fuzz, summarize
from .metrics import compute_metrics
from .simnet import Trace, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_UNSET = object()  # --self-delay not given; "same" maps to None


class UsageError(Exception):
    pass


def _read_json(path: str) -> object:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def load_workload(spec: object, n: int, k: int, seed: int) -> list[wl.Step]:
    """Build steps from a workload spec.

    Accepted shapes: a list of step objects; {"steps": [...]};
    {"generator": "sequential", "ops": [[process, op], ...]};
    {"generator": "random", "ops": N}; {"generator": "random_sequential", "ops": N};
    {"generator": "heavily_loaded", "m": M, "prefill": P?}.
    """
    if isinstance(spec, list):
        return [wl.Step.from_dict(s) for s in spec]
    if not isinstance(spec, dict):
        raise ConfigurationError("workload must be a list of steps or an object")
    if "steps" in spec:
        return [wl.Step.from_dict(s) for s in spec["steps"]]
    gen = spec.get("generator")
    rng = random.Random(f"workload-{seed}")
    if gen == "sequential":
        return wl.sequential([(int(p), op) for p, op in spec["ops"]])
    if gen == "random":
        return wl.random_mixed(n, int(spec["ops"]), rng)
    if gen == "random_sequential":
        return wl.random_sequential(n, int(spec["ops"]), rng)
    if gen == "heavily_loaded":
        return wl.gen_heavily_loaded(n, k, int(spec["m"]), seed, spec.get("prefill"))
    raise ConfigurationError(f"unknown workload generator {gen!r}")


def _config_from_args(args) -> tuple[RunConfig, object]:
    raw: dict = {}
    if args.config:
        loaded = _read_json(args.config)
        if not isinstance(loaded, dict):
            raise UsageError(f"{args.config}: config must be a JSON object")
        raw = dict(loaded)
    workload_spec = raw.pop("workload", None)
    if args.algo:
        raw["algorithm"] = args.algo
    if args.n is not None:
        raw["n"] = args.n
    if args.k is not None:
        raw["k"] = args.k
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.label_policy:
        raw["label_policy"] = args.label_policy
    if args.delay:
        self_delay = 0 if args.self_delay is _UNSET else args.self_delay
        raw["delay"] = DelayModel.parse(args.delay, self_delay=self_delay).to_dict()
    elif args.self_delay is not _UNSET:
        delay = raw.get("delay", {})
        delay = DelayModel.from_dict(delay).to_dict()
        delay["self_delay"] = args.self_delay
        raw["delay"] = delay
    if "n" not in raw:
        raise UsageError("--n (or n in the config file) is required")
    if args.workload:
        workload_spec = _read_json(args.workload)
    if workload_spec is None:
        raise UsageError("no workload given (--workload or 'workload' in the config file)")
    return RunConfig.from_dict(raw), workload_spec


def cmd_run(args) -> int:
    config, spec = _config_from_args(args)
    steps = load_workload(spec, config.n, config.k, config.seed)
    trace = run(config, steps)
    report = verify_trace(trace)
    metrics = compute_metrics(trace)
    out = metrics.to_json()
    out["verified"] = report.ok
    out["failures"] = report.failures()
    out["digest"] = trace.digest()
    if args.out:
        trace.write(args.out)
    text = json.dumps(out, indent=2, sort_keys=True, default=str)
    if args.metrics:
        Path(args.metrics).write_text(text + "\n")
    else:
        summary = {"verified": report.ok, "d": metrics.d, "latencies": metrics.latencies,
                   "total_dequeue_cost": metrics.total_dequeue_cost}
        print(json.dumps(summary, sort_keys=True))
    for f in report.failures():
        print(f"FAIL {f}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


def check_trace(trace: Trace, algorithm: Optional[str] = None, k: Optional[int] = None) -> dict:
    algorithm = algorithm or trace.config.get("algorithm", "fifo")
    if k is not None and algorithm == "fifo" and k > 1:
        algorithm = "relaxed"
    k = k if k is not None else int(trace.config.get("k", 1))
    if algorithm == "fifo":
        k = 1
    trace.config = {**trace.config, "algorithm": algorithm, "k": k}
    instances = lincheck.extract_instances(trace)
    verdict = lincheck.check_witness(instances, algorithm, k)
    out = verdict.to_json()
    if len(instances) <= lincheck.DEFAULT_BOUND:
        oracle = lincheck.brute_force_linearizable(instances, k)
        out["oracle"] = oracle.to_json()
    report = verify_trace(trace)
    out["audits"] = {name: probs for name, probs in report.problems.items() if probs}
    out["ok"] = report.ok
    return out


def cmd_check(args) -> int:
    try:
        trace = Trace.read(args.trace)
    except OSError as exc:
        raise UsageError(f"cannot read {args.trace}: {exc.strerror}") from exc
    except (ValueError, KeyError) as exc:
        raise UsageError(f"{args.trace}: malformed trace: {exc}") from exc
    out = check_trace(trace, args.algo, args.k)
    print(json.dumps(out, sort_keys=True, default=str))
    return EXIT_OK if out["ok"] else EXIT_FAIL


def cmd_bench(args) -> int:
    ks = [int(x) for x in args.ks.split(",")] if args.ks else None
    delay = DelayModel.parse(args.delay, self_delay=args.self_delay)
    rows = bench_amortized(args.n, ks, args.m, delay, args.seed, args.label_policy or "bounded")
    text = to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    ok = all(r.within_bound and r.verified for r in rows)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_fuzz(args) -> int:
    kw = {"label_policy": args.label_policy or "bounded", "max_ops": args.max_ops}
    if args.n is not None:
        kw["n"] = args.n
    if args.k is not None:
        kw["k"] = args.k
    summary = summarize(fuzz(args.algo, args.runs, args.seed or 0, **kw))
    for o in summary.failures[:10]:
        print(f"seed {o.case.seed} ({o.case.schedule}, n={o.case.config.n}, k={o.case.config.k}): "
              + "; ".join(o.failures()[:3]), file=sys.stderr)
    print(json.dumps({"runs": summary.runs, "failures": len(summary.failures),
                      "oracle_checked": summary.oracle_checked}))
    return EXIT_OK if summary.ok else EXIT_FAIL


def _self_delay(text: str) -> Optional[int]:
    """An integer tick count, or "same" for the cross-channel delay."""
    if text == "same":
        return None
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'same', got {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algo", choices=("fifo", "relaxed"))
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--label-policy", choices=("bounded", "unbounded"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asyncq", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one run, write trace and metrics")
    _common(p)
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--delay", help="fixed:D or uniform:LO:HI")
    p.add_argument("--self-delay", type=_self_delay, default=_UNSET,
                   help="ticks for messages to self, or 'same' (default 0)")
    p.add_argument("--workload", help="JSON workload file")
    p.add_argument("--out", help="trace JSONL output path")
    p.add_argument("--metrics", help="metrics JSON output path")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="verify a trace file")
    p.add_argument("trace")
    p.add_argument("--algo", choices=("fifo", "relaxed"))
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="amortized Dequeue cost sweep, CSV out")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--ks", help="comma-separated k values (default n,2n,3n)")
    p.add_argument("--m", type=int, default=100, help="Dequeues per process")
    p.add_argument("--delay", default="fixed:1")
    p.add_argument("--self-delay", type=_self_delay, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--label-policy", choices=("bounded", "unbounded"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fuzz", help="seeded runs, each verified")
    _common(p)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--max-ops", type=int, default=30)
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if args.command == "fuzz" and not args.algo:
        parser.error("fuzz needs --algo")
    try:
        return args.func(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"asyncq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProtocolViolation as exc:
        print(f"asyncq: protocol violation: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
