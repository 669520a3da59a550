"""Replay the run where labeling the whole replica returns one value twice.

Prints the history and the checker verdicts under both label policies.
"""

from asyncq.fuzz import make_case, run_case
from asyncq.lincheck import brute_force_linearizable, extract_instances


def main() -> None:
    for policy in ("unbounded", "bounded"):
        case = make_case("relaxed", 2, label_policy=policy, max_ops=14, small_fraction=0.0)
        outcome = run_case(case)
        inst = extract_instances(outcome.trace)
        print(f"== label policy {policy}: n={case.config.n} k={case.config.k} schedule={case.schedule}")
        for i in sorted(inst, key=lambda i: i.invoked_at):
            print(f"  {i.id:6} {i.kind:12} value={i.value!s:8} [{i.invoke_time}, {i.response_time}]")
        oracle = brute_force_linearizable(inst, case.config.k, bound=len(inst))
        print(f"  oracle: {'linearizable' if oracle.ok else 'NOT linearizable'}")
        for f in outcome.failures()[:6]:
            print(f"  {f}")


if __name__ == "__main__":
    main()
