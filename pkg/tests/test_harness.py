import json

import pytest

from asyncq import workload as wl
from asyncq.audits import verify_trace
from asyncq.bench import bench_amortized, heavy_run, to_csv
from asyncq.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, load_workload, main
from asyncq.errors import ConfigurationError
from asyncq.lincheck import extract_instances
from asyncq.metrics import theorem_bounds
from asyncq.simnet import Trace

E, D = wl.ENQUEUE, wl.DEQUEUE


def test_heavy_load_rejects_bad_parameters():
    with pytest.raises(ConfigurationError):
        wl.gen_heavily_loaded(2, 0, 5)
    with pytest.raises(ConfigurationError):
        wl.gen_heavily_loaded(2, 4, 5, prefill=3)


def test_heavy_load_shape():
    steps = wl.gen_heavily_loaded(2, 4, 3)
    assert sum(s.op == D for s in steps) == 6
    assert sum(s.op == E for s in steps) == 8 + 6
    assert all(s.op == E and s.barrier for s in steps[:8])


def test_heavy_load_audit():
    assert wl.heavy_load_audit([E, E, D, E, D], 1)
    assert wl.heavy_load_audit([E, E, E, D], 2)
    assert not wl.heavy_load_audit([E, D, E, E], 2)
    assert not wl.heavy_load_audit([E, E, D, D], 2)


def test_heavy_run_witness_stays_loaded():
    trace, _ = heavy_run(2, 4, 20)
    report = verify_trace(trace)
    assert report.ok, report.failures()
    table = {i.id: i for i in extract_instances(trace)}
    ops = [E if table[i].is_enqueue else D for i in report.witness.witness]
    assert wl.heavy_load_audit(ops, 4)


def test_theorem_bounds():
    assert theorem_bounds({0: 100, 1: 100}, 2, 4, 1) == (200, 202)
    assert theorem_bounds({0: 3}, 1, 1, 2) == (12, 12)
    assert theorem_bounds({0: 5, 1: 5}, 2, 1, 1) == (None, None)


def test_single_process_k1_alternates():
    _, m = heavy_run(1, 1, 10)
    assert m.slow == {0: 5} and m.fast == {0: 5}
    assert [g.size for g in m.groups] == [2] * 5


def test_two_process_k2_half_fast():
    _, m = heavy_run(2, 2, 20)
    assert m.slow == {0: 10, 1: 10}
    assert m.total_dequeue_cost == 20 * 2 * m.d


def test_fifo_heavy_run_all_round_trips():
    _, m = heavy_run(2, 2, 10, algorithm="fifo")
    assert set(m.latencies.values()) == {2}
    assert m.bound_sum is None


def test_bench_rows():
    rows = bench_amortized(2, [2, 4], 20)
    assert [r.k for r in rows] == [2, 4]
    assert all(r.verified and r.within_bound for r in rows)
    assert rows[0].ratio_to_first == 1.0
    assert rows[1].total_cost < rows[0].total_cost < rows[0].fifo_cost
    text = to_csv(rows)
    assert text.splitlines()[0].startswith("n,k,quota,m,d,total_cost")


def test_load_workload_shapes():
    assert load_workload([{"process": 0, "op": E}], 1, 1, 0) == [wl.Step(0, E)]
    assert len(load_workload({"generator": "random", "ops": 7}, 2, 1, 0)) == 7
    assert load_workload({"generator": "sequential", "ops": [[0, E]]}, 1, 1, 0)[0].barrier
    with pytest.raises(ConfigurationError):
        load_workload({"generator": "nope"}, 1, 1, 0)


# -- CLI -------------------------------------------------------------------

@pytest.fixture
def workload_file(tmp_path):
    p = tmp_path / "w.json"
    p.write_text(json.dumps({"generator": "sequential", "ops": [[0, E], [1, E], [2, D], [0, D]]}))
    return p


def test_cli_run_and_check(tmp_path, workload_file, capsys):
    out = tmp_path / "t.jsonl"
    rc = main(["run", "--algo", "fifo", "--n", "3", "--delay", "fixed:1", "--self-delay", "1",
               "--workload", str(workload_file), "--out", str(out)])
    assert rc == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["verified"] and set(summary["latencies"].values()) == {2}
    assert main(["check", str(out)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["ok"]


def test_cli_check_catches_doctored_trace(tmp_path, workload_file, capsys):
    out = tmp_path / "t.jsonl"
    main(["run", "--algo", "fifo", "--n", "3", "--workload", str(workload_file), "--out", str(out)])
    capsys.readouterr()
    trace = Trace.read(out)
    # swap the two Dequeue return values
    responds = [e for e in trace.events if e.kind == "respond" and e.op == "dequeue"]
    responds[0].value, responds[1].value = (9, 9), responds[0].value
    trace.write(out)
    assert main(["check", str(out)]) == EXIT_FAIL
    verdict = json.loads(capsys.readouterr().out)
    assert not verdict["ok"]
    assert verdict["violation"]["clause"] in ("(2)", "(3)")


def test_cli_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 2, "algorithm": "relaxed", "k": 4, "delay": "uniform:1:3", "seed": 5,
                               "workload": {"generator": "heavily_loaded", "m": 5}}))
    metrics = tmp_path / "m.json"
    assert main(["run", "--config", str(cfg), "--metrics", str(metrics)]) == EXIT_OK
    data = json.loads(metrics.read_text())
    assert data["m"] == 10 and data["verified"]


def test_cli_bench(capsys):
    assert main(["bench", "--n", "2", "--ks", "2,4", "--m", "10"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3


def test_cli_fuzz(capsys):
    assert main(["fuzz", "--algo", "relaxed", "--runs", "20"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["failures"] == 0


def test_cli_usage_errors(tmp_path, capsys):
    assert main(["check", str(tmp_path / "missing.jsonl")]) == EXIT_USAGE
    assert main(["run", "--algo", "fifo", "--delay", "fixed:1"]) == EXIT_USAGE
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--n", "2", "--workload", str(bad)]) == EXIT_USAGE
    assert main(["run", "--n", "2", "--k", "0", "--algo", "relaxed",
                 "--workload", str(bad)]) == EXIT_USAGE


def test_relaxed_cost_against_unrelaxed_baseline():
    # same heavy workload (n=2, 200 Dequeues) under the FIFO algorithm, every Dequeue a round trip
    rows = bench_amortized(2, [2, 4, 8], 100)
    assert rows[0].fifo_cost == 400
    slack = 2 * 2 * rows[0].d / rows[0].fifo_cost
    assert rows[1].ratio_to_fifo <= 0.5 + slack
    assert rows[2].ratio_to_fifo <= 1 / 3 + slack
    # one slow Dequeue then l fast ones; the last group at a process can be cut short
    for r, size in zip(rows, [2, 3, 5]):
        assert size - 0.2 <= r.mean_group_size <= size


def test_cli_self_delay_same(tmp_path, capsys):
    one = tmp_path / "one.json"
    one.write_text(json.dumps({"generator": "sequential", "ops": [[0, E], [0, D]]}))
    assert main(["run", "--algo", "fifo", "--n", "1", "--delay", "fixed:1", "--self-delay", "same",
                 "--workload", str(one)]) == EXIT_OK
    assert set(json.loads(capsys.readouterr().out)["latencies"].values()) == {2}
    assert main(["run", "--algo", "fifo", "--n", "1", "--delay", "fixed:1",
                 "--workload", str(one)]) == EXIT_OK
    assert set(json.loads(capsys.readouterr().out)["latencies"].values()) == {0}
