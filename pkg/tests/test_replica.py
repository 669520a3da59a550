import pytest
from hypothesis import given
from hypothesis import strategies as st

from asyncq.errors import ProtocolViolation
from asyncq.replica import LocalQueue


def q_of(*items):
    """items: (value, ts, label) triples; enqueuer is taken from the value name."""
    q = LocalQueue()
    for value, ts, label in items:
        e = q.insert_by_ts(value, 0, ts)
        e.label = label
    return q


def test_insert_orders_by_lex_ts():
    q = LocalQueue()
    q.insert_by_ts("a", 0, (1, 0))
    assert q.values() == ["a"]
    q.insert_by_ts("b", 1, (0, 1))
    assert q.values() == ["b", "a"]
    q.insert_by_ts("c", 0, (2, 0))
    expected = [v for v, _ in sorted([("a", (1, 0)), ("b", (0, 1)), ("c", (2, 0))], key=lambda p: p[1])]
    assert q.values() == expected == ["b", "a", "c"]
    assert all(e.label is None for e in q)


def test_insert_duplicate_ts_aborts():
    q = q_of(("a", (1, 0), None))
    with pytest.raises(ProtocolViolation):
        q.insert_by_ts("z", 1, (1, 0))


def test_dequeue_min_below():
    q = q_of(("a", (0, 1), None), ("b", (1, 0), None))
    below = [e for e in q if e.ts < (1, 1)]
    assert q.dequeue_min_below((1, 1)).value == min(below, key=lambda e: e.ts).value == "a"
    assert q.values() == ["b"]
    q = q_of(("a", (2, 0), None))
    assert q.dequeue_min_below((1, 0)) is None
    assert q.values() == ["a"]
    assert LocalQueue().dequeue_min_below((5, 5)) is None


def test_dequeue_min_below_ignores_labels():
    q = q_of(("a", (0, 1), 1))
    assert q.dequeue_min_below((3, 3)).value == "a"


def test_peek_by_label():
    q = q_of(("a", (0, 1), 0), ("b", (1, 0), 0))
    assert q.peek_by_label(0).value == "a"
    assert len(q) == 2
    assert q_of(("a", (0, 1), 1)).peek_by_label(0) is None
    assert q_of(("a", (0, 1), None)).peek_by_label(0) is None


def test_deq_by_label():
    q = q_of(("a", (0, 1), 0), ("b", (1, 0), 0))
    assert q.deq_by_label(0).value == "a"
    q = q_of(("x", (0, 1), None), ("a", (1, 1), 0))
    assert q.deq_by_label(0).value == "a"
    assert q.values() == ["x"]
    q = q_of(("a", (0, 2), 0), ("b", (0, 3), 0))
    assert [q.deq_by_label(0).value, q.deq_by_label(0).value] == ["a", "b"]


def test_deq_by_label_missing_aborts():
    with pytest.raises(ProtocolViolation):
        q_of(("a", (0, 1), 1)).deq_by_label(0)


def test_deq_unlabeled_below():
    q = q_of(("a", (0, 1), 1), ("b", (1, 0), None))
    assert q.deq_unlabeled_below((2, 2)).value == "b"
    assert q_of(("a", (0, 1), 1)).deq_unlabeled_below((2, 2)) is None
    assert q_of(("b", (3, 0), None)).deq_unlabeled_below((1, 0)) is None


def test_remove_value():
    q = q_of(("a", (0, 1), None), ("b", (1, 0), None))
    assert q.remove_value("a")
    assert q.values() == ["b"]
    assert not q.remove_value("a")
    assert q.values() == ["b"]
    q = q_of(("a", (0, 1), 0))
    q.remove_value("a")
    assert len(q) == 0


def test_unlabeled_size():
    assert LocalQueue().unlabeled_size() == 0
    assert q_of(("a", (0, 1), 0), ("b", (1, 0), None)).unlabeled_size() == 1
    assert q_of(("a", (0, 1), None), ("b", (1, 0), None), ("c", (2, 0), None)).unlabeled_size() == 3


def test_label_oldest():
    q = q_of(("a", (0, 1), None), ("b", (1, 0), None), ("c", (2, 0), None))
    q.label_oldest(0, 2)
    assert [(e.value, e.label) for e in q] == [("a", 0), ("b", 0), ("c", None)]
    q = q_of(("a", (0, 1), 1), ("b", (1, 0), None))
    q.label_oldest(0, 1)
    assert [(e.value, e.label) for e in q] == [("a", 1), ("b", 0)]
    q = q_of(("a", (0, 1), None))
    assert q.label_oldest(0, 0) == []
    assert q.peek_by_label(0) is None


def test_label_oldest_bounded():
    q = q_of(("a", (0, 1), None), ("b", (2, 0), None))
    assert [e.value for e in q.label_oldest(0, 1, bound=(1, 0))] == ["a"]
    with pytest.raises(ProtocolViolation):
        q.label_oldest(0, 1, bound=(1, 0))


def test_label_oldest_too_many_aborts():
    with pytest.raises(ProtocolViolation):
        q_of(("a", (0, 1), None)).label_oldest(0, 2)


def test_snapshot_shape():
    q = q_of(("a", (0, 1), 1))
    assert q.snapshot() == [{"value": "a", "enqueuer": 0, "ts": [0, 1], "label": 1}]


# -- properties ------------------------------------------------------------

ops = st.lists(
    st.one_of(
        st.tuples(st.just("insert"), st.tuples(st.integers(0, 6), st.integers(0, 6))),
        st.tuples(st.just("min_below"), st.tuples(st.integers(0, 7), st.integers(0, 7))),
        st.tuples(st.just("unlabeled_below"), st.tuples(st.integers(0, 7), st.integers(0, 7))),
        st.tuples(st.just("label"), st.tuples(st.integers(0, 2), st.integers(0, 3))),
        st.tuples(st.just("by_label"), st.integers(0, 2)),
        st.tuples(st.just("remove"), st.integers(0, 20)),
    ),
    max_size=40,
)


@given(ops)
def test_replica_against_reference_model(script):
    q = LocalQueue()
    ref: dict = {}  # ts -> [value, label]
    labels_seen: set = set()
    counter = 0
    for name, arg in script:
        if name == "insert":
            if arg in ref:
                continue
            counter += 1
            q.insert_by_ts(counter, 0, arg)
            ref[arg] = [counter, None]
        elif name == "min_below":
            cands = sorted(ts for ts in ref if ts < arg)
            got = q.dequeue_min_below(arg)
            if cands:
                assert got.value == ref.pop(cands[0])[0]
            else:
                assert got is None
        elif name == "unlabeled_below":
            cands = sorted(ts for ts in ref if ts < arg and ref[ts][1] is None)
            got = q.deq_unlabeled_below(arg)
            if cands:
                assert got.label is None
                assert got.value == ref.pop(cands[0])[0]
            else:
                assert got is None
        elif name == "label":
            p, x = arg
            free = sorted(ts for ts in ref if ref[ts][1] is None)
            x = min(x, len(free))
            q.label_oldest(p, x)
            for ts in free[:x]:
                ref[ts][1] = p
        elif name == "by_label":
            mine = sorted(ts for ts in ref if ref[ts][1] == arg)
            if mine:
                got = q.deq_by_label(arg)
                assert got.label == arg
                assert got.value == ref.pop(mine[0])[0]
        elif name == "remove":
            hit = [ts for ts in ref if ref[ts][0] == arg]
            assert q.remove_value(arg) == bool(hit)
            for ts in hit:
                del ref[ts]
        # iteration order is lex order of timestamps
        assert [e.ts for e in q] == sorted(ref)
        assert [(e.value, e.label) for e in q] == [tuple(ref[ts]) for ts in sorted(ref)]
        pairs = {(e.value, e.label) for e in q if e.label is not None}
        # labels never change while the entry lives
        for v, lab in pairs:
            assert all(not (pv == v and pl != lab) for pv, pl in labels_seen)
        labels_seen |= pairs
