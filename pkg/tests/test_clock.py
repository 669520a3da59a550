import pytest
from hypothesis import given
from hypothesis import strategies as st

from asyncq.clock import EQUAL, GREATER, LESS, lex_compare, merge, strictly_smaller, tick
from asyncq.errors import ConfigurationError


@pytest.mark.parametrize("clock, owner, expected", [
    ((0, 0), 0, (1, 0)),
    ((3, 5), 1, (3, 6)),
    ((1, 0), 0, (2, 0)),
])
def test_tick(clock, owner, expected):
    assert tick(clock, owner) == expected


def test_tick_owner_out_of_range():
    with pytest.raises(ConfigurationError):
        tick((0, 0), 2)


def _merge_by_hand(clock, received, owner):
    # updateTS with a received vector, written out step by step
    v = list(clock)
    v[owner] += 1
    for i in range(len(v)):
        if received[i] > v[i]:
            v[i] = received[i]
    return tuple(v)


@pytest.mark.parametrize("clock, received, owner, expected", [
    ((1, 0), (0, 1), 0, (2, 1)),
    ((2, 3), (2, 3), 1, (2, 4)),
    ((0, 0, 5), (4, 1, 0), 2, (4, 1, 6)),
])
def test_merge(clock, received, owner, expected):
    assert _merge_by_hand(clock, received, owner) == expected
    assert merge(clock, received, owner) == expected


def test_merge_length_mismatch():
    with pytest.raises(ConfigurationError):
        merge((0, 0), (0, 0, 0), 0)


@pytest.mark.parametrize("a, b, expected", [
    ((1, 0), (2, 1), True),
    ((1, 0), (0, 1), False),
    ((2, 2), (2, 2), False),
])
def test_strictly_smaller(a, b, expected):
    assert strictly_smaller(a, b) is expected


@pytest.mark.parametrize("a, b, expected", [
    ((0, 1), (1, 0), LESS),
    ((2, 7), (2, 7), EQUAL),
    ((1, 9, 0), (1, 8, 9), GREATER),
])
def test_lex_compare(a, b, expected):
    assert lex_compare(a, b) == expected


vectors = st.integers(1, 5).flatmap(
    lambda n: st.tuples(*[st.lists(st.integers(0, 4), min_size=n, max_size=n).map(tuple)] * 3)
)


@given(vectors)
def test_lex_is_total_order(abc):
    a, b, c = abc
    assert lex_compare(a, b) == -lex_compare(b, a)
    assert (lex_compare(a, b) == EQUAL) == (a == b)
    if lex_compare(a, b) <= 0 and lex_compare(b, c) <= 0:
        assert lex_compare(a, c) <= 0


@given(vectors)
def test_strictly_smaller_implies_lex_less(abc):
    a, b, _ = abc
    if strictly_smaller(a, b):
        assert lex_compare(a, b) == LESS


def test_lex_less_does_not_imply_strictly_smaller():
    assert lex_compare((0, 1), (1, 0)) == LESS
    assert not strictly_smaller((0, 1), (1, 0))


@given(vectors, st.data())
def test_merge_dominates_inputs(abc, data):
    a, b, _ = abc
    owner = data.draw(st.integers(0, len(a) - 1))
    out = merge(a, b, owner)
    assert all(o >= x for o, x in zip(out, b))
    assert all(o >= x for o, x in zip(out, a))
    assert out[owner] >= a[owner] + 1
