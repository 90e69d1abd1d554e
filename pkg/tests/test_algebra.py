import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chm.algebra import (
    IOTA,
    TAU,
    Action,
    apply_action,
    back_circulant,
    circulant,
    expanded_matrix,
    gramian,
    pack_rows,
    periodic_autocorrelation,
    row_from_text,
    row_sum,
    row_to_text,
    sign_row,
)

PRIMES = [5, 7, 11, 13]


def sign_rows(p):
    return st.lists(st.sampled_from([-1, 1]), min_size=p, max_size=p).map(lambda v: np.array(v, dtype=np.int8))


def test_action_group():
    assert TAU * TAU is TAU
    assert IOTA * IOTA is TAU
    assert TAU * IOTA is IOTA
    assert TAU.sign == 1 and IOTA.sign == -1
    assert Action.parse("iota") is IOTA and Action.parse("t") is TAU
    with pytest.raises(ValueError):
        Action.parse("x")


def test_sign_row_validation():
    assert sign_row([1, -1, 1]).dtype == np.int8
    with pytest.raises(ValueError):
        sign_row([1, 0, -1])
    with pytest.raises(ValueError):
        sign_row([1, 1], p=3)


def test_text_round_trip():
    r = row_from_text("+-++-")
    assert row_to_text(r) == "+-++-"
    assert row_sum(r) == 1
    with pytest.raises(ValueError):
        row_from_text("+x")


def test_block_shapes_small():
    u = np.array([1, -1, -1, 1, 1])
    B = back_circulant(u)
    C = circulant(u)
    assert B[1].tolist() == [-1, -1, 1, 1, 1]
    assert C[1].tolist() == [1, 1, -1, -1, 1]
    assert np.array_equal(B, B.T)
    assert np.array_equal(apply_action(u, TAU), B)
    assert np.array_equal(apply_action(u, IOTA), C)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(PRIMES).flatmap(sign_rows))
def test_gramians_agree_and_are_circulant(u):
    p = len(u)
    GB = gramian(back_circulant(u))
    GC = gramian(circulant(u))
    assert np.array_equal(GB, GC)
    assert np.array_equal(GB, circulant(GB[0]))
    assert np.array_equal(GB[0], periodic_autocorrelation(u))
    assert GB[0, 0] == p


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(PRIMES).flatmap(sign_rows))
def test_row_sums_of_blocks(u):
    s = row_sum(u)
    assert np.all(back_circulant(u).sum(axis=1) == s)
    assert np.all(circulant(u).sum(axis=0) == s)


def test_expanded_matrix():
    H = np.array([[1, 1], [1, -1]])
    E = expanded_matrix(H)
    assert E.shape == (4, 4)
    assert np.array_equal(E[:2, 2:], -H)


def test_pack_rows_orders_like_text():
    rows = np.array([[1, -1, 1], [-1, 1, 1], [1, 1, -1]])
    packed = pack_rows(rows)
    assert packed.tolist() == [5, 3, 6]
    with pytest.raises(ValueError):
        pack_rows(np.ones((1, 65)))
