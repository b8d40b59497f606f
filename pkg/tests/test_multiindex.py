import math

import pytest
from hypothesis import given, settings, strategies as st

from dirichlet_splines import multiindex as mi
from dirichlet_splines.errors import InvalidArgumentError


@pytest.mark.parametrize("r, beta, want", [(2, (1, 1), 2), (3, (3, 0), 1), (4, (2, 2), 6), (0, (0, 0, 0), 1)])
def test_multinomial_desk(r, beta, want):
    got = mi.multinomial(r, beta)
    assert got == want and isinstance(got, int)


def test_multinomial_order_mismatch():
    with pytest.raises(InvalidArgumentError):
        mi.multinomial(3, (1, 1))


def test_multinomial_exact_beyond_float_range():
    beta = (10, 10, 10, 10)
    assert mi.multinomial(40, beta) == math.factorial(40) // math.factorial(10) ** 4


def test_negative_entries_rejected():
    with pytest.raises(InvalidArgumentError):
        mi.as_index((1, -1))
    with pytest.raises(InvalidArgumentError):
        mi.as_index((1.5, 0))


@pytest.mark.parametrize("a, l, want", [(0.3, 0, 1.0), (-2.0, 0, 1.0), (1, 4, 24.0), (2.5, 2, 8.75), (-2, 3, 0.0)])
def test_appell_symbol_desk(a, l, want):
    assert mi.appell_symbol(a, l) == want


def test_appell_symbol_product_form():
    assert mi.appell_symbol((1.0, 2.5), (4, 2)) == 24.0 * 8.75


def test_appell_symbol_negative_order():
    with pytest.raises(InvalidArgumentError):
        mi.appell_symbol(1.0, -1)


@given(st.floats(-5, 5, allow_nan=False), st.integers(0, 30))
def test_appell_symbol_step(a, l):
    assert mi.appell_symbol(a, l + 1) == pytest.approx(mi.appell_symbol(a, l) * (a + l), rel=1e-12, abs=1e-300)


@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=4), st.integers(0, 8))
@settings(max_examples=60)
def test_multinomial_theorem(x, r):
    total = math.fsum(mi.multinomial(r, b) * mi.power(x, b) for b in mi.enumerate_indices(len(x), order=r))
    want = math.fsum(x) ** r
    assert total == pytest.approx(want, rel=1e-12, abs=1e-12 * max(1.0, sum(abs(v) for v in x)) ** r)


def test_enumerate_desk():
    assert mi.enumerate_indices(3, order=0) == [(0, 0, 0)]
    assert mi.enumerate_indices(2, order=2) == [(0, 2), (1, 1), (2, 0)]
    assert len(mi.enumerate_indices(2, upper=(1, 1))) == 4


@given(st.integers(1, 4), st.integers(0, 7))
def test_enumerate_count_and_uniqueness(dim, m):
    idx = mi.enumerate_indices(dim, order=m)
    assert len(idx) == math.comb(m + dim - 1, dim - 1)
    assert len(set(idx)) == len(idx)
    assert all(sum(b) == m and len(b) == dim for b in idx)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=3))
def test_enumerate_upper_is_graded(upper):
    idx = mi.enumerate_indices(len(upper), upper=upper)
    assert len(idx) == math.prod(u + 1 for u in upper)
    assert all(mi.leq(b, upper) for b in idx)
    assert [sum(b) for b in idx] == sorted(sum(b) for b in idx)


def test_enumerate_bad_arguments():
    with pytest.raises(InvalidArgumentError):
        mi.enumerate_indices(0, order=1)
    with pytest.raises(InvalidArgumentError):
        mi.enumerate_indices(2)
    with pytest.raises(InvalidArgumentError):
        mi.enumerate_indices(2, order=1, upper=(1, 1))
    assert mi.enumerate_indices(2, order=-1) == []


def test_helpers():
    assert mi.order((1, 2, 3)) == 6
    assert mi.factorial((2, 3)) == 12
    assert mi.unit(3, 1) == (0, 1, 0)
    assert mi.add((1, 2), (0, 1)) == (1, 3)
    assert mi.sub((1, 0), (0, 1)) == (1, -1)
    assert mi.leq((0, 1), (1, 1)) and not mi.leq((2, 0), (1, 1))
    assert mi.power((0.0, 2.0), (0, 3)) == 8.0
