import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dirichlet_splines import multiindex as mi
from dirichlet_splines.errors import (DegenerateGeometryError, DomainError, InvalidArgumentError, ResourceError,
                                      SingularConfigurationError, StrategyUnavailableError)
from dirichlet_splines.hypergeo import build_lauricella_knots
from dirichlet_splines.moments import (STRATEGIES, BezierCoefficients, MomentTable, base_moment_prop52, bernstein,
                                       decasteljau, degree_elevate_check, dirichlet_moment, first_moment_prefix,
                                       moment_with_zeros, one_pivot_residual, order_knots, param_elevate_617,
                                       pivot_difference_residual, simplex_moment_alg53, two_pivot_residual)
from dirichlet_splines.simplex_core import DirichletParams, KnotSet, oracle_moment


@st.composite
def knot_sets(draw, s_values=(1, 2, 3), n_extra=3, lo=0.0, hi=1.0):
    s = draw(st.sampled_from(s_values))
    n = s + draw(st.integers(0, n_extra))
    pts = np.array(draw(st.lists(st.floats(lo, hi), min_size=(n + 1) * s, max_size=(n + 1) * s)))
    return KnotSet(pts.reshape(n + 1, s))


@st.composite
def beta_for(draw, s, max_order):
    total = draw(st.integers(0, max_order))
    cuts = sorted(draw(st.lists(st.integers(0, total), min_size=s - 1, max_size=s - 1)))
    return tuple(b - a for a, b in zip([0] + cuts, cuts + [total]))


# -- Bernstein and de Casteljau -----------------------------------------------

def test_bernstein_desk():
    assert bernstein((3, 0, 0), 3, (1.0, 0.0, 0.0)) == 1.0
    assert bernstein((1, 1), 2, (0.5, 0.5)) == 0.5
    total = math.fsum(bernstein(l, 2, (1 / 3,) * 3) for l in mi.enumerate_indices(3, order=2))
    assert total == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(InvalidArgumentError):
        bernstein((1, 1), 3, (0.5, 0.5))


@given(st.integers(0, 6), st.lists(st.floats(0.0, 1.0), min_size=2, max_size=4))
def test_bernstein_partition_of_unity(m, raw):
    total = sum(raw)
    if total == 0:
        return
    t = [v / total for v in raw]
    s = math.fsum(bernstein(l, m, t) for l in mi.enumerate_indices(len(t), order=m))
    assert s == pytest.approx(1.0, rel=1e-13)


def test_decasteljau_desk():
    assert decasteljau(BezierCoefficients(2, {(2, 0): 1.0, (1, 1): 0.0, (0, 2): 0.0}), (0.5, 0.5)) == 0.25
    const = BezierCoefficients(3, {l: 2.5 for l in mi.enumerate_indices(3, order=3)})
    assert decasteljau(const, (0.2, 0.3, 0.5)) == pytest.approx(2.5, rel=1e-15)
    lin = BezierCoefficients(1, {(1, 0, 0): 1.0, (0, 1, 0): 4.0, (0, 0, 1): -2.0})
    assert decasteljau(lin, (0.2, 0.3, 0.5)) == pytest.approx(0.2 + 1.2 - 1.0, rel=1e-15)


@given(st.integers(1, 5), st.data())
@settings(max_examples=40)
def test_decasteljau_matches_direct_sum(m, data):
    dim = data.draw(st.integers(2, 4))
    idx = mi.enumerate_indices(dim, order=m)
    vals = data.draw(st.lists(st.floats(-3, 3), min_size=len(idx), max_size=len(idx)))
    raw = data.draw(st.lists(st.floats(0.01, 1.0), min_size=dim, max_size=dim))
    t = [v / sum(raw) for v in raw]
    coeffs = BezierCoefficients(m, dict(zip(idx, vals)))
    direct = math.fsum(p * bernstein(l, m, t) for l, p in zip(idx, vals))
    assert decasteljau(coeffs, t) == pytest.approx(direct, rel=1e-12, abs=1e-12)
    assert decasteljau(coeffs, t) == decasteljau(coeffs, t)


def test_bezier_coefficients_validation():
    with pytest.raises(InvalidArgumentError):
        BezierCoefficients(2, {})
    with pytest.raises(InvalidArgumentError):
        BezierCoefficients(2, {(2, 0): 1.0, (1, 1): 1.0})
    with pytest.raises(InvalidArgumentError):
        BezierCoefficients(2, {(2, 0): 1.0, (1, 1, 0): 1.0, (0, 2): 1.0})
    with pytest.raises(InvalidArgumentError):
        decasteljau(BezierCoefficients(1, {(1, 0): 1.0, (0, 1): 1.0}), (1.0,))


# -- base moments ----------------------------------------------------------------

def test_base_moment_desk():
    k = KnotSet([1.0, 2.0])
    assert base_moment_prop52(k, (1,)) == pytest.approx(1.5, rel=1e-14)
    assert base_moment_prop52(k, (2,)) == pytest.approx(7 / 3, rel=1e-14)
    assert base_moment_prop52(KnotSet([[0, 0], [1, 0], [0, 1]]), (0, 0)) == 1.0


def test_base_moment_preconditions():
    with pytest.raises(DomainError):
        base_moment_prop52(KnotSet([-1.0, 2.0]), (1,))
    with pytest.raises(DomainError):
        base_moment_prop52(KnotSet([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]), (1, 0))
    with pytest.raises(DegenerateGeometryError):
        base_moment_prop52(KnotSet([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]), (1, 0))
    with pytest.raises(InvalidArgumentError):
        base_moment_prop52(KnotSet([1.0, 2.0]), (1, 1))


@given(knot_sets(n_extra=0, lo=0.0, hi=2.0), st.data())
@settings(max_examples=60)
def test_base_moment_matches_oracle(knots, data):
    if not knots.volume_positive():
        return
    beta = data.draw(beta_for(knots.s, 6))
    want = oracle_moment(DirichletParams.ones(knots.s + 1), knots, beta)
    assert base_moment_prop52(knots, beta) == pytest.approx(want, rel=1e-12)


def test_first_moment_prefix():
    assert first_moment_prefix(KnotSet([0.0, 1.0, 2.0]), 2, 0) == 1.0
    assert first_moment_prefix(KnotSet([[0, 0], [1, 0], [0, 1]]), 2, 1) == pytest.approx(1 / 3)
    assert first_moment_prefix(KnotSet([[0.3, 0.7]] * 4), 3, 1) == pytest.approx(0.7, rel=1e-15)
    with pytest.raises(InvalidArgumentError):
        first_moment_prefix(KnotSet([0.0, 1.0, 2.0]), 0, 0)
    with pytest.raises(InvalidArgumentError):
        first_moment_prefix(KnotSet([0.0, 1.0, 2.0]), 2, 1)


# -- knot-insertion algorithm ----------------------------------------------------

def test_alg53_desk():
    k = KnotSet([0.0, 1.0, 2.0])
    assert simplex_moment_alg53(k, (2,)) == pytest.approx(7 / 6, rel=1e-14)
    assert simplex_moment_alg53(k, (1,)) == pytest.approx(1.0, rel=1e-15)
    assert simplex_moment_alg53(k, (0,)) == 1.0
    assert simplex_moment_alg53(KnotSet([0.0, 1.0]), (2,)) == pytest.approx(1 / 3, rel=1e-14)
    tri = KnotSet([[1, 0], [0, 1], [1, 1]])
    assert simplex_moment_alg53(tri, (1, 1)) == pytest.approx(5 / 12, rel=1e-14)


@given(knot_sets(n_extra=3), st.data())
@settings(max_examples=60, deadline=None)
def test_alg53_matches_oracle(knots, data):
    if not knots.prefix(knots.s).volume_positive():
        return
    beta = data.draw(beta_for(knots.s, 5))
    want = oracle_moment(DirichletParams.ones(len(knots)), knots, beta)
    assert simplex_moment_alg53(knots, beta) == pytest.approx(want, rel=1e-9)


def test_alg53_reorders_degenerate_prefix():
    # first s+1 knots collinear; the driver permutes an independent triple to the front
    knots = KnotSet([[0, 0], [1, 1], [2, 2], [0, 1], [0.5, 0.2]])
    want = oracle_moment(DirichletParams.ones(5), knots, (2, 1))
    assert simplex_moment_alg53(knots, (2, 1)) == pytest.approx(want, rel=1e-12)
    assert order_knots(knots)[:3] == [0, 1, 3]


def test_alg53_negative_coordinates_use_oracle_base():
    knots = KnotSet([[-1.0, 0.2], [0.5, -0.3], [0.1, 0.9], [0.4, 0.4]])
    table = MomentTable(knots, order_knots(knots))
    got = simplex_moment_alg53(knots, (2, 2), table)
    assert table.base_method == "oracle"
    assert got == pytest.approx(oracle_moment(DirichletParams.ones(4), knots, (2, 2)), rel=1e-12)


def test_alg53_errors():
    with pytest.raises(DegenerateGeometryError):
        simplex_moment_alg53(KnotSet([[0, 0], [1, 1], [2, 2]]), (1, 1))
    with pytest.raises(DegenerateGeometryError):
        simplex_moment_alg53(KnotSet([[0, 0], [1, 1]]), (1, 1))
    with pytest.raises(InvalidArgumentError):
        simplex_moment_alg53(KnotSet([0.0, 1.0]), (1, 1))


def test_moment_table_invariants():
    knots = KnotSet([[0.1, 0.2], [0.9, 0.1], [0.3, 0.8], [0.5, 0.5], [0.7, 0.6]])
    table = MomentTable(knots, order_knots(knots))
    simplex_moment_alg53(knots, (3, 2), table)
    s, n = knots.s, knots.n
    for k in range(s, n + 1):
        assert table[(k, (0, 0))] == 1.0
    for (k, alpha), value in table.entries.items():
        if sum(alpha) >= 1 and k > s:
            assert (k - 1, alpha) in table
            for l in range(s):
                if alpha[l]:
                    assert (k, mi.sub(alpha, mi.unit(s, l))) in table
        # idempotence: recomputing from stored dependencies is bit-for-bit
        assert table.recompute(k, alpha) == value
    size = len(table)
    simplex_moment_alg53(knots, (3, 2), table)
    assert len(table) == size


def test_moment_table_rejects_other_knots():
    table = MomentTable(KnotSet([0.0, 1.0, 2.0]))
    with pytest.raises(InvalidArgumentError):
        simplex_moment_alg53(KnotSet([[0, 0], [1, 0], [0, 1]]), (1, 1), table)


# -- Dirichlet-parameter moments -------------------------------------------------

def test_dirichlet_moment_desk():
    k = KnotSet([0.0, 1.0])
    for strategy in STRATEGIES:
        assert dirichlet_moment(DirichletParams((2, 1)), k, (1,), strategy) == pytest.approx(1 / 3, rel=1e-14)
        assert dirichlet_moment(DirichletParams((1, 1)), k, (1,), strategy) == pytest.approx(0.5, rel=1e-14)
        assert dirichlet_moment(DirichletParams((3, 2)), k, (0,), strategy) == 1.0


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_strategies_agree(data):
    knots = data.draw(knot_sets(s_values=(1, 2), n_extra=2, lo=-1.0, hi=1.0))
    if not knots.volume_positive():
        return
    b = tuple(data.draw(st.lists(st.integers(1, 3), min_size=len(knots), max_size=len(knots))))
    beta = data.draw(beta_for(knots.s, 4))
    params = DirichletParams(b)
    vals = [dirichlet_moment(params, knots, beta, s) for s in STRATEGIES]
    scale = max(1.0, max(abs(v) for v in vals))
    assert max(vals) - min(vals) <= 1e-10 * scale


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_one_pivot_recursion_real_parameters(data):
    knots = data.draw(knot_sets(s_values=(1, 2), n_extra=2, lo=-1.0, hi=1.0))
    if not knots.volume_positive():
        return
    b = tuple(data.draw(st.lists(st.floats(1.0, 3.5), min_size=len(knots), max_size=len(knots))))
    beta = data.draw(beta_for(knots.s, 4))
    params = DirichletParams(b)
    want = dirichlet_moment(params, knots, beta, "expansion")
    got = dirichlet_moment(params, knots, beta, "recurrence-54")
    assert got == pytest.approx(want, rel=1e-10, abs=1e-12)


def test_dirichlet_moment_strategy_errors():
    k = KnotSet([0.0, 1.0])
    with pytest.raises(StrategyUnavailableError):
        dirichlet_moment(DirichletParams((1.5, 1)), k, (1,), "coalescent-knots")
    with pytest.raises(StrategyUnavailableError):
        dirichlet_moment(DirichletParams((0.5, 0.5)), k, (1,), "recurrence-54")
    with pytest.raises(StrategyUnavailableError):
        dirichlet_moment(DirichletParams((2, 2)), KnotSet([1.0, 1.0]), (1,), "recurrence-54")
    with pytest.raises(ResourceError):
        dirichlet_moment(DirichletParams((20, 10)), k, (1,), "coalescent-knots")
    with pytest.raises(InvalidArgumentError):
        dirichlet_moment(DirichletParams((1, 1)), k, (1,), "magic")
    with pytest.raises(InvalidArgumentError):
        dirichlet_moment(DirichletParams((1, 1, 1)), k, (1,))


def test_coalescent_knots_equal_repeated_simplex_spline():
    knots = KnotSet([[0.2, 0.1], [0.9, 0.3], [0.4, 0.8]])
    params = DirichletParams((2, 1, 3))
    repeated = knots.repeat((2, 1, 3))
    want = oracle_moment(DirichletParams.ones(6), repeated, (2, 2))
    assert dirichlet_moment(params, knots, (2, 2), "coalescent-knots") == pytest.approx(want, rel=1e-12)


def test_moment_with_zeros():
    knots = KnotSet([0.0, 5.0, 1.0])
    got = moment_with_zeros((1.0, 0.0, 1.0), knots, (2,), lambda p, k, b: oracle_moment(p, k, b))
    assert got == pytest.approx(1 / 3, rel=1e-14)
    with pytest.raises(InvalidArgumentError):
        moment_with_zeros((1.0, -1.0, 1.0), knots, (2,), lambda p, k, b: 0.0)


# -- identities ------------------------------------------------------------------

def test_degree_elevate_desk():
    r1, r2 = degree_elevate_check(DirichletParams((1, 1)), KnotSet([0.0, 1.0]), (1,))
    assert abs(r1) < 1e-15 and abs(r2[0]) < 1e-15
    r1, _ = degree_elevate_check(DirichletParams((0.3, 2.0, 1.1)), KnotSet([[0, 1], [2, 0], [1, 1]]), (0, 0))
    assert abs(r1) < 1e-15


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_moment_identities_vanish(data):
    knots = data.draw(knot_sets(s_values=(1, 2), n_extra=2, lo=-1.0, hi=1.0))
    if not knots.volume_positive():
        return
    size = len(knots)
    b = list(data.draw(st.lists(st.floats(0.3, 3.0), min_size=size, max_size=size)))
    beta = data.draw(beta_for(knots.s, 3))
    params = DirichletParams(tuple(b))
    r1, r2 = degree_elevate_check(params, knots, beta)
    scale = max(1.0, float(np.max(np.abs(knots.points)))) ** (sum(beta) + 1)
    assert abs(r1) <= 1e-11 * scale and all(abs(r) <= 1e-11 * scale for r in r2)
    i, j = data.draw(st.lists(st.integers(0, size - 1), min_size=2, max_size=2, unique=True))
    b[i] = max(b[i], 1.0) + 0.5
    b[j] = max(b[j], 1.0) + 0.25
    params = DirichletParams(tuple(b))
    k = data.draw(st.integers(0, knots.s - 1))
    for res, sc in (one_pivot_residual(params, knots, beta, j), pivot_difference_residual(params, knots, beta, i, j),
                    two_pivot_residual(params, knots, beta, i, j, k)):
        assert abs(res) <= 1e-10 * sc


def test_one_pivot_needs_unit_parameter():
    with pytest.raises(InvalidArgumentError):
        one_pivot_residual(DirichletParams((0.5, 2.0)), KnotSet([0.0, 1.0]), (1,), 0)


# -- parameter elevation on the Lauricella knots --------------------------------

def test_param_elevate_matches_oracle():
    x = (0.3, 0.6)
    knots = build_lauricella_knots(x)
    params = DirichletParams((0.7, 1.2, 1.5))
    for m in range(2):
        for beta in [(0, 0), (1, 0), (2, 1)]:
            want = oracle_moment(params.raised(m), knots, beta)
            assert param_elevate_617(params, knots, beta, m) == pytest.approx(want, rel=1e-10)


def test_param_elevate_zero_moment_form():
    x = (0.4,)
    knots = build_lauricella_knots(x)
    params = DirichletParams((0.7, 1.3))
    want = (1 - oracle_moment(params, knots, (1,))) / (params.w[0] * x[0])
    assert param_elevate_617(params, knots, (0,), 0) == pytest.approx(want, rel=1e-14)


def test_param_elevate_errors():
    params = DirichletParams((1.0, 1.0, 1.0))
    with pytest.raises(SingularConfigurationError):
        param_elevate_617(params, build_lauricella_knots((0.0, 0.5)), (1, 0), 0)
    with pytest.raises(InvalidArgumentError):
        param_elevate_617(params, KnotSet([[0, 0], [1, 0], [0, 1]]), (1, 0), 0)
    with pytest.raises(InvalidArgumentError):
        param_elevate_617(params, build_lauricella_knots((0.2, 0.5)), (1, 0), 2)
