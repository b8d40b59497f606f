"""Moments of simplex and Dirichlet splines by recurrence.

The simplex-spline path seeds the moments on s+1 affinely independent knots
with a nested Bezier sum (evaluated by de Casteljau) and then adds one knot
at a time with the two-direction recursion

    (k + |a|) m_a(X_k) = k m_a(X_{k-1}) + sum_l a_l x^k_l m_{a-d_l}(X_k).

Dirichlet parameters are handled either by repeating knots (integer b) or by
lowering one parameter at a time with

    (c + |a| - 1) m_a(b) = (c - 1) m_a(b - e_j) + sum_l a_l x^j_l m_{a-d_l}(b).

Indices of knots, parameters and coordinates are 0-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import multiindex as mi
from .config import DEFAULT, Tolerances
from .errors import (DegenerateGeometryError, DomainError, InvalidArgumentError, ResourceError,
                     SingularConfigurationError, StrategyUnavailableError)
from .simplex_core import DirichletParams, KnotSet, independent_subset, oracle_moment

STRATEGIES = ("expansion", "coalescent-knots", "recurrence-54")


# -- Bernstein / Bezier -------------------------------------------------------

def bernstein(l: Sequence[int], m: int, t: Sequence[float]) -> float:
    """B_l^m(t) = multinomial(m, l) t^l for barycentric t."""
    l = mi.as_index(l)
    if sum(l) != m:
        raise InvalidArgumentError(f"|l| = {sum(l)} does not match degree {m}")
    if len(l) != len(t):
        raise InvalidArgumentError("index and barycentric point differ in length")
    return mi.multinomial(m, l) * mi.power(t, l)


@dataclass
class BezierCoefficients:
    """Coefficients p_l, |l| = degree, of a Bezier polynomial in n+1 barycentric variables."""

    degree: int
    coeffs: dict[tuple[int, ...], float]
    nvars: int = field(init=False)

    def __post_init__(self):
        if not self.coeffs:
            raise InvalidArgumentError("empty coefficient set")
        lengths = {len(k) for k in self.coeffs}
        if len(lengths) != 1:
            raise InvalidArgumentError("coefficient indices have mixed lengths")
        self.nvars = lengths.pop()
        if any(min(k) < 0 or sum(k) != self.degree for k in self.coeffs):
            raise InvalidArgumentError(f"every index must be nonnegative with order {self.degree}")
        expected = math.comb(self.degree + self.nvars - 1, self.nvars - 1)
        if len(self.coeffs) != expected:
            raise InvalidArgumentError(
                f"expected {expected} coefficients for degree {self.degree}, got {len(self.coeffs)}")


def decasteljau(coeffs: BezierCoefficients, t: Sequence[float]) -> float:
    """Evaluate sum_l p_l B_l^m(t) by repeated barycentric averaging."""
    t = [float(v) for v in t]
    if len(t) != coeffs.nvars:
        raise InvalidArgumentError("barycentric point has the wrong length")
    dim = coeffs.nvars
    units = [mi.unit(dim, i) for i in range(dim)]
    level = dict(coeffs.coeffs)
    for r in range(coeffs.degree - 1, -1, -1):
        nxt = {}
        for l in mi.compositions(r, dim):
            acc = 0.0
            for i in range(dim):
                acc += t[i] * level[mi.add(l, units[i])]
            nxt[l] = acc
        level = nxt
    return level[(0,) * dim]


# -- base moments on s+1 knots -----------------------------------------------

def base_moment_prop52(knots: KnotSet, beta: Sequence[int]) -> float:
    """m_beta of the simplex spline on the first s+1 knots, as a nested Bezier sum.

    Requires nonnegative knot coordinates; every coordinate row sum g_i must be
    positive.  Each level of the nesting is a Bezier polynomial in the
    normalized row y^i / g_i whose coefficients come from the inner levels,
    with eta! at the innermost level.
    """
    s = knots.s
    beta = mi.as_index(beta)
    if len(beta) != s:
        raise InvalidArgumentError(f"beta has length {len(beta)}, expected {s}")
    if len(knots) < s + 1:
        raise DegenerateGeometryError(f"need at least s+1 = {s + 1} knots")
    base = knots.prefix(s)
    pts = base.points
    if np.any(pts < 0):
        raise DomainError("base knots have a negative coordinate; use the expansion oracle instead")
    g = pts.sum(axis=0)
    if np.any(g <= 0):
        raise DomainError("a coordinate row sum vanishes; use the expansion oracle instead")
    if not base.volume_positive():
        raise DegenerateGeometryError("base knots are affinely dependent")
    if sum(beta) == 0:
        return 1.0
    rows = [pts[:, i] / g[i] for i in range(s)]

    def nested(level: int, eta: tuple[int, ...]) -> float:
        if level == s:
            return float(mi.factorial(eta))
        m = beta[level]
        coeffs = {k: nested(level + 1, mi.add(eta, k)) for k in mi.compositions(m, s + 1)}
        if m == 0:
            return coeffs[(0,) * (s + 1)]
        return decasteljau(BezierCoefficients(m, coeffs), rows[level])

    scale = mi.power(g, beta) * math.factorial(s) / math.factorial(sum(beta) + s)
    return scale * nested(0, (0,) * (s + 1))


def first_moment_prefix(knots: KnotSet, k: int, l: int) -> float:
    """m_{d_l} of the simplex spline on {x^0..x^k}: the mean of coordinate l."""
    if not knots.s <= k <= knots.n:
        raise InvalidArgumentError(f"prefix length k = {k} outside {knots.s}..{knots.n}")
    if not 0 <= l < knots.s:
        raise InvalidArgumentError(f"coordinate {l} outside 0..{knots.s - 1}")
    return math.fsum(knots.points[: k + 1, l]) / (k + 1)


# -- Algorithm: simplex spline moments ---------------------------------------

class MomentTable:
    """Memo of m_alpha(X_k) keyed by (k, alpha) for one (reordered) knot set."""

    def __init__(self, knots: KnotSet, orientation: Sequence[int] | None = None):
        self.orientation = tuple(orientation) if orientation is not None else tuple(range(len(knots)))
        self.knots = knots.permute(self.orientation)
        self.entries: dict[tuple[int, tuple[int, ...]], float] = {}
        self.base_method: str | None = None

    def __len__(self):
        return len(self.entries)

    def __contains__(self, key):
        return key in self.entries

    def __getitem__(self, key):
        return self.entries[key]

    def recompute(self, k: int, alpha: tuple[int, ...]) -> float:
        """Re-derive one stored entry from its stored dependencies."""
        s = self.knots.s
        if sum(alpha) == 0:
            return 1.0
        if k == s:
            if self.base_method == "bezier":
                return base_moment_prop52(self.knots, alpha)
            return oracle_moment(DirichletParams.ones(s + 1), self.knots.prefix(s), alpha)
        if sum(alpha) == 1:
            return first_moment_prefix(self.knots, k, alpha.index(1))
        return _extend(self.entries, self.knots, k, alpha)


def _extend(entries, knots: KnotSet, k: int, alpha: tuple[int, ...]) -> float:
    """One step of the recursion adding knot k (the deleted knot is the newest)."""
    x = knots.points[k]
    acc = k * entries[(k - 1, alpha)]
    for l, al in enumerate(alpha):
        if al:
            acc += al * x[l] * entries[(k, mi.sub(alpha, mi.unit(len(alpha), l)))]
    return acc / (k + sum(alpha))


def order_knots(knots: KnotSet, tol: float = DEFAULT.independence_tol) -> list[int]:
    """A permutation putting s+1 affinely independent knots first."""
    chosen = independent_subset(knots, knots.s + 1, tol)
    if chosen is None:
        raise DegenerateGeometryError("no s+1 affinely independent knots: the spline is degenerate")
    rest = [i for i in range(len(knots)) if i not in chosen]
    return chosen + rest


def simplex_moment_alg53(knots: KnotSet, beta: Sequence[int], table: MomentTable | None = None,
                         tol: Tolerances = DEFAULT) -> float:
    """m_beta(X) of the simplex spline M(.|X).

    Fills ``table`` (created if not given) with m_alpha(X_k) for all
    alpha <= beta and k = s..n, then returns the entry for the full knot set.
    """
    beta = mi.as_index(beta)
    s, n = knots.s, knots.n
    if len(beta) != s:
        raise InvalidArgumentError(f"beta has length {len(beta)}, expected {s}")
    if n < s:
        raise DegenerateGeometryError(f"need n >= s, got n = {n}, s = {s}")
    if sum(beta) == 0:
        return 1.0
    if table is None:
        table = MomentTable(knots, order_knots(knots, tol.independence_tol))
    elif table.knots.points.shape != knots.points.shape:
        raise InvalidArgumentError("moment table belongs to a different knot set")
    xs = table.knots
    entries = table.entries
    zero = (0,) * s
    for k in range(s, n + 1):
        entries[(k, zero)] = 1.0

    alphas = [a for a in mi.enumerate_indices(s, upper=beta) if sum(a) > 0]
    if table.base_method is None:
        try:
            base_moment_prop52(xs, (0,) * s)
            table.base_method = "bezier"
        except DomainError:
            table.base_method = "oracle"
    ones = DirichletParams.ones(s + 1)
    base = xs.prefix(s)
    for a in alphas:
        if (s, a) not in entries:
            if table.base_method == "bezier":
                entries[(s, a)] = base_moment_prop52(xs, a)
            else:
                entries[(s, a)] = oracle_moment(ones, base, a, _uncapped(tol))
    for k in range(s + 1, n + 1):
        for a in alphas:
            if (k, a) in entries:
                continue
            if sum(a) == 1:
                entries[(k, a)] = first_moment_prefix(xs, k, a.index(1))
            else:
                entries[(k, a)] = _extend(entries, xs, k, a)
    return entries[(n, beta)]


def _uncapped(tol: Tolerances) -> Tolerances:
    from dataclasses import replace
    return replace(tol, oracle_max_order=max(tol.oracle_max_order, 64),
                   oracle_max_knots=max(tol.oracle_max_knots, 64))


# -- Dirichlet-parameter identities and drivers ------------------------------

def degree_elevate_check(params: DirichletParams, knots: KnotSet, beta: Sequence[int],
                         tol: Tolerances = DEFAULT):
    """Residuals of m_b = sum w_i m_{b+e_i} and m_{beta+d_l}(b) = sum w_i x^i_l m_beta(b+e_i).

    Returns (r1, [r2_0, ..., r2_{s-1}]), all moments via the expansion oracle.
    """
    beta = mi.as_index(beta)
    raised = [oracle_moment(params.raised(i), knots, beta, tol) for i in range(len(params.b))]
    r1 = oracle_moment(params, knots, beta, tol) - math.fsum(
        w * m for w, m in zip(params.w, raised))
    r2 = []
    for l in range(knots.s):
        up = mi.add(beta, mi.unit(knots.s, l))
        rhs = math.fsum(w * knots.points[i, l] * raised[i] for i, w in enumerate(params.w))
        r2.append(oracle_moment(params, knots, up, tol) - rhs)
    return r1, r2


def moment_with_zeros(b: Sequence[float], knots: KnotSet, beta, fn) -> float:
    """Apply ``fn(params, knots, beta)`` after dropping knots whose parameter is 0."""
    keep = [i for i, v in enumerate(b) if v != 0]
    if any(v < 0 for v in b):
        raise InvalidArgumentError(f"negative Dirichlet parameter in {tuple(b)}")
    return fn(DirichletParams(tuple(b[i] for i in keep)), knots.permute(keep), beta)


def dirichlet_moment(params: DirichletParams, knots: KnotSet, beta: Sequence[int],
                     strategy: str = "expansion", tol: Tolerances = DEFAULT) -> float:
    """m_beta(b; X) via one of ``expansion``, ``coalescent-knots`` or ``recurrence-54``."""
    beta = mi.as_index(beta)
    if len(params.b) != len(knots):
        raise InvalidArgumentError(f"{len(params.b)} parameters for {len(knots)} knots")
    if len(beta) != knots.s:
        raise InvalidArgumentError(f"beta has length {len(beta)}, expected {knots.s}")
    if strategy not in STRATEGIES:
        raise InvalidArgumentError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    if sum(beta) == 0:
        return 1.0
    if strategy == "expansion":
        return oracle_moment(params, knots, beta, tol)
    if strategy == "coalescent-knots":
        return _coalescent(params, knots, beta, tol)
    return _one_pivot_recursion(params, knots, beta, tol)


def _coalescent(params, knots, beta, tol):
    if not params.is_integer():
        raise StrategyUnavailableError("coalescent-knots", "all Dirichlet parameters must be positive integers")
    total = int(round(params.c))
    if total > tol.coalescent_max_total:
        raise ResourceError(f"sum of parameters {total} exceeds the coalescent-knot cap {tol.coalescent_max_total}")
    repeated = knots.repeat([int(v) for v in params.b])
    try:
        return simplex_moment_alg53(repeated, beta, tol=tol)
    except DegenerateGeometryError as exc:
        raise StrategyUnavailableError("coalescent-knots", str(exc)) from exc


def _one_pivot_recursion(params, knots, beta, tol):
    if not knots.volume_positive(tol.independence_tol):
        raise StrategyUnavailableError("recurrence-54", "vol_s([X]) > 0 is required")
    if not any(v >= 1 for v in params.b):
        raise StrategyUnavailableError("recurrence-54", "some parameter b_j >= 1 is required")
    s = knots.s
    memo: dict = {}
    tables: dict = {}

    def base(b, beta_):
        keep = tuple(i for i, v in enumerate(b) if v != 0)
        sub = knots.permute(keep)
        if all(b[i] == 1 for i in keep) and len(keep) > s and sub.volume_positive(tol.independence_tol):
            table = tables.get(keep)
            if table is None:
                table = tables[keep] = MomentTable(sub, order_knots(sub, tol.independence_tol))
                simplex_moment_alg53(sub, beta, table, tol)
            return table[(sub.n, beta_)]
        return oracle_moment(DirichletParams(tuple(b[i] for i in keep)), sub, beta_, _uncapped(tol))

    def pivot(b):
        live = [i for i, v in enumerate(b) if v != 0]
        above = [i for i in live if b[i] > 1]
        if above:
            return above[0]
        if all(b[i] == 1 for i in live):
            return None
        ones = [i for i in live if b[i] == 1]
        # dropping a unit-parameter knot is valid only while n > s
        if ones and len(live) - 1 > s:
            return ones[0]
        return None

    def m(b, beta_):
        if sum(beta_) == 0:
            return 1.0
        key = (b, beta_)
        if key in memo:
            return memo[key]
        j = pivot(b)
        if j is None:
            val = base(b, beta_)
        else:
            c = math.fsum(b)
            lowered = b[:j] + (b[j] - 1.0,) + b[j + 1:]
            acc = (c - 1.0) * m(lowered, beta_)
            x = knots.points[j]
            for l, bl in enumerate(beta_):
                if bl:
                    acc += bl * x[l] * m(b, mi.sub(beta_, mi.unit(s, l)))
            val = acc / (c + sum(beta_) - 1.0)
        memo[key] = val
        return val

    return m(tuple(params.b), beta)


def param_elevate_617(params: DirichletParams, knots: KnotSet, beta: Sequence[int], m: int,
                      strategy: str = "expansion", tol: Tolerances = DEFAULT) -> float:
    """m_beta(b + e_m; X) for the square Lauricella knot matrix (s = n).

    Uses m_beta(b + e_m) = [m_beta(b) - m_{beta+d_m}(b)] / (w_m x_m), where
    knot m is the one whose m-th coordinate is 1 - x_m.
    """
    s = knots.s
    if knots.n != s:
        raise InvalidArgumentError(f"need s = n, got s = {s}, n = {knots.n}")
    if not 0 <= m < s:
        raise InvalidArgumentError(f"m = {m} outside 0..{s - 1}")
    expected = np.ones((s + 1, s))
    diag = np.array([1.0 - knots.points[i, i] for i in range(s)])
    expected[np.arange(s), np.arange(s)] = 1.0 - diag
    if not np.allclose(knots.points, expected, rtol=0, atol=1e-14):
        raise InvalidArgumentError("knots are not of the Lauricella form")
    xm = diag[m]
    denom = params.w[m] * xm
    if xm == 0.0 or denom == 0.0:
        raise SingularConfigurationError(f"x_{m} = 0: the knot matrix has zero volume")
    beta = mi.as_index(beta)
    up = mi.add(beta, mi.unit(s, m))
    return (dirichlet_moment(params, knots, beta, strategy, tol)
            - dirichlet_moment(params, knots, up, strategy, tol)) / denom


# -- identity residuals -------------------------------------------------------

def _lowered_moment(params, knots, beta, j, tol):
    b = list(params.b)
    b[j] -= 1.0
    return moment_with_zeros(b, knots, beta, lambda p, k, bb: oracle_moment(p, k, bb, tol))


def _lower_terms(params, knots, beta, coeff, tol):
    acc = []
    for l, bl in enumerate(beta):
        if bl:
            acc.append(bl * coeff(l) * oracle_moment(params, knots, mi.sub(beta, mi.unit(knots.s, l)), tol))
    return math.fsum(acc)


def one_pivot_residual(params, knots, beta, j, tol: Tolerances = DEFAULT) -> tuple[float, float]:
    """(residual, scale) of (c+|beta|-1) m(b) - (c-1) m(b-e_j) - sum_l beta_l x^j_l m_{beta-d_l}(b)."""
    beta = mi.as_index(beta)
    if params.b[j] < 1:
        raise InvalidArgumentError("need b_j >= 1")
    c = params.c
    lhs = (c + sum(beta) - 1) * oracle_moment(params, knots, beta, tol)
    t1 = (c - 1) * _lowered_moment(params, knots, beta, j, tol)
    t2 = _lower_terms(params, knots, beta, lambda l: knots.points[j, l], tol)
    return lhs - t1 - t2, max(abs(lhs), abs(t1), abs(t2), 1e-300)


def pivot_difference_residual(params, knots, beta, i, j, tol: Tolerances = DEFAULT) -> tuple[float, float]:
    """(residual, scale) of (c-1)[m(b-e_j) - m(b-e_i)] + sum_k beta_k (x^j_k - x^i_k) m_{beta-d_k}(b)."""
    beta = mi.as_index(beta)
    c = params.c
    mj = _lowered_moment(params, knots, beta, j, tol)
    mi_ = _lowered_moment(params, knots, beta, i, tol)
    t1 = (c - 1) * (mj - mi_)
    t2 = _lower_terms(params, knots, beta, lambda l: knots.points[j, l] - knots.points[i, l], tol)
    return t1 + t2, max(abs((c - 1) * mj), abs((c - 1) * mi_), abs(t2), 1e-300)


def two_pivot_residual(params, knots, beta, i, j, k, tol: Tolerances = DEFAULT) -> tuple[float, float]:
    """(residual, scale) of the two-pivot identity with W_{k,l} = x^i_k x^j_l - x^j_k x^i_l."""
    beta = mi.as_index(beta)
    c = params.c
    x = knots.points
    lhs = (c + sum(beta) - 1) * (x[i, k] - x[j, k]) * oracle_moment(params, knots, beta, tol)
    t1 = (c - 1) * (x[i, k] * _lowered_moment(params, knots, beta, j, tol)
                    - x[j, k] * _lowered_moment(params, knots, beta, i, tol))

    def wkl(l):
        return np.linalg.det(np.array([[x[i, k], x[j, k]], [x[i, l], x[j, l]]]))

    t2 = _lower_terms(params, knots, beta, wkl, tol)
    return lhs - t1 - t2, max(abs(lhs), abs(t1), abs(t2), 1e-300)
