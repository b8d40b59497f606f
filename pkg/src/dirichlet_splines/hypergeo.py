"""Hypergeometric functions as Dirichlet averages and spline moments.

Carlson's R and S functions, Appell F4, Lauricella F_B and the Lauricella
polynomials L_j(x) = F_B(-j, beta; gamma; x), each with at least two
independent evaluation routes, plus residuals of the identities tying them
together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from . import multiindex as mi
from .config import DEFAULT, Tolerances
from .errors import (AccuracyError, DomainError, InvalidArgumentError, NonConvergenceError, ParameterError,
                     StrategyUnavailableError)
from .moments import dirichlet_moment
from .simplex_core import (DirichletParams, Estimate, ExpansionMoments, KnotSet, _beta_rule,
                           dirichlet_expectation, dirichlet_rule, negative_moment)


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by every power-series evaluator.

    Summation runs over blocks of equal total order and stops once two
    consecutive blocks are below max(abs_tol, rel_tol * |partial sum|).  It
    aborts if the partial sum grows by ``divergence_factor`` within
    ``window`` orders, or when ``max_order`` is reached.
    """

    max_order: int = 400
    abs_tol: float = 1e-16
    rel_tol: float = 1e-15
    divergence_factor: float = 1e8
    window: int = 20

    def __post_init__(self):
        if self.max_order < 0:
            raise InvalidArgumentError("max_order must be >= 0")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise InvalidArgumentError("tolerances must be positive")


DEFAULT_CONTROL = SeriesControl()


def _is_nonpositive_int(v: float) -> bool:
    return float(v).is_integer() and v <= 0


def sum_blocks(blocks: Iterator[float], ctrl: SeriesControl, what: str, full_output: bool = False):
    """Sum order blocks under ``ctrl``; ``blocks`` yields the order-0, 1, ... contributions."""
    total = 0.0
    comp = 0.0
    quiet = 0
    history = []
    order = -1
    for order, block in enumerate(blocks):
        # Kahan summation
        y = block - comp
        t = total + y
        comp = (t - total) - y
        total = t
        history.append(abs(total))
        if not math.isfinite(total):
            raise NonConvergenceError(f"{what}: partial sum is not finite", total, order)
        if order >= ctrl.window:
            ref = max(history[order - ctrl.window], 1e-300)
            if history[-1] > ctrl.divergence_factor * ref:
                raise NonConvergenceError(f"{what}: partial sums diverge", total, order)
        if abs(block) <= max(ctrl.abs_tol, ctrl.rel_tol * abs(total)):
            quiet += 1
            if quiet >= 2:
                break
        else:
            quiet = 0
        if order >= ctrl.max_order:
            raise NonConvergenceError(f"{what}: no convergence within {ctrl.max_order} orders", total, order)
    if full_output:
        return total, {"order": order, "converged": True}
    return total


# -- Carlson R ----------------------------------------------------------------

def _as_params(params) -> DirichletParams:
    return params if isinstance(params, DirichletParams) else DirichletParams(tuple(params))


def _series_setup(params, z, lam, knots):
    """Resolve (lam, knots) for the ridge-form series; Z alone means X = 1 - Z, lam = 1."""
    if knots is None:
        if z is None:
            raise InvalidArgumentError("give Z or (lam, knots)")
        knots = KnotSet(1.0 - np.asarray(z, dtype=float))
        lam = np.ones(1)
    else:
        lam = np.asarray(lam, dtype=float).ravel()
        if lam.size != knots.s:
            raise InvalidArgumentError(f"lambda has length {lam.size}, expected {knots.s}")
    if len(knots) != len(params.b):
        raise InvalidArgumentError(f"{len(params.b)} parameters for {len(knots)} knots")
    return lam, knots


def _moment_blocks(params, lam, knots, weight: Callable[[int], float],
                   project: bool = False) -> Iterator[float]:
    """Order blocks sum_{|j|=r} weight(r) lam^j / j! m_j(b; X).

    With ``project`` the knots are replaced by the scalars lam . x^i (and lam
    by 1).  Each block is unchanged, by the multinomial theorem, but the
    multi-index sum no longer cancels when sum_l |lam_l x^i_l| exceeds 1.
    """
    if project:
        knots, lam = KnotSet(knots.ridge(lam)), np.ones(1)
    engine = ExpansionMoments(params, knots)
    yield 1.0
    while True:
        block = engine.next_order()
        r = engine.order
        acc = math.fsum(mi.power(lam, j) / mi.factorial(j) * m for j, m in block.items())
        yield weight(r) * acc


def r_function(a: float, params, z=None, method: str = "quadrature",
               ctrl: SeriesControl = DEFAULT_CONTROL, *, lam=None, knots: KnotSet | None = None,
               tol: Tolerances = DEFAULT, quad_abs_tol: float = 1e-13, quad_rel_tol: float = 1e-11,
               project: bool = True, full_output: bool = False):
    """Carlson's R_{-a}(b; Z), the Dirichlet average of u^(-a).

    ``method="quadrature"`` integrates over the simplex (needs Z and n <= 3).
    ``method="series-5.11"`` sums lam^j (a,|j|)/j! m_j(b; X) for Z = 1 - lam.X;
    pass ``lam`` and ``knots`` or just ``z`` (then X = 1 - Z in one dimension).
    ``project=False`` sums over the multi-indices of the original knots.
    """
    params = _as_params(params)
    if a == 0:
        return (1.0, {"method": method, "order": 0}) if full_output else 1.0
    if method == "quadrature":
        if z is None:
            if knots is None:
                raise InvalidArgumentError("quadrature path needs Z or (lam, knots)")
            z = 1.0 - knots.ridge(lam)
        z = np.asarray(z, dtype=float).ravel()
        if z.size != len(params.b):
            raise InvalidArgumentError(f"{len(params.b)} parameters for {z.size} variables")
        integer_power = _is_nonpositive_int(a)
        if not integer_power:
            if z.min() <= 0 <= z.max():
                raise DomainError("0 lies in [min Z, max Z]")
            if z.max() < 0 and not float(a).is_integer():
                raise DomainError("negative arguments with a non-integer power")
        est = dirichlet_expectation(lambda t: (t @ z) ** (-a), params.b,
                                    abs_tol=quad_abs_tol, rel_tol=quad_rel_tol, tol=tol)
        return (est.value, {"method": method, "error": est.error}) if full_output else est.value
    if method == "series-5.11":
        lam, knots = _series_setup(params, z, lam, knots)
        ridge = knots.ridge(lam)
        if np.any(np.abs(ridge) >= 1):
            raise DomainError("series needs |lam . x^i| < 1 for every knot")
        blocks = _moment_blocks(params, lam, knots, lambda r: mi.appell_symbol(a, r), project)
        value, info = sum_blocks(blocks, ctrl, "R series", full_output=True)
        info["method"] = method
        return (value, info) if full_output else value
    raise InvalidArgumentError(f"unknown method {method!r}")


def watson_product(lam, knots: KnotSet, params) -> float:
    """prod_j (1 - lam . x^j)^(-b_j)."""
    params = _as_params(params)
    ridge = knots.ridge(lam)
    if np.any(ridge >= 1):
        raise DomainError("Watson's product needs lam . x^j < 1 for every knot")
    return float(np.prod((1.0 - ridge) ** (-np.asarray(params.b))))


# -- Carlson S ----------------------------------------------------------------

def _expand_knots(knots):
    zs = []
    for value, mult in knots:
        if int(mult) != mult or mult < 1:
            raise InvalidArgumentError(f"multiplicities must be positive integers, got {mult}")
        zs.extend([float(value)] * int(mult))
    if not zs:
        raise InvalidArgumentError("no knots")
    return sorted(zs)


def _dd_exp_recursion(zs: list[float], cluster: float | None = None) -> tuple[float, float]:
    """Confluent quotient recursion; returns (value, running rounding-error bound).

    With ``cluster`` set, entries whose knots span at most ``cluster`` are taken
    from the Taylor form instead of the quotient, which would cancel there.
    """
    eps = np.finfo(float).eps
    size = len(zs)
    # table[i] holds [z_i, ..., z_{i+order}] exp for the current order
    table = [math.exp(z) for z in zs]
    bound = [eps * v for v in table]
    for order in range(1, size):
        nxt, nbound = [], []
        for i in range(size - order):
            lo, hi = zs[i], zs[i + order]
            if hi == lo:
                v = math.exp(lo) / math.factorial(order)
                e = eps * v
            elif cluster is not None and hi - lo <= cluster:
                v = _dd_exp_taylor(zs[i:i + order + 1])
                e = 4 * (order + 1) * eps * v
            else:
                h = hi - lo
                v = (table[i + 1] - table[i]) / h
                e = (bound[i + 1] + bound[i]) / h + 2 * eps * abs(v)
            nxt.append(v)
            nbound.append(e)
        table, bound = nxt, nbound
    return table[0], bound[0]


def _dd_exp_taylor(zs: list[float], max_terms: int = 400) -> float:
    """exp(mu) * sum_m h_m(z - mu) / (m + k)!, h_m the complete homogeneous polynomials."""
    k = len(zs) - 1
    mu = math.fsum(zs) / len(zs)
    w = [z - mu for z in zs]
    radius = max(abs(x) for x in w)
    h = [1.0] + [0.0] * max_terms
    for wi in w:
        for m in range(1, max_terms + 1):
            h[m] += wi * h[m - 1]
    total = 0.0
    # 1/(m+k)! built incrementally to avoid huge factorials
    inv = 1.0 / math.factorial(k)
    for m in range(max_terms + 1):
        if m:
            inv /= m + k
        total += h[m] * inv
        # |h_m| <= C(m+k, k) r^m, so this bounds the next term even when h_m vanishes
        if radius ** (m + 1) * math.comb(m + 1 + k, k) * inv / (m + 1 + k) <= 1e-17 * abs(total):
            break
    return math.exp(mu) * total


def divided_difference_exp(knots: Sequence[tuple[float, int]], method: str = "auto") -> float:
    """Divided difference of exp on knots given as (value, multiplicity) pairs.

    ``recursion`` is the confluent recursion: on a block of equal knots the
    k-th order difference is exp(z) / k!, otherwise the usual quotient.  The
    quotient cancels on clusters of close but distinct knots, so ``auto``
    (the default) takes every entry spanning at most 4 from the Taylor
    expansion about the mean knot, where that series is well conditioned,
    and uses the quotient only across gaps wider than 4.  ``taylor`` uses the
    expansion for the whole knot set.
    """
    zs = [float(z) for z in _expand_knots(knots)]
    if method == "taylor":
        return _dd_exp_taylor(zs)
    if method == "recursion":
        return _dd_exp_recursion(zs)[0]
    if method != "auto":
        raise InvalidArgumentError(f"unknown method {method!r}")
    return _dd_exp_recursion(zs, cluster=4.0)[0]


def s_function(params, z=None, method: str = "series-5.9", ctrl: SeriesControl = DEFAULT_CONTROL, *,
               lam=None, knots: KnotSet | None = None, project: bool = True,
               full_output: bool = False):
    """Carlson's S(b; Z), the Dirichlet average of exp.

    ``series-5.9`` sums lam^j/j! m_j(b; X) with Z = lam.X (``z`` alone means
    s = 1, X = Z, lam = 1).  ``divided-difference-5.10`` needs integer b and
    returns k! [z_0 (b_0 times), ..., z_n (b_n times)] exp with k = sum(b) - 1.
    """
    params = _as_params(params)
    if knots is None:
        if z is None:
            raise InvalidArgumentError("give Z or (lam, knots)")
        z_vals = np.asarray(z, dtype=float).ravel()
        knots_, lam_ = KnotSet(z_vals), np.ones(1)
    else:
        knots_, lam_ = knots, np.asarray(lam, dtype=float).ravel()
        z_vals = knots_.ridge(lam_)
    if z_vals.size != len(params.b):
        raise InvalidArgumentError(f"{len(params.b)} parameters for {z_vals.size} variables")
    if method == "divided-difference-5.10":
        if not params.is_integer():
            raise StrategyUnavailableError(method, "all parameters b_i must be positive integers")
        k = int(round(params.c)) - 1
        value = math.factorial(k) * divided_difference_exp(
            [(zv, int(bv)) for zv, bv in zip(z_vals, params.b)])
        return (value, {"method": method}) if full_output else value
    if method == "series-5.9":
        blocks = _moment_blocks(params, lam_, knots_, lambda r: 1.0, project)
        value, info = sum_blocks(blocks, ctrl, "S series", full_output=True)
        info["method"] = method
        return (value, info) if full_output else value
    raise InvalidArgumentError(f"unknown method {method!r}")


# -- Appell F4 ----------------------------------------------------------------

def _check_denominator(name: str, v: float):
    if _is_nonpositive_int(v):
        raise ParameterError(f"{name} = {v} is a nonpositive integer")


def appell_f4(alpha, beta, gamma, delta, x1, x2, ctrl: SeriesControl = DEFAULT_CONTROL,
              full_output: bool = False):
    """F4(alpha, beta; gamma, delta; x1, x2) by its double power series."""
    _check_denominator("gamma", gamma)
    _check_denominator("delta", delta)
    if math.sqrt(abs(x1)) + math.sqrt(abs(x2)) >= 1:
        raise DomainError("outside the F4 series region sqrt|x1| + sqrt|x2| < 1; use f4_via_moments")

    def blocks():
        # diag[j] = t(r - j, j); step r -> r + 1 by the ratio in i, plus t(0, r + 1) by the ratio in j
        diag = [1.0]
        r = 0
        while True:
            yield math.fsum(diag)
            nxt = []
            for j, t in enumerate(diag):
                i = r - j
                nxt.append(t * (alpha + r) * (beta + r) / ((gamma + i) * (i + 1)) * x1)
            nxt.append(diag[-1] * (alpha + r) * (beta + r) / ((delta + r) * (r + 1)) * x2)
            diag = nxt
            r += 1

    value, info = sum_blocks(blocks(), ctrl, "F4 series", full_output=True)
    return (value, info) if full_output else value


def _f4_term(alpha, beta, gamma, delta, x1, x2, i, j):
    return (mi.appell_symbol(alpha, i + j) * mi.appell_symbol(beta, i + j)
            / (mi.appell_symbol(gamma, i) * mi.appell_symbol(delta, j)
               * math.factorial(i) * math.factorial(j)) * x1**i * x2**j)


def f4_knots(x1: float, x2: float) -> KnotSet:
    """The 2 x 3 knot matrix whose Dirichlet spline represents F4 on Lambda."""
    return KnotSet.from_columns([[(1 - x1) * (1 - x2), 1 - x1 - x2, 1 - x1],
                                 [1 - x2, 1 - x2, 1.0]])


def f4_via_moments(alpha, beta, gamma, delta, x1, x2, *, abs_tol: float = 1e-12,
                   rel_tol: float = 1e-11, tol: Tolerances = DEFAULT) -> Estimate:
    """F4(alpha, beta; gamma, delta; x1(1-x2), x2(1-x1)) on Lambda = {x1, x2 < 1, x1 + x2 < 1}.

    With gamma == alpha this is the negative moment m_{-b}(d; X) with
    b = (beta, alpha - beta), d = (delta-1, beta-delta+1, delta-beta).
    Otherwise the R function with d = (gamma+delta-alpha-1, alpha+beta-gamma-delta+1,
    delta-beta) is averaged over a Beta(beta, gamma-beta) ridge direction.
    """
    if not (x1 < 1 and x2 < 1 and x1 + x2 < 1):
        raise DomainError("(x1, x2) outside Lambda = {x1 < 1, x2 < 1, x1 + x2 < 1}")
    _check_denominator("gamma", gamma)
    _check_denominator("delta", delta)
    knots = f4_knots(x1, x2)
    if x1 == 0 and x2 == 0:
        return Estimate(1.0, 0.0, "exact", 0)
    if alpha == gamma:
        d = (delta - 1, beta - delta + 1, delta - beta)
        if min(d) <= 0:
            raise ParameterError(f"d = {d} must be positive")
        return negative_moment(DirichletParams(d), knots, (beta, alpha - beta), "quadrature",
                               abs_tol=abs_tol, rel_tol=rel_tol, tol=tol)
    d = (gamma + delta - alpha - 1, alpha + beta - gamma - delta + 1, delta - beta)
    if min(d) <= 0:
        raise ParameterError(f"d = {d} must be positive")
    if beta <= 0 or gamma - beta <= 0:
        raise ParameterError(f"b = ({beta}, {gamma - beta}) must be positive")
    xmat = knots.matrix
    prev = None
    nodes = 8
    total = 0
    while True:
        u, wu = _beta_rule(beta, gamma - beta, nodes)
        t, wt = dirichlet_rule(d, nodes)
        # ridge values u . x^j for every outer node: (Nu, 3)
        zu = np.outer(u, xmat[0]) + np.outer(1 - u, xmat[1])
        vals = (zu @ t.T) ** (-alpha)
        val = float(wu @ vals @ wt)
        total += vals.size
        if prev is not None and abs(val - prev) <= max(abs_tol, rel_tol * abs(val)):
            return Estimate(val, abs(val - prev), "quadrature", total)
        if nodes * 2 > tol.quadrature_max_nodes:
            raise AccuracyError("F4 quadrature did not converge", val,
                                abs(val - prev) if prev is not None else float("inf"))
        prev = val
        nodes *= 2


# -- Lauricella F_B and polynomials ------------------------------------------

@dataclass(frozen=True)
class LauricellaSpec:
    """Arguments of F_B(alpha, beta; gamma; x).

    For the polynomial L_j set ``j`` (then alpha = -j); otherwise set ``alpha``.
    """

    beta: tuple[float, ...]
    gamma: float
    x: tuple[float, ...]
    alpha: tuple[float, ...] | None = None
    j: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        n = len(self.beta)
        if len(self.x) != n:
            raise InvalidArgumentError("beta and x must have equal length")
        if (self.alpha is None) == (self.j is None):
            raise InvalidArgumentError("give exactly one of alpha or j")
        if self.j is not None:
            object.__setattr__(self, "j", mi.as_index(self.j))
            if len(self.j) != n:
                raise InvalidArgumentError("j and beta must have equal length")
        else:
            object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
            if len(self.alpha) != n:
                raise InvalidArgumentError("alpha and beta must have equal length")
        if _is_nonpositive_int(self.gamma):
            raise ParameterError(f"gamma = {self.gamma} is a nonpositive integer")

    @property
    def n(self) -> int:
        return len(self.beta)

    @property
    def is_polynomial(self) -> bool:
        return self.j is not None or all(_is_nonpositive_int(a) for a in self.alpha)

    @property
    def alpha_vector(self) -> tuple[float, ...]:
        return tuple(-float(v) for v in self.j) if self.j is not None else self.alpha

    @property
    def d(self) -> tuple[float, ...]:
        """Dirichlet parameters (beta, gamma - |beta|)."""
        return self.beta + (self.gamma - math.fsum(self.beta),)

    def with_j(self, j) -> "LauricellaSpec":
        return LauricellaSpec(self.beta, self.gamma, self.x, j=tuple(j))


def _fb_term(alpha, beta, gamma, x, k) -> float:
    num = mi.appell_symbol(alpha, k) * mi.appell_symbol(beta, k)
    return num / (mi.appell_symbol(gamma, sum(k)) * mi.factorial(k)) * mi.power(x, k)


def lauricella_fb(spec: LauricellaSpec, ctrl: SeriesControl = DEFAULT_CONTROL,
                  full_output: bool = False):
    """F_B(alpha, beta; gamma; x) = sum_k (alpha,k)(beta,k) / ((gamma,|k|) k!) x^k."""
    alpha = spec.alpha_vector
    if spec.is_polynomial:
        top = tuple(int(-a) for a in alpha)
        terms = [_fb_term(alpha, spec.beta, spec.gamma, spec.x, k)
                 for k in mi.enumerate_indices(spec.n, upper=top)]
        value = math.fsum(terms)
        return (value, {"order": sum(top), "terminating": True}) if full_output else value
    if any(abs(v) >= 1 for v in spec.x):
        raise DomainError("F_B series needs |x_i| < 1")

    def blocks():
        r = 0
        while True:
            yield math.fsum(_fb_term(alpha, spec.beta, spec.gamma, spec.x, k)
                            for k in mi.compositions(r, spec.n))
            r += 1

    value, info = sum_blocks(blocks(), ctrl, "F_B series", full_output=True)
    return (value, info) if full_output else value


def build_lauricella_knots(x: Sequence[float]) -> KnotSet:
    """n x (n+1) matrix with 1 - x_i on the diagonal and ones elsewhere."""
    x = np.asarray(x, dtype=float).ravel()
    if np.any(x >= 1):
        raise DomainError("every x_i must be < 1")
    n = x.size
    mat = np.ones((n, n + 1))
    mat[np.arange(n), np.arange(n)] = 1.0 - x
    return KnotSet.from_columns(mat)


def epsilon_lm(l: int, m: int, x: Sequence[float]) -> float:
    """1 if l != m, else 1 - x_m."""
    return 1.0 - x[m] if l == m else 1.0


LAURICELLA_METHODS = ("series", "moments-6.11", "recurrence-6.14")


def lauricella_poly(spec: LauricellaSpec, method: str = "series", ctrl: SeriesControl = DEFAULT_CONTROL,
                    *, moment_strategy: str = "expansion", tol: Tolerances = DEFAULT) -> float:
    """Lauricella polynomial L_j(x) by its terminating series, as a spline moment, or by recurrence."""
    if spec.j is None:
        raise InvalidArgumentError("lauricella_poly needs a spec with j")
    if method == "series":
        return lauricella_fb(spec, ctrl)
    if method == "moments-6.11":
        d = spec.d
        if min(d) <= 0:
            raise StrategyUnavailableError(method, f"d = (beta, gamma - |beta|) = {d} must be positive")
        if any(v >= 1 for v in spec.x):
            raise StrategyUnavailableError(method, "every x_i must be < 1")
        knots = build_lauricella_knots(spec.x)
        return dirichlet_moment(DirichletParams(d), knots, spec.j, moment_strategy, tol)
    if method == "recurrence-6.14":
        return lauricella_grid(spec, ctrl)[spec.j]
    raise InvalidArgumentError(f"unknown method {method!r}; choose from {LAURICELLA_METHODS}")


def lauricella_grid(spec: LauricellaSpec, ctrl: SeriesControl = DEFAULT_CONTROL) -> dict[tuple[int, ...], float]:
    """All L_k(x), k <= j, from L_0 = 1 by the three-term recurrence in each direction.

    Each new entry L_{k+d_m} is solved from

        (g+|k|) L_{k+d_m} = [g(1 - w_m x_m) + |k|] L_k
                            - sum_l k_l eps_lm [L_{k-d_l} - L_{k-d_l+d_m}],

    with w_m = beta_m / g and L = 0 off the grid.  Directions with x_m = 0
    are not used; if no direction is usable the entry comes from the series.
    """
    n, g, x = spec.n, spec.gamma, spec.x
    grid: dict[tuple[int, ...], float] = {}

    def get(k):
        return 0.0 if min(k) < 0 else grid[k]

    for k_new in mi.enumerate_indices(n, upper=spec.j):
        if sum(k_new) == 0:
            grid[k_new] = 1.0
            continue
        usable = [m for m in range(n) if k_new[m] > 0 and x[m] != 0]
        if not usable:
            grid[k_new] = lauricella_fb(spec.with_j(k_new), ctrl)
            continue
        m = usable[0]
        k = mi.sub(k_new, mi.unit(n, m))
        wm = spec.beta[m] / g
        acc = (g * (1 - wm * x[m]) + sum(k)) * grid[k]
        for l in range(n):
            if k[l]:
                down = mi.sub(k, mi.unit(n, l))
                acc -= k[l] * epsilon_lm(l, m, x) * (get(down) - get(mi.add(down, mi.unit(n, m))))
        grid[k_new] = acc / (g + sum(k))
    return grid


def lauricella_recurrence_residual(spec: LauricellaSpec, k, m: int,
                                   ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Left side of the L-recurrence at (k, m) with all L from the series."""
    n, g, x = spec.n, spec.gamma, spec.x
    k = mi.as_index(k)

    def L(idx):
        return 0.0 if min(idx) < 0 else lauricella_fb(spec.with_j(idx), ctrl)

    up = mi.add(k, mi.unit(n, m))
    res = (g + sum(k)) * L(up) - (g * (1 - spec.beta[m] / g * x[m]) + sum(k)) * L(k)
    for l in range(n):
        if k[l]:
            down = mi.sub(k, mi.unit(n, l))
            res += k[l] * epsilon_lm(l, m, x) * (L(down) - L(mi.add(down, mi.unit(n, m))))
    return res


def lauricella_moment_recurrence_residual(params, x, beta, m: int, tol: Tolerances = DEFAULT):
    """(residual, scale) of the moment recurrence behind the L-recurrence, for the Lauricella knots."""
    params = _as_params(params)
    knots = build_lauricella_knots(x)
    n = knots.s
    beta = mi.as_index(beta)
    c = params.c

    def mom(idx):
        return 0.0 if min(idx) < 0 else dirichlet_moment(params, knots, idx, "expansion", tol)

    up = mi.add(beta, mi.unit(n, m))
    t1 = (c + sum(beta)) * mom(up)
    t2 = (c * (1 - params.w[m] * x[m]) + sum(beta)) * mom(beta)
    t3 = 0.0
    for l in range(n):
        if beta[l]:
            down = mi.sub(beta, mi.unit(n, l))
            t3 += beta[l] * epsilon_lm(l, m, x) * (mom(down) - mom(mi.add(down, mi.unit(n, m))))
    return t1 - t2 + t3, max(abs(t1), abs(t2), abs(t3), 1e-300)


def log_convexity_gap(spec: LauricellaSpec, m: int, method: str = "series") -> float:
    """L_{j-e_m} L_{j+e_m} - L_j^2 (nonnegative on the admissible domain)."""
    j = spec.j
    if j[m] == 0:
        raise InvalidArgumentError("need j - e_m >= 0")
    e = mi.unit(spec.n, m)
    lo = lauricella_poly(spec.with_j(mi.sub(j, e)), method)
    mid = lauricella_poly(spec, method)
    hi = lauricella_poly(spec.with_j(mi.add(j, e)), method)
    return lo * hi - mid * mid


def lauricella_genfun_check(spec: LauricellaSpec, lam, which: str = "exp-6.12", order: int = 12, *,
                            a: float = 1.0, method: str = "series",
                            ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """|LHS - sum_{|j| <= order} term_j| for one of the two generating functions of L_j.

    ``exp-6.12``: exp(lam.e) S(d; -lam_1 x_1, ..., -lam_n x_n, 0) vs sum lam^j/j! L_j.
    ``r-6.13``:   R_{-a}(d; Y) vs sum lam^j (a,|j|)/j! L_j with
                  Y = (1 - lam.e + lam_i x_i, ..., 1 - lam.e).
    """
    lam = np.asarray(lam, dtype=float).ravel()
    n = spec.n
    if lam.size != n:
        raise InvalidArgumentError(f"lambda has length {lam.size}, expected {n}")
    d = DirichletParams(spec.d) if min(spec.d) > 0 else None
    if d is None:
        raise ParameterError(f"d = {spec.d} must be positive")
    x = np.asarray(spec.x)
    le = float(np.sum(lam))
    if which == "exp-6.12":
        z = np.concatenate([-lam * x, [0.0]])
        lhs = math.exp(le) * s_function(d, z, "series-5.9", ctrl)

        def weight(r):
            return 1.0
    elif which == "r-6.13":
        if max(np.max(np.abs(le - lam * x)), abs(le)) >= 1:
            raise DomainError("generating function region violated: max |lam.e - lam_i x_i|, |lam.e| must be < 1")
        y = np.concatenate([1 - le + lam * x, [1 - le]])
        lhs = r_function(a, d, y, "quadrature")

        def weight(r):
            return mi.appell_symbol(a, r)
    else:
        raise InvalidArgumentError(f"unknown generating function {which!r}")
    terms = []
    for r in range(order + 1):
        for j in mi.compositions(r, n):
            if lam.any() or r == 0:
                terms.append(weight(r) * mi.power(lam, j) / mi.factorial(j)
                             * lauricella_poly(spec.with_j(j), method, ctrl))
    return abs(lhs - math.fsum(terms))


# -- identity residuals for R ------------------------------------------------

def euler_residual(a: float, params, z, tol: Tolerances = DEFAULT) -> float:
    """Relative residual of R_{-a}(b; Z) = prod z_j^(-b_j) R_{a-c}(b; 1/Z), by quadrature."""
    params = _as_params(params)
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise DomainError("Euler's transformation needs z_j > 0")
    _check_denominator("c", params.c)
    lhs = r_function(a, params, z, "quadrature", tol=tol)
    rhs = float(np.prod(z ** (-np.asarray(params.b)))) * r_function(params.c - a, params, 1 / z,
                                                                     "quadrature", tol=tol)
    return abs(lhs - rhs) / max(abs(lhs), 1e-300)


def watson_residuals(lam, knots: KnotSet, params, orders: Sequence[int],
                     project: bool = False) -> list[float]:
    """|truncated R series (a = c) - Watson product| at each requested truncation order."""
    params = _as_params(params)
    lam = np.asarray(lam, dtype=float).ravel()
    target = watson_product(lam, knots, params)
    ridge = knots.ridge(lam)
    if np.any(np.abs(ridge) >= 1):
        raise DomainError("series needs |lam . x^i| < 1")
    blocks = _moment_blocks(params, lam, knots, lambda r: mi.appell_symbol(params.c, r), project)
    wanted = sorted(set(orders))
    out = {}
    partial = 0.0
    for r, block in enumerate(blocks):
        partial += block
        if r in wanted:
            out[r] = abs(partial - target)
        if r >= wanted[-1]:
            break
    return [out[o] for o in orders]


def constant_argument_residual(params, x, tol: Tolerances = DEFAULT) -> float:
    """Relative residual of R_{-c}(b; x) = prod x_i^(-b_i), by quadrature."""
    params = _as_params(params)
    x = np.asarray(x, dtype=float)
    lhs = r_function(params.c, params, x, "quadrature", tol=tol)
    rhs = float(np.prod(x ** (-np.asarray(params.b))))
    return abs(lhs - rhs) / abs(rhs)
