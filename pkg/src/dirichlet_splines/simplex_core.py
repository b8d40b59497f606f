"""Knot sets, Dirichlet parameters and integrals against the Dirichlet density.

Everything here is a direct integral over the standard simplex E_n.  The
moment routines in this module are brute-force (full polynomial expansion
or quadrature) and serve as the reference for the recursive algorithms in
:mod:`dirichlet_splines.moments`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.special import gammaln, roots_jacobi

from . import multiindex as mi
from .config import DEFAULT, Tolerances
from .errors import (AccuracyError, DomainError, InvalidArgumentError, ParameterError,
                     PoleError, ResourceError)


class KnotSet:
    """Ordered knots x^0, ..., x^n in R^s, stored row-wise as an (n+1, s) array."""

    def __init__(self, points):
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise InvalidArgumentError(f"knots must be a nonempty (n+1, s) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgumentError("knot coordinates must be finite")
        self.points = pts
        self.points.setflags(write=False)

    @classmethod
    def from_columns(cls, matrix) -> "KnotSet":
        """Build from an s x (n+1) matrix whose columns are the knots."""
        return cls(np.asarray(matrix, dtype=float).T)

    @property
    def n(self) -> int:
        return self.points.shape[0] - 1

    @property
    def s(self) -> int:
        return self.points.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        """The s x (n+1) matrix X."""
        return self.points.T

    def __len__(self):
        return self.points.shape[0]

    def __getitem__(self, j):
        return self.points[j]

    def __repr__(self):
        return f"KnotSet({self.points.tolist()!r})"

    def prefix(self, k: int) -> "KnotSet":
        """{x^0, ..., x^k}."""
        if not 0 <= k <= self.n:
            raise InvalidArgumentError(f"prefix length {k} out of range 0..{self.n}")
        return KnotSet(self.points[: k + 1])

    def delete(self, j: int) -> "KnotSet":
        return KnotSet(np.delete(self.points, j, axis=0))

    def duplicate(self, i: int) -> "KnotSet":
        return KnotSet(np.vstack([self.points, self.points[i]]))

    def permute(self, order: Sequence[int]) -> "KnotSet":
        return KnotSet(self.points[list(order)])

    def repeat(self, multiplicities: Sequence[int]) -> "KnotSet":
        return KnotSet(np.repeat(self.points, list(multiplicities), axis=0))

    def ridge(self, lam) -> np.ndarray:
        """The values lam . x^j for all knots."""
        return self.points @ np.asarray(lam, dtype=float)

    def affine_rank(self, tol: float = DEFAULT.independence_tol) -> int:
        if len(self) == 1:
            return 0
        diffs = self.points[1:] - self.points[0]
        sv = np.linalg.svd(diffs, compute_uv=False)
        scale = max(np.max(np.abs(self.points)), 1.0)
        return int(np.sum(sv > tol * scale))

    def volume_positive(self, tol: float = DEFAULT.independence_tol) -> bool:
        return self.affine_rank(tol) == self.s


def independent_subset(knots: KnotSet, size: int, tol: float = DEFAULT.independence_tol) -> list[int] | None:
    """Greedily pick ``size`` affinely independent knots; None if impossible."""
    chosen = [0]
    scale = max(np.max(np.abs(knots.points)), 1.0)
    for i in range(1, len(knots)):
        if len(chosen) == size:
            break
        diffs = knots.points[chosen[1:] + [i]] - knots.points[chosen[0]]
        sv = np.linalg.svd(diffs, compute_uv=False)
        if sv[-1] > tol * scale:
            chosen.append(i)
    return chosen if len(chosen) == size else None


@dataclass(frozen=True)
class DirichletParams:
    """Parameter vector b of the Dirichlet density, with c = sum(b) and w = b / c."""

    b: tuple[float, ...]
    c: float = field(init=False)
    w: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        b = tuple(float(v) for v in self.b)
        if not b:
            raise ParameterError("need at least one Dirichlet parameter")
        if any(not math.isfinite(v) or v <= 0 for v in b):
            raise ParameterError(f"Dirichlet parameters must be positive and finite: {b}")
        object.__setattr__(self, "b", b)
        c = math.fsum(b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "w", tuple(v / c for v in b))

    @classmethod
    def ones(cls, count: int) -> "DirichletParams":
        return cls((1.0,) * count)

    @property
    def n(self) -> int:
        return len(self.b) - 1

    def raised(self, i: int, by: float = 1.0) -> "DirichletParams":
        """b + by * e_i."""
        b = list(self.b)
        b[i] += by
        return DirichletParams(tuple(b))

    def is_integer(self) -> bool:
        return all(v == int(v) for v in self.b)


def _check_pair(params: DirichletParams, knots: KnotSet):
    if len(params.b) != len(knots):
        raise InvalidArgumentError(
            f"{len(params.b)} Dirichlet parameters for {len(knots)} knots")


def dirichlet_density(params: DirichletParams, t) -> float:
    """Dirichlet density phi_b at t = (t_1, ..., t_n) in E_n; t_0 = 1 - sum(t)."""
    t = np.asarray(t, dtype=float).ravel()
    if t.size != params.n:
        raise InvalidArgumentError(f"expected {params.n} simplex coordinates, got {t.size}")
    t0 = 1.0 - math.fsum(t)
    full = np.concatenate([[t0], t])
    if np.any(full < -1e-14):
        raise DomainError(f"point {t.tolist()} lies outside the standard simplex")
    full = np.clip(full, 0.0, None)
    b = np.asarray(params.b)
    zero = full == 0.0
    if np.any(zero & (b < 1)):
        raise PoleError("density is infinite on a face where t_i = 0 and b_i < 1")
    if np.any(zero & (b > 1)):
        return 0.0
    nz = ~zero
    log_val = gammaln(params.c) - np.sum(gammaln(b)) + np.sum((b[nz] - 1) * np.log(full[nz]))
    return float(np.exp(log_val))


def dirichlet_monomial_integral(params: DirichletParams, eta: Sequence[int]) -> float:
    """Integral of t^eta against phi_b over E_n: prod (b_i, eta_i) / (c, |eta|)."""
    eta = mi.as_index(eta)
    if len(eta) != len(params.b):
        raise InvalidArgumentError("multi-index length must equal the number of parameters")
    return mi.appell_symbol(params.b, eta) / mi.appell_symbol(params.c, sum(eta))


def _coordinate_expansion(values: np.ndarray, power: int) -> dict[tuple[int, ...], float]:
    """(sum_i values_i t_i)^power as {k: multinomial(power, k) * values^k}."""
    out = {}
    for k in mi.compositions(power, len(values)):
        out[k] = mi.multinomial(power, k) * mi.power(values, k)
    return out


def expand_monomial(knots: KnotSet, beta: Sequence[int]) -> dict[tuple[int, ...], float]:
    """Coefficients in t of prod_l ((Xt)_l)^beta_l, keyed by the exponent eta of t."""
    poly = {(0,) * len(knots): 1.0}
    for l, bl in enumerate(beta):
        if bl == 0:
            continue
        factor = _coordinate_expansion(knots.points[:, l], bl)
        nxt: dict[tuple[int, ...], float] = {}
        for eta, a in poly.items():
            for k, f in factor.items():
                key = mi.add(eta, k)
                nxt[key] = nxt.get(key, 0.0) + a * f
        poly = nxt
    return poly


def oracle_moment(params: DirichletParams, knots: KnotSet, beta: Sequence[int],
                  tol: Tolerances = DEFAULT) -> float:
    """m_beta(b; X) by full multinomial expansion and termwise Dirichlet integrals.

    Exponential in |beta| and n, hence the caps in ``tol``.
    """
    _check_pair(params, knots)
    beta = mi.as_index(beta)
    if len(beta) != knots.s:
        raise InvalidArgumentError(f"beta has length {len(beta)}, knots live in R^{knots.s}")
    if sum(beta) > tol.oracle_max_order or len(knots) > tol.oracle_max_knots:
        raise ResourceError(
            f"oracle caps exceeded (|beta| = {sum(beta)} > {tol.oracle_max_order} "
            f"or {len(knots)} knots > {tol.oracle_max_knots})")
    poly = expand_monomial(knots, beta)
    terms = [coef * dirichlet_monomial_integral(params, eta) for eta, coef in poly.items()]
    return math.fsum(terms)


class ExpansionMoments:
    """All moments m_j(b; X), |j| = 0, 1, 2, ..., built one order at a time.

    The polynomial prod_l ((Xt)_l)^j_l is homogeneous of degree |j| in t, so
    it is stored as a dense array over the exponents of t_0..t_{n-1} (the
    exponent of t_n is implied) and extended by one linear factor per step.
    Used by the power-series evaluators, which need moments of orders far
    beyond the oracle caps.
    """

    def __init__(self, params: DirichletParams, knots: KnotSet):
        _check_pair(params, knots)
        self.params = params
        self.knots = knots
        self.order = 0
        self._dims = knots.n
        self._polys = {(0,) * knots.s: np.ones((1,) * self._dims)}
        self.moments: dict[tuple[int, ...], float] = {(0,) * knots.s: 1.0}

    def _weights(self, r: int) -> np.ndarray:
        """prod_i (b_i, eta_i) / (c, r) on the grid, eta_n = r - sum of the others."""
        b = self.params.b
        poch = [np.cumprod(np.concatenate([[1.0], bi + np.arange(r)])) for bi in b]
        w = np.ones((r + 1,) * self._dims)
        total = np.zeros((r + 1,) * self._dims, dtype=int)
        for axis in range(self._dims):
            shape = [1] * self._dims
            shape[axis] = r + 1
            w = w * poch[axis].reshape(shape)
            total = total + np.arange(r + 1).reshape(shape)
        last = r - total
        valid = last >= 0
        w = np.where(valid, w * poch[-1][np.clip(last, 0, r)], 0.0)
        return w / mi.appell_symbol(self.params.c, r)

    def _times_linear(self, poly: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
        r = poly.shape[0] if poly.ndim else 0
        out = np.zeros((r + 1,) * poly.ndim)
        same = tuple(slice(0, r) for _ in range(poly.ndim))
        out[same] += coeffs[-1] * poly
        for axis in range(poly.ndim):
            a = coeffs[axis]
            if a == 0.0:
                continue
            index = tuple(slice(1, None) if ax == axis else slice(0, r) for ax in range(poly.ndim))
            out[index] += a * poly
        return out

    def next_order(self) -> dict[tuple[int, ...], float]:
        """Advance one order; returns {j: m_j} for the new order."""
        r = self.order + 1
        weights = self._weights(r)
        polys = {}
        block = {}
        for j in mi.compositions(r, self.knots.s):
            l = next(i for i, v in enumerate(j) if v)
            parent = self._polys[mi.sub(j, mi.unit(self.knots.s, l))]
            poly = self._times_linear(parent, self.knots.points[:, l])
            polys[j] = poly
            block[j] = float(np.sum(poly * weights))
        self._polys = polys
        self.moments.update(block)
        self.order = r
        return block


# -- quadrature over the simplex ---------------------------------------------

def _beta_rule(p: float, q: float, nodes: int):
    """Gauss-Jacobi rule for the Beta(p, q) law on [0, 1]."""
    with np.errstate(invalid="ignore", divide="ignore"):
        # scipy evaluates a discarded branch that divides by zero when p + q = 1
        x, w = roots_jacobi(nodes, q - 1.0, p - 1.0)
    return (1.0 + x) / 2.0, w / np.sum(w)


def dirichlet_rule(b: Sequence[float], nodes: int):
    """Tensor quadrature for expectations under Dirichlet(b) on the simplex.

    Stick-breaking maps E_n to the unit cube, turning the Dirichlet law into a
    product of Beta laws; each factor gets a Gauss-Jacobi rule that absorbs the
    endpoint singularities t^(b-1) exactly.  Returns (t, weights) with t of
    shape (N, n+1) holding all barycentric coordinates.
    """
    b = [float(v) for v in b]
    n = len(b) - 1
    if n == 0:
        return np.ones((1, 1)), np.ones(1)
    remaining = np.ones(1)
    weights = np.ones(1)
    coords = []
    for i in range(n):
        v, wv = _beta_rule(b[i], math.fsum(b[i + 1:]), nodes)
        coords = [np.repeat(c, nodes) for c in coords]
        coords.append(np.outer(remaining, v).ravel())
        remaining = np.outer(remaining, 1.0 - v).ravel()
        weights = np.outer(weights, wv).ravel()
    coords.append(remaining)
    return np.stack(coords, axis=1), weights


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float
    method: str
    evaluations: int

    def __float__(self):
        return self.value


def dirichlet_expectation(f: Callable[[np.ndarray], np.ndarray], b: Sequence[float], *,
                          abs_tol: float = 1e-13, rel_tol: float = 1e-12,
                          tol: Tolerances = DEFAULT, start: int = 8) -> Estimate:
    """E[f(t)] for t ~ Dirichlet(b), by Gauss-Jacobi rules of doubling size.

    ``f`` receives an (N, n+1) array of barycentric points and returns N values.
    The error estimate is the change between the last two rules.
    """
    n = len(b) - 1
    if n > tol.quadrature_max_dim:
        raise ResourceError(f"quadrature over E_{n} exceeds the dimension cap {tol.quadrature_max_dim}")
    if n == 0:
        val = float(np.asarray(f(np.ones((1, 1))))[0])
        return Estimate(val, 0.0, "quadrature", 1)
    prev = None
    nodes = start
    total = 0
    while True:
        t, w = dirichlet_rule(b, nodes)
        val = float(np.dot(w, f(t)))
        total += len(w)
        if prev is not None:
            err = abs(val - prev)
            if err <= max(abs_tol, rel_tol * abs(val)):
                return Estimate(val, err, "quadrature", total)
        if 2 * nodes > tol.quadrature_max_nodes or (2 * nodes) ** n > 4_000_000:
            err = abs(val - prev) if prev is not None else float("inf")
            raise AccuracyError("simplex quadrature did not converge", val, err)
        prev = val
        nodes *= 2


def origin_in_hull(knots: KnotSet, tol: float = DEFAULT.hull_tol) -> bool:
    """Whether 0_s lies in (or within tol of) the convex hull of the knots.

    Solved as the LP  min ||X lam||_1  s.t.  lam >= 0, sum(lam) = 1.
    """
    k, s = len(knots), knots.s
    # variables: lam (k), u (s);  -u <= X lam <= u
    cost = np.concatenate([np.zeros(k), np.ones(s)])
    xt = knots.points.T
    a_ub = np.block([[xt, -np.eye(s)], [-xt, -np.eye(s)]])
    b_ub = np.zeros(2 * s)
    a_eq = np.concatenate([np.ones(k), np.zeros(s)])[None, :]
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"hull test LP failed: {res.message}")
    scale = max(np.max(np.abs(knots.points)), 1.0)
    return res.fun <= tol * scale


def _is_int(v: float) -> bool:
    return float(v).is_integer()


def check_power_domain(knots: KnotSet, a: Sequence[float], tol: Tolerances = DEFAULT):
    """Validate that prod_j ((Xt)_j)^(-a_j) is finite and real on the hull."""
    if all(_is_int(v) and v <= 0 for v in a):
        return
    if origin_in_hull(knots, tol.hull_tol):
        raise DomainError("the origin lies in the convex hull of the knots")
    for j, aj in enumerate(a):
        col = knots.points[:, j]
        if _is_int(aj) and aj <= 0:
            continue
        if _is_int(aj):
            if not (np.all(col > 0) or np.all(col < 0)):
                raise DomainError(f"coordinate {j + 1} changes sign or vanishes on the hull")
        elif not np.all(col > 0):
            raise DomainError(f"coordinate {j + 1} must be positive on the hull for a real power")


def negative_moment(params: DirichletParams, knots: KnotSet, a, method: str = "quadrature", *,
                    abs_tol: float = 1e-12, rel_tol: float = 1e-11, seed: int = 0,
                    target_se: float = 1e-3, tol: Tolerances = DEFAULT) -> Estimate:
    """m_{-a}(b; X): the average of prod_j ((Xt)_j)^(-a_j) under Dirichlet(b).

    ``method`` is ``"quadrature"`` (n <= 3, Gauss-Jacobi) or ``"monte-carlo"``
    (Dirichlet sampling with a fixed seed, stopping once the standard error
    drops below ``target_se``; the reported error is one standard error).
    """
    _check_pair(params, knots)
    a = np.asarray(a, dtype=float).ravel()
    if a.size != knots.s:
        raise InvalidArgumentError(f"exponent vector has length {a.size}, expected {knots.s}")
    if np.all(a == 0):
        return Estimate(1.0, 0.0, method, 0)
    check_power_domain(knots, a, tol)
    xmat = knots.points

    def integrand(t):
        y = t @ xmat
        return np.prod(y ** (-a), axis=1)

    if method == "quadrature":
        if params.n > tol.quadrature_max_dim:
            raise ResourceError(f"quadrature path requires n <= {tol.quadrature_max_dim}")
        return dirichlet_expectation(integrand, params.b, abs_tol=abs_tol, rel_tol=rel_tol, tol=tol)
    if method == "monte-carlo":
        return _monte_carlo(integrand, params.b, target_se, seed, tol.mc_max_samples)
    raise InvalidArgumentError(f"unknown method {method!r}")


def _monte_carlo(integrand, b, target: float, seed: int, cap: int) -> Estimate:
    rng = np.random.default_rng(seed)
    batch = 100_000
    count = 0
    total = 0.0
    total_sq = 0.0
    while True:
        t = rng.dirichlet(b, size=batch)
        vals = integrand(t)
        count += batch
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals * vals))
        mean = total / count
        var = max(total_sq / count - mean * mean, 0.0)
        se = math.sqrt(var / count)
        if se <= target or count >= cap:
            return Estimate(mean, se, "monte-carlo", count)
