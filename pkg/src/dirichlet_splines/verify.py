"""Seeded identity sweeps.

Every suite draws random admissible inputs, evaluates one identity (or a
pair of independent evaluation routes) and reports the worst residual
against a fixed tolerance.  Residuals are relative unless noted.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import asdict, dataclass, field

import numpy as np

from . import hypergeo as hg
from . import multiindex as mi
from .moments import (degree_elevate_check, one_pivot_residual, simplex_moment_alg53,
                      pivot_difference_residual, two_pivot_residual)
from .simplex_core import DirichletParams, KnotSet, negative_moment, oracle_moment


@dataclass
class SuiteResult:
    name: str
    cases: int
    max_residual: float
    tolerance: float
    passed: bool
    notes: dict = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)


def _rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _result(name, residuals, tol, **notes) -> SuiteResult:
    worst = max(residuals) if residuals else 0.0
    return SuiteResult(name, len(residuals), float(worst), tol, bool(worst <= tol), notes)


def _random_knots(rng, n, s, lo=0.0, hi=1.0):
    while True:
        knots = KnotSet(rng.uniform(lo, hi, size=(n + 1, s)))
        if knots.prefix(s).volume_positive():
            return knots


def _random_beta(rng, s, max_order):
    total = int(rng.integers(0, max_order + 1))
    cuts = np.sort(rng.integers(0, total + 1, size=s - 1))
    return tuple(int(v) for v in np.diff(np.concatenate([[0], cuts, [total]])))


def suite_knot_insertion(seed: int = 0, cases: int = 200, tol: float = 1e-9) -> SuiteResult:
    """Simplex-spline moments by the knot-insertion algorithm vs the expansion oracle."""
    rng = _rng(seed, "knot-insertion")
    res = []
    for _ in range(cases):
        s = int(rng.integers(1, 4))
        n = int(rng.integers(s, 7))
        knots = _random_knots(rng, n, s)
        beta = _random_beta(rng, s, 5)
        got = simplex_moment_alg53(knots, beta)
        want = oracle_moment(DirichletParams.ones(n + 1), knots, beta)
        res.append(_rel(got, want))
    return _result("knot-insertion", res, tol)


def suite_moment_identities(seed: int = 0, cases: int = 100, tol: float = 1e-10) -> list[SuiteResult]:
    """Degree elevation, the one-pivot recurrence and the two-pivot identities."""
    rng = _rng(seed, "moment-identities")
    r_par, r_coord, r_one, r_diff, r_two = [], [], [], [], []
    for _ in range(cases):
        s = int(rng.integers(1, 3))
        n = int(rng.integers(s, 4))
        knots = _random_knots(rng, n, s, -1.0, 1.0)
        beta = _random_beta(rng, s, 4)
        b = rng.uniform(0.3, 3.0, size=n + 1)
        params = DirichletParams(tuple(b))
        r1, r2 = degree_elevate_check(params, knots, beta)
        scale = abs(oracle_moment(params, knots, beta))
        r_par.append(abs(r1) / max(scale, 1e-300))
        for l in range(s):
            up = oracle_moment(params, knots, mi.add(beta, mi.unit(s, l)))
            r_coord.append(abs(r2[l]) / max(abs(up), np.max(np.abs(knots.points)) * scale, 1e-300))
        # pivots need b >= 1; b = 1 exactly only when n > s
        i, j = (int(v) for v in rng.choice(n + 1, size=2, replace=False))
        b[j] = 1.0 + rng.uniform(0, 2) if n == s else float(rng.choice([1.0, 1.0 + rng.uniform(0, 2)]))
        b[i] = 1.0 + rng.uniform(0, 2)
        params = DirichletParams(tuple(b))
        res, sc = one_pivot_residual(params, knots, beta, j)
        r_one.append(abs(res) / sc)
        res, sc = pivot_difference_residual(params, knots, beta, i, j)
        r_diff.append(abs(res) / sc)
        k = int(rng.integers(0, s))
        res, sc = two_pivot_residual(params, knots, beta, i, j, k)
        r_two.append(abs(res) / sc)
    return [_result("parameter-elevation", r_par, tol), _result("coordinate-elevation", r_coord, tol),
            _result("one-pivot", r_one, tol), _result("pivot-difference", r_diff, tol),
            _result("two-pivot", r_two, tol)]


WATSON_ORDERS = (4, 8, 16, 32, 48)


def suite_watson(seed: int = 0, cases: int = 20, tol: float = 1e-9) -> SuiteResult:
    """Truncated R series with a = c against Watson's closed product."""
    rng = _rng(seed, "watson")
    desk = abs(hg.r_function(2.0, (1, 1), None, "series-5.11", lam=[0.5], knots=KnotSet([0, 1]))
               - hg.watson_product([0.5], KnotSet([0, 1]), (1, 1)))
    res = []
    monotone = True
    for _ in range(cases):
        s = int(rng.integers(1, 3))
        n = int(rng.integers(1, 4))
        knots = KnotSet(rng.uniform(0, 1, size=(n + 1, s)))
        lam = rng.uniform(-1, 1, size=s)
        # keep max_i sum_l |lam_l x^i_l| < 1 so the multi-index sum does not cancel
        lam *= rng.uniform(0.1, 0.4) / np.max(np.abs(knots.points) @ np.abs(lam))
        params = DirichletParams(tuple(rng.uniform(0.3, 3.0, size=n + 1)))
        seq = hg.watson_residuals(lam, knots, params, WATSON_ORDERS)
        target = hg.watson_product(lam, knots, params)
        for prev, cur in zip(seq, seq[1:]):
            # once at roundoff level the sequence may wobble
            if cur > prev and prev > 1e-14 * abs(target):
                monotone = False
        res.append(seq[-1] / abs(target))
    out = _result("watson", res + [desk], tol, desk_residual=desk, monotone=monotone)
    out.passed = out.passed and monotone
    return out


def suite_euler(seed: int = 0, cases: int = 50, tol: float = 1e-8) -> SuiteResult:
    rng = _rng(seed, "euler")
    res = []
    for _ in range(cases):
        n = int(rng.integers(1, 3))
        b = tuple(rng.uniform(0.3, 3.0, size=n + 1))
        z = rng.uniform(0.5, 2.0, size=n + 1)
        a = float(rng.uniform(-2.0, 3.0))
        res.append(hg.euler_residual(a, b, z))
    return _result("euler", res, tol)


def suite_constant_argument(seed: int = 0, cases: int = 30, tol: float = 1e-9) -> SuiteResult:
    rng = _rng(seed, "constant-argument")
    res = []
    for _ in range(cases):
        s = int(rng.integers(2, 4))
        b = tuple(rng.uniform(0.3, 3.0, size=s))
        x = rng.uniform(0.3, 2.0, size=s)
        res.append(hg.constant_argument_residual(b, x))
    return _result("constant-argument", res, tol)


def suite_s_function(seed: int = 0, cases: int = 50, tol: float = 1e-10) -> SuiteResult:
    """S by its moment series vs k! times a confluent divided difference of exp."""
    rng = _rng(seed, "s-function")
    desk = abs(hg.s_function((1, 1), None, lam=[1.0], knots=KnotSet([0, 1])) - (math.e - 1))
    res = []
    for _ in range(cases):
        n = int(rng.integers(1, 4))
        s = int(rng.integers(1, 3))
        while True:
            b = rng.integers(1, 5, size=n + 1)
            if b.sum() <= 12:
                break
        knots = KnotSet(rng.uniform(0, 1, size=(n + 1, s)))
        lam = rng.uniform(-1.5, 1.5, size=s)
        params = DirichletParams(tuple(float(v) for v in b))
        series = hg.s_function(params, None, "series-5.9", lam=lam, knots=knots)
        dd = hg.s_function(params, None, "divided-difference-5.10", lam=lam, knots=knots)
        res.append(_rel(dd, series))
    out = _result("s-function", res, tol, desk_residual=desk)
    out.passed = out.passed and desk <= 1e-12
    return out


def random_lauricella(rng, n_max=4, j_max=6, x_low=0.0) -> hg.LauricellaSpec:
    n = int(rng.integers(1, n_max + 1))
    beta = rng.uniform(0.1, 2.0, size=n)
    gamma = float(beta.sum() + rng.uniform(0.1, 3.0))
    x = rng.uniform(x_low, 1.0, size=n)
    x = np.where(x == 0.0, 0.5, x)
    j = _random_beta(rng, n, j_max)
    return hg.LauricellaSpec(tuple(beta), gamma, tuple(x), j=j)


def suite_lauricella(seed: int = 0, cases: int = 100, tol: float = 1e-10) -> SuiteResult:
    """Series, spline moment and recurrence evaluations of L_j, pairwise."""
    rng = _rng(seed, "lauricella")
    res = []
    for _ in range(cases):
        spec = random_lauricella(rng)
        vals = [hg.lauricella_poly(spec, m) for m in hg.LAURICELLA_METHODS]
        res.append(max(_rel(vals[0], vals[1]), _rel(vals[0], vals[2]), _rel(vals[1], vals[2])))
    return _result("lauricella", res, tol)


def suite_lauricella_recurrence(seed: int = 0, cases: int = 40, tol: float = 1e-10) -> SuiteResult:
    """Series values plugged into the L recurrence; residual scaled by (gamma + |k|)."""
    rng = _rng(seed, "lauricella-recurrence")
    res = []
    for _ in range(cases):
        spec = random_lauricella(rng, n_max=3, j_max=5)
        m = int(rng.integers(0, spec.n))
        k = spec.j
        res.append(abs(hg.lauricella_recurrence_residual(spec, k, m)) / (spec.gamma + sum(k)))
    return _result("lauricella-recurrence", res, tol)


def suite_lauricella_moment_recurrence(seed: int = 0, cases: int = 40, tol: float = 1e-10) -> SuiteResult:
    rng = _rng(seed, "lauricella-moment-recurrence")
    res = []
    for _ in range(cases):
        n = int(rng.integers(1, 5))
        x = rng.uniform(0, 1, size=n)
        b = tuple(rng.uniform(0.2, 3.0, size=n + 1))
        beta = _random_beta(rng, n, 3)
        m = int(rng.integers(0, n))
        r, sc = hg.lauricella_moment_recurrence_residual(b, x, beta, m)
        res.append(abs(r) / sc)
    return _result("lauricella-moment-recurrence", res, tol)


def suite_log_convexity(seed: int = 0, cases: int = 500, slack: float = 1e-12) -> SuiteResult:
    """L_j^2 <= L_{j-e_m} L_{j+e_m} and L_j > 0 for x_i < 1.

    The reported residual is max(0, L_j^2 - L_{j-e_m} L_{j+e_m}); it must stay
    below ``slack``.
    """
    rng = _rng(seed, "log-convexity")
    res = []
    positive = True
    for _ in range(cases):
        while True:
            spec = random_lauricella(rng, n_max=3, j_max=6, x_low=-1.0)
            ms = [m for m in range(spec.n) if spec.j[m] > 0]
            if ms:
                break
        m = int(rng.choice(ms))
        gap = hg.log_convexity_gap(spec, m)
        positive = positive and hg.lauricella_poly(spec) > 0
        res.append(max(0.0, -gap))
    out = _result("log-convexity", res, slack, all_positive=positive)
    out.passed = out.passed and positive
    return out


def suite_genfun(seed: int = 0, cases: int = 20, tol: float = 1e-8, order: int = 12) -> list[SuiteResult]:
    rng = _rng(seed, "genfun")
    out = []
    for which in ("exp-6.12", "r-6.13"):
        res = []
        for _ in range(cases):
            spec = random_lauricella(rng, n_max=2, j_max=0)
            lam = rng.uniform(-0.1, 0.1, size=spec.n)
            a = float(rng.uniform(0.2, 2.5))
            res.append(hg.lauricella_genfun_check(spec, lam, which, order, a=a))
        out.append(_result("genfun-" + {"exp-6.12": "exp", "r-6.13": "power"}[which], res, tol))
    return out


def random_f4_case(rng, special: bool = False):
    """Parameters with positive Dirichlet weights and a point in both the series region and Lambda."""
    beta = float(rng.uniform(0.2, 1.5))
    delta = beta + float(rng.uniform(0.2, 1.5))
    if special:
        # d = (delta-1, beta-delta+1, delta-beta) > 0
        delta = max(1.0, beta) + float(rng.uniform(0.05, 0.95)) * (beta + 1 - max(1.0, beta))
        if delta <= 1 or delta <= beta or delta >= beta + 1:
            return random_f4_case(rng, special)
        alpha = beta + float(rng.uniform(0.2, 1.5))
        gamma = alpha
    else:
        gamma = beta + float(rng.uniform(0.2, 1.5))
        alpha = gamma + delta - 1 - beta * float(rng.uniform(0.1, 0.9))
    while True:
        x1, x2 = rng.uniform(-0.3, 0.3, size=2)
        u1, u2 = x1 * (1 - x2), x2 * (1 - x1)
        if math.sqrt(abs(u1)) + math.sqrt(abs(u2)) <= 0.8:
            return alpha, beta, gamma, delta, float(x1), float(x2)


def suite_f4(seed: int = 0, cases: int = 20, tol: float = 1e-7) -> SuiteResult:
    rng = _rng(seed, "f4")
    res = []
    for c in range(cases):
        alpha, beta, gamma, delta, x1, x2 = random_f4_case(rng, special=c % 4 == 3)
        series = hg.appell_f4(alpha, beta, gamma, delta, x1 * (1 - x2), x2 * (1 - x1))
        moments = hg.f4_via_moments(alpha, beta, gamma, delta, x1, x2).value
        res.append(abs(series - moments))
    origin = [hg.appell_f4(1.3, 0.7, 1.9, 1.4, 0.0, 0.0), hg.f4_via_moments(1.3, 0.7, 1.9, 1.4, 0.0, 0.0).value]
    out = _result("f4", res, tol, origin_exact=all(v == 1.0 for v in origin))
    out.passed = out.passed and out.notes["origin_exact"]
    return out


def suite_negative_moment(seed: int = 0, tol: float = 1e-9) -> SuiteResult:
    params = DirichletParams((1.0, 1.0))
    knots = KnotSet([1.0, 2.0])
    res = []
    covered = True
    for a, exact in ((1.0, math.log(2.0)), (2.0, 0.5)):
        quad = negative_moment(params, knots, [a], "quadrature")
        res.append(abs(quad.value - exact))
        mc = negative_moment(params, knots, [a], "monte-carlo", seed=seed, target_se=1e-3)
        covered = covered and abs(mc.value - exact) <= 3 * mc.error
    out = _result("negative-moment", res, tol, mc_within_3se=covered)
    out.passed = out.passed and covered
    return out


SUITES = {
    "knot-insertion": suite_knot_insertion,
    "moment-identities": suite_moment_identities,
    "watson": suite_watson,
    "euler": suite_euler,
    "constant-argument": suite_constant_argument,
    "s-function": suite_s_function,
    "lauricella": suite_lauricella,
    "lauricella-recurrence": suite_lauricella_recurrence,
    "lauricella-moment-recurrence": suite_lauricella_moment_recurrence,
    "log-convexity": suite_log_convexity,
    "genfun": suite_genfun,
    "f4": suite_f4,
    "negative-moment": suite_negative_moment,
}


def run_suites(names, seed: int = 0) -> list[SuiteResult]:
    """Run the named suites (or all, for "all") and flatten their results by name."""
    if "all" in names:
        names = list(SUITES)
    results = []
    for name in names:
        if name not in SUITES:
            raise KeyError(name)
        out = SUITES[name](seed=seed)
        results.extend(out if isinstance(out, list) else [out])
    return sorted(results, key=lambda r: r.name)
