"""Multi-index arithmetic: multinomials, Appell symbols and index enumeration.

Multi-indices are plain tuples of nonnegative ints.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterator, Sequence

from .errors import InvalidArgumentError

MultiIndex = tuple[int, ...]


def as_index(entries: Sequence[int]) -> MultiIndex:
    """Validate and freeze a multi-index."""
    idx = tuple(int(e) for e in entries)
    if any(e != f for e, f in zip(idx, entries)) or any(e < 0 for e in idx):
        raise InvalidArgumentError(f"multi-index entries must be nonnegative integers: {entries!r}")
    return idx


def order(beta: Sequence[int]) -> int:
    return sum(beta)


def factorial(beta: Sequence[int]) -> int:
    return math.prod(math.factorial(b) for b in beta)


def leq(alpha: Sequence[int], beta: Sequence[int]) -> bool:
    """Componentwise alpha <= beta."""
    return all(a <= b for a, b in zip(alpha, beta, strict=True))


def unit(dim: int, i: int) -> MultiIndex:
    return tuple(1 if k == i else 0 for k in range(dim))


def add(alpha: Sequence[int], beta: Sequence[int]) -> tuple[int, ...]:
    return tuple(a + b for a, b in zip(alpha, beta, strict=True))


def sub(alpha: Sequence[int], beta: Sequence[int]) -> tuple[int, ...]:
    """Difference; entries may go negative (callers use that as a 'vanishes' flag)."""
    return tuple(a - b for a, b in zip(alpha, beta, strict=True))


def power(x: Sequence[float], beta: Sequence[int]) -> float:
    """x**beta = prod x_i**beta_i (0**0 == 1)."""
    return math.prod(xi**bi for xi, bi in zip(x, beta, strict=True) if bi)


def multinomial(r: int, beta: Sequence[int]) -> int:
    """r! / beta! in exact integer arithmetic."""
    beta = as_index(beta)
    if sum(beta) != r:
        raise InvalidArgumentError(f"|beta| = {sum(beta)} does not match r = {r}")
    result = 1
    acc = 0
    # product of binomials keeps intermediates small
    for b in beta:
        acc += b
        result *= math.comb(acc, b)
    return result


def appell_symbol(a, l):
    """Rising factorial (a, l) = a (a+1) ... (a+l-1), with (a, 0) = 1.

    If both arguments are sequences the product form prod_i (a_i, l_i) is returned.
    """
    if isinstance(l, (tuple, list)):
        return math.prod(appell_symbol(ai, li) for ai, li in zip(a, l, strict=True))
    if l < 0:
        raise InvalidArgumentError(f"Appell symbol needs l >= 0, got {l}")
    result = 1.0
    for k in range(l):
        result *= a + k
    return result


def compositions(m: int, dim: int) -> Iterator[MultiIndex]:
    """All multi-indices of length dim and order m, lexicographically ascending."""
    if dim == 1:
        yield (m,)
        return
    for first in range(m + 1):
        for rest in compositions(m - first, dim - 1):
            yield (first, *rest)


def enumerate_indices(dim: int, *, order: int | None = None,
                      upper: Sequence[int] | None = None) -> list[MultiIndex]:
    """Enumerate multi-indices in graded lexicographic order.

    Exactly one of ``order`` (all indices with |alpha| = order) or ``upper``
    (all alpha <= upper componentwise) must be given.
    """
    if dim < 1:
        raise InvalidArgumentError("dimension must be >= 1")
    if (order is None) == (upper is None):
        raise InvalidArgumentError("give exactly one of order= or upper=")
    if order is not None:
        if order < 0:
            return []
        return list(compositions(order, dim))
    upper = as_index(upper)
    if len(upper) != dim:
        raise InvalidArgumentError("upper bound has wrong dimension")
    box = itertools.product(*(range(u + 1) for u in upper))
    return sorted(box, key=lambda a: (sum(a), a))
