"""Exact geometry of the Gosset lattice E8.

Vectors are tuples of 8 :class:`~fractions.Fraction` so that decoding near
Voronoi boundaries is exact.  :func:`cvp_e8_batch` is the vectorised decoder
used by the codec; it works on integer numerators over a common denominator.
"""
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import NamedTuple, Sequence

import numpy as np

from . import _backend

HALF = Fraction(1, 2)

#: Basis of E8 (rows), as used by the key encoder.
GENERATOR = (
    (2, 0, 0, 0, 0, 0, 0, 0),
    (-1, 1, 0, 0, 0, 0, 0, 0),
    (0, -1, 1, 0, 0, 0, 0, 0),
    (0, 0, -1, 1, 0, 0, 0, 0),
    (0, 0, 0, -1, 1, 0, 0, 0),
    (0, 0, 0, 0, -1, 1, 0, 0),
    (0, 0, 0, 0, 0, -1, 1, 0),
    (HALF,) * 8,
)


def _vec8(x: Sequence) -> tuple:
    if len(x) != 8:
        raise ValueError(f"expected 8 coordinates, got {len(x)}")
    return tuple(Fraction(c) for c in x)


def _sign(v) -> int:
    return 1 if v >= 0 else -1


def _round_coord(c: Fraction) -> int:
    a = abs(c)
    r = int(a)  # floor for a >= 0
    if a - r > HALF:
        r += 1
    return r if c >= 0 else -r


def round_half_to_zero(x: Sequence) -> tuple:
    """Componentwise nearest integer; exact halves go toward zero."""
    return tuple(_round_coord(c) for c in _vec8(x))


def round_worst_wrong(x: Sequence) -> tuple:
    """Like :func:`round_half_to_zero`, but the coordinate farthest from an
    integer (lowest index on ties) is rounded the other way."""
    x = _vec8(x)
    f = [_round_coord(c) for c in x]
    dist = [abs(c - r) for c, r in zip(x, f)]
    i0 = dist.index(max(dist))
    c = x[i0]
    f[i0] += _sign(c) * _sign(abs(c) - abs(f[i0]))
    return tuple(f)


def _d8_closest(x: tuple) -> tuple:
    f = round_half_to_zero(x)
    g = round_worst_wrong(x)
    return f if sum(f) % 2 == 0 else g


def _sqdist(x, y) -> Fraction:
    return sum((a - b) ** 2 for a, b in zip(x, y))


def cvp_e8(x: Sequence) -> tuple:
    """Closest point of E8 to ``x``.

    Decodes ``x`` in D8 and ``x - 1/2`` in D8 (shifting back by 1/2), then
    keeps the nearer candidate; on an exact tie the integer candidate wins.
    """
    x = _vec8(x)
    y = tuple(Fraction(v) for v in _d8_closest(x))
    yh = tuple(v + HALF for v in _d8_closest(tuple(c - HALF for c in x)))
    return yh if _sqdist(x, yh) < _sqdist(x, y) else y


def cvp_e8_batch(num, den: int, backend=None) -> np.ndarray:
    """Closest E8 points to the rows of ``num / den``.

    ``num`` is an integer array of shape ``(m, 8)``.  The result holds the
    coordinates of each closest point multiplied by 2 (so it is integral).
    """
    kernels = _backend.get(backend)
    num = np.ascontiguousarray(np.asarray(num, dtype=np.int64).reshape(-1, 8))
    return kernels.cvp_e8_batch(num, int(den))


def is_e8_point(x: Sequence) -> bool:
    """True iff ``x`` lies in E8 (all-integer or all-half-odd coordinates, even sum)."""
    try:
        x = _vec8(x)
    except (TypeError, ValueError):
        return False
    doubled = [2 * c for c in x]
    if any(d.denominator != 1 for d in doubled):
        return False
    parities = {int(d) % 2 for d in doubled}
    if len(parities) != 1:
        return False
    total = sum(x)
    return total.denominator == 1 and int(total) % 2 == 0


class RelevantVectorSet(NamedTuple):
    vr1: list
    vr2: list

    def all(self) -> list:
        return self.vr1 + self.vr2


@lru_cache(maxsize=None)
def _relevant() -> RelevantVectorSet:
    vr1 = []
    for i, j in combinations(range(8), 2):
        for si, sj in product((1, -1), repeat=2):
            v = [Fraction(0)] * 8
            v[i], v[j] = Fraction(si), Fraction(sj)
            vr1.append(tuple(v))
    vr2 = [
        tuple(HALF * s for s in signs)
        for signs in product((1, -1), repeat=8)
        if signs.count(-1) % 2 == 0
    ]
    return RelevantVectorSet(vr1, vr2)


def relevant_vectors() -> RelevantVectorSet:
    """The 240 Voronoi-relevant vectors of E8: 112 of shape (+-1^2, 0^6) and
    128 of shape (+-1/2)^8 with an even number of minus signs."""
    rv = _relevant()
    return RelevantVectorSet(list(rv.vr1), list(rv.vr2))
