"""The discretised error distribution chi and its sampler.

chi approximates the rounded Gaussian Psi_sigma with probabilities that are
multiples of 2^-16.  Normal-CDF values are evaluated with mpmath at 50 decimal
digits so that table numerators are reproducible everywhere.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math

import mpmath
import numpy as np

from . import _backend

PREC_BITS = 16
TOTAL = 1 << PREC_BITS
_DPS = 50


class InfiniteDivergence(ArithmeticError):
    """The reference distribution vanishes somewhere on the support of P."""


def _check_sigma(sigma):
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")


def rounded_gaussian_pmf(sigma, i: int) -> mpmath.mpf:
    """P[round(X) = i] for X ~ N(0, sigma^2), to about 50 significant digits."""
    _check_sigma(sigma)
    with mpmath.workdps(_DPS):
        s = mpmath.sqrt(2) * mpmath.mpf(sigma)
        a = abs(int(i))
        hi = (a + mpmath.mpf(0.5)) / s
        if a == 0:
            return +mpmath.erf(hi)
        lo = (a - mpmath.mpf(0.5)) / s
        # erfc difference keeps full relative precision far in the tail
        return (mpmath.erfc(lo) - mpmath.erfc(hi)) / 2


def _upper_tail(sigma, s: int) -> mpmath.mpf:
    # P[round(X) > s]
    with mpmath.workdps(_DPS):
        return mpmath.erfc((s + mpmath.mpf(0.5)) / (mpmath.sqrt(2) * mpmath.mpf(sigma))) / 2


def support_radius(sigma) -> int:
    """Smallest s whose one-sided rounded-Gaussian tail beyond s is below 2^-17."""
    _check_sigma(sigma)
    limit = mpmath.mpf(2) ** -(PREC_BITS + 1)
    s = 0
    while _upper_tail(sigma, s) >= limit:
        s += 1
    return s


@dataclass(frozen=True)
class ChiTable:
    """Symmetric distribution on {-s..s}; ``pmf16[i + s]`` is P(i) * 2^16."""

    sigma: float
    s: int
    pmf16: tuple

    def __post_init__(self):
        if len(self.pmf16) != 2 * self.s + 1:
            raise ValueError("pmf16 must have 2s+1 entries")
        if sum(self.pmf16) != TOTAL:
            raise ValueError(f"numerators sum to {sum(self.pmf16)}, not {TOTAL}")
        if any(v < 0 for v in self.pmf16):
            raise ValueError("negative numerator")

    @classmethod
    def point_mass(cls) -> "ChiTable":
        """The degenerate distribution that always returns 0."""
        return cls(0.0, 0, (TOTAL,))

    @property
    def cdf16(self) -> tuple:
        return tuple(int(v) for v in np.cumsum(self.pmf16))

    def numerator(self, i: int) -> int:
        return self.pmf16[i + self.s] if -self.s <= i <= self.s else 0

    def probabilities(self) -> np.ndarray:
        return np.asarray(self.pmf16, dtype=np.float64) / TOTAL

    def variance(self) -> float:
        i = np.arange(-self.s, self.s + 1)
        return float((i * i * np.asarray(self.pmf16)).sum()) / TOTAL

    def is_symmetric(self) -> bool:
        return self.pmf16 == self.pmf16[::-1]

    def is_unimodal(self) -> bool:
        half = self.pmf16[self.s:]
        return all(a >= b for a, b in zip(half, half[1:])) and self.is_symmetric()

    def thresholds(self) -> np.ndarray:
        """Comparison table for inversion sampling with a 16-bit uniform value.

        ``u <= T[0]`` gives 0 (``pmf16(0)`` values of u); magnitude z >= 1 takes
        ``2 * pmf16(z)`` values, halved again by the sign bit.
        """
        half = np.asarray(self.pmf16[self.s:], dtype=np.int64)
        if self.s == 0:
            return np.zeros(0, dtype=np.int32)
        t = half[0] - 1 + 2 * np.concatenate(([0], np.cumsum(half[1:self.s])))
        return t.astype(np.int32)

    def to_text(self) -> str:
        lines = [f"{self.sigma!r} {self.s}"]
        lines += [f"{i} {self.numerator(i)}" for i in range(-self.s, self.s + 1)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ChiTable":
        rows = [ln.split() for ln in text.strip().splitlines()]
        sigma, s = float(rows[0][0]), int(rows[0][1])
        nums = {int(a): int(b) for a, b in rows[1:]}
        return cls(sigma, s, tuple(nums.get(i, 0) for i in range(-s, s + 1)))


def _nearest(x: mpmath.mpf) -> int:
    return int(mpmath.floor(x + mpmath.mpf(0.5)))


def _fix_total(half: list, exact: list, deficit: int) -> list:
    # half[z] is the numerator of +-z, so changing half[z] (z >= 1) moves the
    # total by 2 and the centre moves it by 1.  Each unit step goes to the
    # entry that ends up closest to its exact value.
    half = list(half)
    while deficit:
        step = 1 if deficit > 0 else -1
        options = [0] if abs(deficit) == 1 else range(len(half))
        best = min(
            (z for z in options if half[z] + step >= 0),
            key=lambda z: (abs(half[z] + step - exact[z]), z),
        )
        half[best] += step
        deficit -= step if best == 0 else 2 * step
    return half


@lru_cache(maxsize=64)
def build_chi(sigma: float) -> ChiTable:
    """Round 2^16 * Psi_sigma(i) on {-s..s} and repair the total to exactly 2^16.

    The deficit is repaired one unit at a time, on the centre or on a
    symmetric pair, whichever stays nearest the unrounded value.
    """
    _check_sigma(sigma)
    s = support_radius(sigma)
    if s < 1:
        raise ValueError(f"sigma={sigma} is too small: support radius is 0")
    with mpmath.workdps(_DPS):
        exact = [rounded_gaussian_pmf(sigma, z) * TOTAL for z in range(s + 1)]
        half = [_nearest(x) for x in exact]
    deficit = TOTAL - (half[0] + 2 * sum(half[1:]))
    half = _fix_total(half, [float(x) for x in exact], deficit)
    pmf16 = tuple(half[:0:-1] + half)
    table = ChiTable(float(sigma), s, pmf16)
    if not table.is_unimodal():
        raise ArithmeticError(f"table for sigma={sigma} is not unimodal")
    return table


def sample(t: ChiTable, r: int) -> int:
    """Map 17 random bits to a sample: bit 0 is the sign, bits 1..16 the value."""
    u = (r >> 1) & 0xFFFF
    z = 0
    for thr in t.thresholds():
        z += int(u > thr)
    return -z if r & 1 else z


def sample_matrix(t: ChiTable, shape, rng: np.random.Generator, backend=None) -> np.ndarray:
    """Draw an array of chi samples using randomness from ``rng``."""
    size = int(np.prod(shape))
    r = rng.integers(0, 1 << (PREC_BITS + 1), size=size, dtype=np.uint32)
    out = _backend.get(backend).sample_chi_batch(r, t.thresholds())
    return np.asarray(out, dtype=np.int64).reshape(shape)


def _mpf(x) -> mpmath.mpf:
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def renyi_divergence(P, Q, alpha) -> mpmath.mpf:
    """Renyi divergence D_alpha(P || Q) in nats.

    ``P`` maps outcomes to probabilities; ``Q`` is a callable returning the
    reference probability of an outcome.
    """
    if not alpha > 1:
        raise ValueError("alpha must be > 1")
    with mpmath.workdps(_DPS):
        a = mpmath.mpf(alpha)
        acc = mpmath.mpf(0)
        for x, px in P.items():
            px = _mpf(px)
            if px == 0:
                continue
            qx = _mpf(Q(x))
            if qx <= 0:
                raise InfiniteDivergence(f"Q({x}) = 0 on the support of P")
            acc += px * (px / qx) ** (a - 1)
        return mpmath.log(acc) / (a - 1)


def chi_as_mapping(t: ChiTable) -> dict:
    return {i: Fraction(t.numerator(i), TOTAL) for i in range(-t.s, t.s + 1) if t.numerator(i)}


def chi_divergence(t: ChiTable, alpha) -> mpmath.mpf:
    """D_alpha(chi || Psi_sigma) for a table built from ``t.sigma``."""
    cache = {}

    def q(x):
        if x not in cache:
            cache[x] = rounded_gaussian_pmf(t.sigma, x)
        return cache[x]

    return renyi_divergence(chi_as_mapping(t), q, alpha)


def log2(x) -> float:
    return float(mpmath.log(x, 2)) if x > 0 else -math.inf
