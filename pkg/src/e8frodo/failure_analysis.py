"""Upper bounds on the decryption failure probability.

Distributions are dense arrays over a contiguous integer range.  Two
arithmetic modes exist:

* ``exact=True`` stores :class:`~fractions.Fraction` masses (small toy inputs);
* otherwise masses are binary64 upper bounds.  Convolutions round upward
  (compiled kernel) or are inflated by a rigorous relative error factor
  (numpy fallback); masses below ``cutoff`` are moved into
  ``truncated_mass``, which is charged to every tail bound.

Every tail returned in upper-bound mode is therefore >= the true probability
of the distribution described by the input table.
"""
from dataclasses import dataclass, field, replace
from fractions import Fraction
import math

import mpmath
import numpy as np
from scipy.optimize import minimize_scalar

from . import _backend
from .e8_lattice import relevant_vectors
from .noise import TOTAL, ChiTable, build_chi
from .params import ParamSet

CUTOFF = 2.0**-400
DIRECT_LIMIT = 1 << 32  # len(a) * len(b) above this switches to FFT
MAX_SUPPORT = 1 << 26

_U = 2.0**-53


class SupportTooLarge(MemoryError):
    def __init__(self, size):
        super().__init__(f"distribution support of {size} points exceeds the limit of {MAX_SUPPORT}")
        self.size = size


def _up(x: float) -> float:
    """Round a nearest-rounded result of a few flops up to a safe upper bound."""
    return math.nextafter(x * (1.0 + 8 * _U), math.inf) if x > 0 else x


def _usum(values) -> float:
    # fsum is correctly rounded, so one more ulp-level bump covers it
    return _up(math.fsum(values))


@dataclass(frozen=True)
class Pmf:
    """Probability mass function on {offset, ..., offset + len(masses) - 1}."""

    offset: int
    masses: np.ndarray
    exact: bool = False
    truncated_mass: object = 0.0
    stats: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_dict(cls, d: dict, exact: bool = True) -> "Pmf":
        lo, hi = min(d), max(d)
        if exact:
            masses = np.array([Fraction(d.get(x, 0)) for x in range(lo, hi + 1)], dtype=object)
            return cls(lo, masses, True, Fraction(0))
        masses = np.array([float(d.get(x, 0)) for x in range(lo, hi + 1)])
        return cls(lo, masses, False, 0.0)

    @classmethod
    def from_chi(cls, t: ChiTable, exact: bool = False) -> "Pmf":
        return cls.from_dict({i: Fraction(t.numerator(i), TOTAL) for i in range(-t.s, t.s + 1)}, exact)

    @property
    def hi(self) -> int:
        return self.offset + len(self.masses) - 1

    def __len__(self):
        return len(self.masses)

    def mass(self, x: int):
        i = x - self.offset
        if 0 <= i < len(self.masses):
            return self.masses[i]
        return Fraction(0) if self.exact else 0.0

    def total(self):
        if self.exact:
            return sum(self.masses, Fraction(0))
        return _usum(self.masses)

    def as_dict(self) -> dict:
        return {self.offset + i: m for i, m in enumerate(self.masses) if m}

    def mean(self) -> float:
        x = np.arange(self.offset, self.hi + 1, dtype=np.float64)
        return float(np.dot(x, self.masses.astype(np.float64)))

    def variance(self) -> float:
        x = np.arange(self.offset, self.hi + 1, dtype=np.float64)
        m = self.masses.astype(np.float64)
        mu = float(np.dot(x, m))
        return float(np.dot((x - mu) ** 2, m))

    def is_symmetric(self, rtol: float = 1e-9) -> bool:
        if self.offset != -self.hi:
            return False
        if self.exact:
            return all(self.masses == self.masses[::-1])
        return bool(np.allclose(self.masses, self.masses[::-1], rtol=rtol, atol=0.0))

    def is_unimodal(self, rtol: float = 1e-9) -> bool:
        """Non-decreasing up to the largest mass and non-increasing after it."""
        m = self.masses if self.exact else self.masses.astype(np.float64)
        k = int(np.argmax(m))
        left, right = m[: k + 1], m[k:]
        if self.exact:
            return all(a <= b for a, b in zip(left, left[1:])) and all(
                a >= b for a, b in zip(right, right[1:])
            )
        slack = 1.0 + rtol
        return bool(np.all(left[:-1] <= left[1:] * slack) and np.all(right[1:] <= right[:-1] * slack))


def _trim(p: Pmf, cutoff: float) -> Pmf:
    m = p.masses
    if p.exact:
        nz = [i for i, v in enumerate(m) if v != 0]
        if not nz:
            return replace(p, offset=0, masses=np.array([Fraction(0)], dtype=object))
        return replace(p, offset=p.offset + nz[0], masses=m[nz[0] : nz[-1] + 1])
    small = m < cutoff
    dropped = 0.0
    if small.any():
        dropped = _usum(m[small])
        m = np.where(small, 0.0, m)
    nz = np.flatnonzero(m)
    if nz.size == 0:
        return Pmf(0, np.zeros(1), False, _up(p.truncated_mass + dropped))
    return Pmf(p.offset + int(nz[0]), m[nz[0] : nz[-1] + 1].copy(), False, _up(p.truncated_mass + dropped))


def _fft_convolve_up(a: np.ndarray, b: np.ndarray):
    """FFT convolution plus a uniform a-priori error bound.

    The norm-wise forward error of radix-2 FFT convolution is
    O(log2(N) u (|a|_1 |b|_2 + |a|_2 |b|_1)); the constant below carries a
    safety factor of about 3 over the textbook estimate.
    """
    n = a.size + b.size - 1
    N = 1 << (n - 1).bit_length()
    c = np.fft.irfft(np.fft.rfft(a, N) * np.fft.rfft(b, N), N)[:n]
    a1, b1 = _usum(a), _usum(b)
    a2, b2 = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    err = _up(16 * (math.log2(N) + 2) * _U * (a1 * b2 + a2 * b1 + a1 * b1))
    return np.maximum(c, 0.0) + err, err


def convolve(p: Pmf, r: Pmf, cutoff: float = CUTOFF, backend=None) -> Pmf:
    """Distribution of X + Y for independent X ~ p, Y ~ r."""
    if p.exact != r.exact:
        raise TypeError("cannot mix exact and upper-bound distributions")
    size = len(p) + len(r) - 1
    if size > MAX_SUPPORT:
        raise SupportTooLarge(size)
    offset = p.offset + r.offset
    if p.exact:
        masses = np.convolve(p.masses, r.masses)
        tp, tr = p.truncated_mass, r.truncated_mass
        trunc = tp * r.total() + tr * p.total() + tp * tr
        return _trim(Pmf(offset, masses, True, trunc), cutoff)
    tp, tr = p.truncated_mass, r.truncated_mass
    trunc = _usum([tp * r.total(), tr * p.total(), tp * tr]) if (tp or tr) else 0.0
    if len(p) * len(r) <= DIRECT_LIMIT:
        masses = _backend.get(backend).convolve_up(p.masses, r.masses)
        return _trim(Pmf(offset, masses, False, trunc), cutoff)
    masses, err = _fft_convolve_up(p.masses, r.masses)
    return _trim(Pmf(offset, masses, False, trunc), max(cutoff, 1024 * err))


def product_dist(t: ChiTable, exact: bool = False) -> Pmf:
    """Distribution of X * Y for independent X, Y ~ chi."""
    s = t.s
    x = np.arange(-s, s + 1)
    num = np.asarray(t.pmf16, dtype=np.int64)
    prod = np.multiply.outer(x, x).ravel()
    weight = np.multiply.outer(num, num).ravel()  # units of 2^-32
    counts = np.zeros(2 * s * s + 1, dtype=np.int64)
    np.add.at(counts, prod + s * s, weight)
    if exact:
        masses = np.array([Fraction(int(c), TOTAL * TOTAL) for c in counts], dtype=object)
        p = Pmf(-s * s, masses, True, Fraction(0))
    else:
        # integers below 2^33 scaled by a power of two: exact in binary64
        p = Pmf(-s * s, counts.astype(np.float64) / float(TOTAL * TOTAL), False, 0.0)
    return _trim(p, 0.0)


def self_convolve(p: Pmf, m: int, cutoff: float = CUTOFF, backend=None) -> Pmf:
    """Sum of ``m`` independent copies, by binary powering."""
    if m < 1:
        raise ValueError("m must be >= 1")
    result = None
    base = p
    while True:
        if m & 1:
            result = base if result is None else convolve(result, base, cutoff, backend)
        m >>= 1
        if not m:
            return result
        base = convolve(base, base, cutoff, backend)


def chi_prime(t: ChiTable, n: int, exact: bool = False, cutoff: float = CUTOFF, backend=None) -> Pmf:
    """Distribution of one entry of S'E - E'S + E'': 2n products plus one chi sample."""
    prod = product_dist(t, exact)
    s = self_convolve(prod, 2 * n, cutoff, backend)
    return convolve(s, Pmf.from_chi(t, exact), cutoff, backend)


def tail(p: Pmf, T) -> object:
    """Upper bound on P[X >= T] (truncated mass included), capped at 1."""
    i = max(int(math.ceil(T)) - p.offset, 0) if T != -math.inf else 0
    if p.exact:
        v = sum(p.masses[i:], Fraction(0)) + p.truncated_mass
        return min(v, Fraction(1))
    v = _up(_usum(p.masses[i:]) + p.truncated_mass) if i < len(p) else p.truncated_mass
    return min(v, 1.0)


def _cell_starts(size: int, cells: int) -> np.ndarray:
    cells = max(1, min(cells, size))
    return (np.arange(cells, dtype=np.int64) * size) // cells


def tail_sum_two(p: Pmf, T: int, grid_cells: int = 4096, backend=None):
    """Upper bound on P[X + X' >= T] for independent X, X' ~ p.

    The support is split into ``grid_cells`` contiguous cells.  On a cell
    [a, b] the survival function P[X' >= T - x] is largest at x = b, so
    each cell contributes at most P[X in cell] * P[X' >= T - b].  Cell
    boundaries are nested under doubling, so the bound never increases when
    the grid is refined by a factor of 2.
    """
    size = len(p)
    starts = _cell_starts(size, grid_cells)
    ends = np.append(starts[1:], size) - 1
    trunc = p.truncated_mass
    if p.exact:
        suffix = [Fraction(0)] * (size + 1)
        for i in range(size - 1, -1, -1):
            suffix[i] = suffix[i + 1] + p.masses[i]
        total = Fraction(0)
        for a, b in zip(starts, ends):
            j = min(max(T - (p.offset + int(b)) - p.offset, 0), size)
            cell = suffix[a] - suffix[b + 1]
            total += cell * (suffix[j] + trunc)
        return min(total + trunc, Fraction(1))
    k = _backend.get(backend)
    suffix = k.suffix_sums_up(np.ascontiguousarray(p.masses))
    cell = k.segment_sums_up(np.ascontiguousarray(p.masses), starts)
    j = np.clip(T - (p.offset + ends) - p.offset, 0, size)
    surv = suffix[j] + trunc
    surv = np.nextafter(surv, np.inf) if trunc else surv
    total = _usum(cell * surv)
    return min(_up(total + trunc), 1.0)


def exact_sum_two_tail(p: Pmf, T: int):
    """P[X + X' >= T] from the full self-convolution (reference for tests)."""
    return tail(convolve(p, p, cutoff=0.0), T)


@dataclass
class FailureBound:
    params: ParamSet
    beta: int
    term_v1: float  # 8 * |VR1| * P[X1 + X2 >= beta]
    term_v2: float  # 8 * |VR2| * P[X1 + ... + X8 >= 2 beta]
    grid_cells: int
    chi_prime: Pmf = field(repr=False)
    unimodal: bool = True

    @property
    def total(self) -> float:
        return _up(self.term_v1 + self.term_v2)

    @property
    def log2(self) -> float:
        return math.log2(self.total) if self.total > 0 else -math.inf


def failure_bound(
    p: ParamSet,
    chi: ChiTable = None,
    grid_cells: int = 4096,
    refine: bool = True,
    cutoff: float = CUTOFF,
    backend=None,
) -> FailureBound:
    """Both union-bound terms for the E8 decoder (see :func:`pe_bound`)."""
    chi = chi if chi is not None else build_chi(p.sigma)
    rv = relevant_vectors()
    n1, n2 = len(rv.vr1), len(rv.vr2)
    cp = chi_prime(chi, p.n, cutoff=cutoff, backend=backend)
    cp2 = convolve(cp, cp, cutoff, backend)
    cp4 = convolve(cp2, cp2, cutoff, backend)
    term1 = _up(8 * n1 * tail(cp2, p.beta))
    cells = grid_cells
    t2 = tail_sum_two(cp4, 2 * p.beta, cells, backend)
    while refine and cells < len(cp4):
        finer = tail_sum_two(cp4, 2 * p.beta, 2 * cells, backend)
        cells *= 2
        done = t2 == 0 or finer == 0 or abs(math.log2(finer) - math.log2(t2)) < 0.01 * abs(math.log2(t2))
        t2 = finer
        if done:
            break
    term2 = _up(8 * n2 * t2)
    unimodal = all(d.is_unimodal() for d in (cp, cp2, cp4))
    return FailureBound(p, p.beta, term1, term2, cells, cp, unimodal)


def pe_bound(p: ParamSet, chi: ChiTable = None, grid_cells: int = 4096, **kw) -> float:
    """Union bound on the E8 decoding failure probability:

    8 * 112 * P[E00 + E11 >= beta] + 8 * 128 * P[E00 + ... + E77 >= 2 beta].
    """
    return failure_bound(p, chi, grid_cells, **kw).total


def cubic_pe_bound(p: ParamSet, chi: ChiTable = None, cutoff: float = CUTOFF, backend=None) -> float:
    """Failure bound of the original per-entry decoder extracting B bits per entry."""
    chi = chi if chi is not None else build_chi(p.sigma)
    cp = chi_prime(chi, p.n, cutoff=cutoff, backend=backend)
    return _up(64 * 2 * tail(cp, p.q >> (p.B + 1)))


def samples_per_run(n: int) -> int:
    """Number of chi samples drawn for E, S, E', S' and E''."""
    return 2 * n * (8 + 8) + 64


def cca_advantage_bound(q_ro, ell, pe, adv_cpa, n, div, alpha):
    """IND-CCA advantage bound after replacing Psi_sigma by chi.

    q_ro / 2^l + ((2 q_ro + 1) / 2^l + q_ro Pe + 3 Adv_cpa)^(1 - 1/alpha)
                 * exp(t * D_alpha * (1 - 1/alpha)),   t = 32 n + 64.
    """
    if not alpha > 1:
        raise ValueError("alpha must be > 1")
    with mpmath.workdps(40):
        M = mpmath.mpf(2) ** ell
        q = mpmath.mpf(q_ro)
        inner = (2 * q + 1) / M + q * mpmath.mpf(pe) + 3 * mpmath.mpf(adv_cpa)
        e = 1 - (0 if alpha == math.inf else 1 / mpmath.mpf(alpha))
        t = samples_per_run(n)
        return q / M + inner**e * mpmath.exp(t * mpmath.mpf(div) * e)


def optimize_alpha(objective, lo: float = 1.0 + 1e-4, hi: float = 1e4, points: int = 200):
    """Minimise ``objective`` over the order alpha in (1, inf).

    A log-spaced grid on alpha - 1 locates the basin; a bounded scalar
    search between the neighbouring grid points refines it.
    """
    grid = 1.0 + np.logspace(math.log10(lo - 1.0), math.log10(hi - 1.0), points)
    values = [float(objective(a)) for a in grid]
    k = int(np.argmin(values))
    best_a, best_v = float(grid[k]), values[k]
    left = grid[max(k - 1, 0)]
    right = grid[min(k + 1, points - 1)]
    if right > left:
        res = minimize_scalar(lambda a: float(objective(a)), bounds=(left, right), method="bounded",
                              options={"xatol": 1e-6 * left})
        if res.success and res.fun < best_v:
            best_a, best_v = float(res.x), float(res.fun)
    return best_a, best_v
