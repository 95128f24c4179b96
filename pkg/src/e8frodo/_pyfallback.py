"""Pure numpy implementations of the kernels in ``_core.pyx``.

Floating-point results are made upper bounds a posteriori: a sum of ``m``
nonnegative products computed in binary64 is within a relative factor
``(m + 1) * u`` of the exact value, plus ``m`` times the smallest subnormal
when products can underflow.  Each output is inflated by twice the relative
term, gets the absolute term added, and is bumped one ulp up.
"""
import numpy as np

_U = 2.0**-53
_ETA = 2.0**-1074
_TINY = 2.0**-1022


def _inflate(x, terms):
    factor = 1.0 + 2.0 * (terms + 2) * _U
    return np.nextafter(x * factor, np.inf)


def convolve_up(a, b):
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        return np.zeros(0)
    c = np.convolve(a, b)
    terms = min(a.size, b.size)
    out = _inflate(c, terms)
    pa, pb = a[a > 0], b[b > 0]
    if pa.size and pb.size and pa.min() * pb.min() < _TINY:
        # some products may have underflowed to zero or lost bits
        nonzero = np.convolve(a > 0, b > 0) > 0
        out = np.where(nonzero, np.nextafter(out + terms * _ETA, np.inf), 0.0)
    else:
        out[c == 0] = 0.0
    return out


def suffix_sums_up(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    s = np.zeros(a.size + 1)
    s[:-1] = np.cumsum(a[::-1])[::-1]
    out = _inflate(s, a.size)
    out[s == 0] = 0.0
    return out


def segment_sums_up(a, starts):
    a = np.ascontiguousarray(a, dtype=np.float64)
    starts = np.asarray(starts, dtype=np.int64)
    if starts.size == 0:
        return np.zeros(0)
    s = np.add.reduceat(a, starts)
    lengths = np.diff(np.append(starts, a.size))
    s[lengths == 0] = 0.0
    out = _inflate(s, int(lengths.max()))
    out[s == 0] = 0.0
    return out


def _rhz(num, den):
    a = np.abs(num)
    r = (2 * a + den - 1) // (2 * den)
    return np.where(num >= 0, r, -r)


def _d8(x, den):
    f = _rhz(x, den)
    dist = np.abs(x - f * den)
    i0 = np.argmax(dist, axis=1)  # first maximum on ties
    rows = np.arange(x.shape[0])
    xi = x[rows, i0]
    fi = f[rows, i0]
    step = np.where(np.abs(xi) >= np.abs(fi) * den, 1, -1)
    step = np.where(xi >= 0, step, -step)
    odd = (f.sum(axis=1) & 1).astype(bool)
    y = f.copy()
    y[rows[odd], i0[odd]] += step[odd]
    return y


def cvp_e8_batch(num, den):
    num = np.ascontiguousarray(num, dtype=np.int64).reshape(-1, 8)
    den = int(den)
    if den <= 0:
        raise ValueError("denominator must be positive")
    y = _d8(num, den)
    yh = _d8(2 * num - den, 2 * den)
    d0 = ((2 * num - 2 * y * den) ** 2).sum(axis=1)
    d1 = ((2 * num - (2 * yh + 1) * den) ** 2).sum(axis=1)
    return np.where((d1 < d0)[:, None], 2 * yh + 1, 2 * y)


def sample_chi_batch(r, thresholds, chunk=1 << 16):
    r = np.asarray(r, dtype=np.uint32)
    thresholds = np.asarray(thresholds, dtype=np.int32)
    out = np.empty(r.size, dtype=np.int32)
    for lo in range(0, r.size, chunk):
        part = r[lo:lo + chunk]
        u = ((part >> 1) & 0xFFFF).astype(np.int32)
        sign = (part & 1).astype(np.int32)
        z = (u[:, None] > thresholds[None, :]).sum(axis=1, dtype=np.int32)
        out[lo:lo + chunk] = z * (1 - 2 * sign)
    return out
