# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: upward-rounded convolution, batched E8 decoding, chi sampling.

Floating-point kernels switch the FPU to round-toward-+inf for their duration,
so every stored value is an upper bound on the exact result for nonnegative
inputs. The module must be built with ``-frounding-math``.
"""
import numpy as np
cimport numpy as cnp

from libc.stdint cimport int64_t, int32_t, uint32_t

cnp.import_array()


cdef extern from "<fenv.h>" nogil:
    int fesetround(int)
    int fegetround()
    int FE_UPWARD


cdef extern from *:
    """
    #include <string.h>
    #if defined(__GNUC__) && defined(__x86_64__) && !defined(__clang__)
    #define E8_CLONES __attribute__((target_clones("avx2", "default")))
    #else
    #define E8_CLONES
    #endif
    typedef double e8_v4 __attribute__((vector_size(32)));

    /* sum_j x[j] * y[j] for nonnegative inputs.  Sixteen lanes accumulate
       independently and are combined at the end; with the FPU rounding
       upward every intermediate is an upper bound, whatever the grouping. */
    E8_CLONES static double e8_dot(const double *x, const double *y, Py_ssize_t m)
    {
        e8_v4 s0 = {0, 0, 0, 0}, s1 = s0, s2 = s0, s3 = s0, u, v;
        Py_ssize_t j = 0;
        for (; j + 16 <= m; j += 16) {
            memcpy(&u, x + j, 32); memcpy(&v, y + j, 32); s0 += u * v;
            memcpy(&u, x + j + 4, 32); memcpy(&v, y + j + 4, 32); s1 += u * v;
            memcpy(&u, x + j + 8, 32); memcpy(&v, y + j + 8, 32); s2 += u * v;
            memcpy(&u, x + j + 12, 32); memcpy(&v, y + j + 12, 32); s3 += u * v;
        }
        s0 = (s0 + s1) + (s2 + s3);
        double r = (s0[0] + s0[1]) + (s0[2] + s0[3]);
        for (; j < m; j++)
            r += x[j] * y[j];
        return r;
    }
    """
    double _dot "e8_dot"(const double *x, const double *y, Py_ssize_t m) nogil


def convolve_up(const double[::1] a, const double[::1] b):
    """Direct linear convolution of two nonnegative arrays, rounded upward."""
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    if na == 0 or nb == 0:
        return np.zeros(0)
    if na < nb:
        a, b = b, a
        na, nb = nb, na
    cdef Py_ssize_t n = na + nb - 1, k, lo, hi
    out = np.zeros(n)
    br = np.ascontiguousarray(np.asarray(b)[::-1])
    cdef double[::1] c = out
    cdef const double[::1] rb = br
    cdef int old = fegetround()
    with nogil:
        fesetround(FE_UPWARD)
        for k in range(n):
            # c[k] = sum_i a[i] * b[k - i];  b[k - i] == rb[nb - 1 - k + i]
            lo = k - nb + 1
            if lo < 0:
                lo = 0
            hi = k
            if hi > na - 1:
                hi = na - 1
            c[k] = _dot(&a[lo], &rb[nb - 1 - k + lo], hi - lo + 1)
        fesetround(old)
    return out


def suffix_sums_up(const double[::1] a):
    """s[i] = sum(a[i:]) rounded upward; length len(a) + 1 with s[-1] = 0."""
    cdef Py_ssize_t n = a.shape[0], i
    out = np.zeros(n + 1)
    cdef double[::1] s = out
    cdef double acc = 0.0
    cdef int old = fegetround()
    with nogil:
        fesetround(FE_UPWARD)
        i = n - 1
        while i >= 0:
            acc = acc + a[i]
            s[i] = acc
            i -= 1
        fesetround(old)
    return out


def segment_sums_up(const double[::1] a, const int64_t[::1] starts):
    """Sums of a[starts[j]:starts[j+1]] (last segment runs to the end), rounded upward."""
    cdef Py_ssize_t n = a.shape[0], m = starts.shape[0], j, i, end
    out = np.zeros(m)
    cdef double[::1] s = out
    cdef double acc
    cdef int old = fegetround()
    with nogil:
        fesetround(FE_UPWARD)
        for j in range(m):
            end = starts[j + 1] if j + 1 < m else n
            acc = 0.0
            for i in range(starts[j], end):
                acc = acc + a[i]
            s[j] = acc
        fesetround(old)
    return out


cdef inline int64_t _rhz(int64_t num, int64_t den) nogil:
    # nearest integer to num/den, exact halves toward zero (den > 0)
    cdef int64_t a = num if num >= 0 else -num
    cdef int64_t r = (2 * a + den - 1) // (2 * den)
    return r if num >= 0 else -r


cdef inline void _d8(const int64_t *x, int64_t den, int64_t *y) nogil:
    """Closest point of D8 to x/den (integer coords), Conway-Sloane style."""
    cdef int64_t f[8]
    cdef int64_t dist, best = -1, ax, af
    cdef int i, i0 = 0, parity = 0
    for i in range(8):
        f[i] = _rhz(x[i], den)
        parity += <int>(f[i] & 1)
        dist = x[i] - f[i] * den
        if dist < 0:
            dist = -dist
        if dist > best:
            best = dist
            i0 = i
    for i in range(8):
        y[i] = f[i]
    if parity & 1:
        ax = x[i0] if x[i0] >= 0 else -x[i0]
        af = f[i0] if f[i0] >= 0 else -f[i0]
        if x[i0] >= 0:
            y[i0] = f[i0] + (1 if ax >= af * den else -1)
        else:
            y[i0] = f[i0] - (1 if ax >= af * den else -1)


def cvp_e8_batch(const int64_t[:, ::1] num, int64_t den):
    """Closest E8 points to rows of num/den; returns coordinates doubled (half units)."""
    cdef Py_ssize_t m = num.shape[0], r
    out = np.empty((m, 8), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    cdef int64_t xs[8]
    cdef int64_t y[8]
    cdef int64_t yh[8]
    cdef int64_t d0, d1, t
    cdef int i
    if den <= 0:
        raise ValueError("denominator must be positive")
    with nogil:
        for r in range(m):
            _d8(&num[r, 0], den, y)
            for i in range(8):
                xs[i] = 2 * num[r, i] - den
            _d8(xs, 2 * den, yh)
            d0 = 0
            d1 = 0
            for i in range(8):
                t = 2 * num[r, i] - 2 * y[i] * den
                d0 += t * t
                t = 2 * num[r, i] - (2 * yh[i] + 1) * den
                d1 += t * t
            if d1 < d0:
                for i in range(8):
                    o[r, i] = 2 * yh[i] + 1
            else:
                for i in range(8):
                    o[r, i] = 2 * y[i]
    return out


def sample_chi_batch(const uint32_t[::1] r, const int32_t[::1] thresholds):
    """Inversion sampling; bit 0 of r is the sign, bits 1..16 the uniform value.

    Every threshold is compared for every sample.
    """
    cdef Py_ssize_t m = r.shape[0], j, k, nt = thresholds.shape[0]
    out = np.empty(m, dtype=np.int32)
    cdef int32_t[::1] o = out
    cdef int32_t u, z, sign
    with nogil:
        for j in range(m):
            u = <int32_t>((r[j] >> 1) & 0xFFFF)
            sign = <int32_t>(r[j] & 1)
            z = 0
            for k in range(nt):
                z += <int32_t>(u > thresholds[k])
            o[j] = z * (1 - 2 * sign)
    return out
