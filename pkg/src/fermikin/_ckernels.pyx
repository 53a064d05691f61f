# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Mirrors ``_pykernels`` function by function.  The floating point operation
order of ``delta_t_array`` is identical so both backends agree bit for bit
on any platform whose libm ``sin`` matches numpy's.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, sqrt, fabs

cnp.import_array()

BACKEND = "cython"

cdef double TWO_OVER_PI = 2.0 / 3.141592653589793
cdef double TAYLOR_SWITCH = 1e-4


cdef inline long long isqrt_ll(long long n) nogil:
    cdef long long r
    if n < 0:
        return -1
    r = <long long>sqrt(<double>n)
    while r * r > n:
        r -= 1
    while (r + 1) * (r + 1) <= n:
        r += 1
    return r


cdef inline double delta_scalar(double t, double e) nogil:
    cdef double z = t * e
    cdef double s
    if fabs(z) < TAYLOR_SWITCH:
        return t * (TWO_OVER_PI * 0.25 * (1.0 - z * z / 12.0))
    s = sin(0.5 * z)
    return t * (TWO_OVER_PI * (s * s) / (z * z))


def delta_t_array(double t, e):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] src = np.ascontiguousarray(e, dtype=np.float64).ravel()
    cdef Py_ssize_t n = src.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out[i] = delta_scalar(t, src[i])
    return out.reshape(np.shape(e))


def disk_count(r2):
    cdef long long n = r2
    cdef long long x, x_max, total
    if n < 0:
        return 0
    x_max = isqrt_ll(n)
    total = 2 * x_max + 1
    with nogil:
        for x in range(1, x_max + 1):
            total += 2 * (2 * isqrt_ll(n - x * x) + 1)
    return int(total)


def annulus_count(lo2, hi2):
    if hi2 <= lo2:
        return 0
    return disk_count(hi2) - disk_count(lo2)


def plane_lune_count(k, long long c, long long p2):
    cdef long long kk[3]
    cdef int d = len(k)
    cdef int i, j = 0
    cdef long long best = 0
    for i in range(3):
        kk[i] = k[i] if i < d else 0
        if i < d and (kk[i] if kk[i] >= 0 else -kk[i]) > best:
            best = kk[i] if kk[i] >= 0 else -kk[i]
            j = i
    if best == 0:
        raise ValueError("k must be nonzero")
    cdef int a = (j + 1) % 3
    cdef int b = (j + 2) % 3
    cdef long long x_max = isqrt_ll(p2)
    cdef long long lo_a = -x_max if a < d else 0
    cdef long long hi_a = x_max if a < d else 0
    cdef long long lo_b = -x_max if b < d else 0
    cdef long long hi_b = x_max if b < d else 0
    cdef long long ya, yb, rem, rj, sq, sh, count = 0
    cdef long long kj = kk[j]
    with nogil:
        for ya in range(lo_a, hi_a + 1):
            for yb in range(lo_b, hi_b + 1):
                if ya * ya + yb * yb > p2:
                    continue
                rem = c - kk[a] * ya - kk[b] * yb
                if rem % kj != 0:
                    continue
                rj = rem / kj
                sq = ya * ya + yb * yb + rj * rj
                if sq > p2:
                    continue
                sh = (ya + kk[a]) * (ya + kk[a]) + (yb + kk[b]) * (yb + kk[b]) + (rj + kj) * (rj + kj)
                if sh > p2:
                    count += 1
    return int(count)


def lune_points(k, long long p2):
    cdef int d = len(k)
    cdef long long kk[3]
    cdef int i
    for i in range(3):
        kk[i] = k[i] if i < d else 0
    cdef long long x_max = isqrt_ll(p2)
    cdef long long lo1 = -x_max if d > 1 else 0
    cdef long long hi1 = x_max if d > 1 else 0
    cdef long long lo2 = -x_max if d > 2 else 0
    cdef long long hi2 = x_max if d > 2 else 0
    cdef long long x0, x1, x2, sq, sh
    cdef Py_ssize_t count = 0, pos = 0
    for x0 in range(-x_max, x_max + 1):
        for x1 in range(lo1, hi1 + 1):
            for x2 in range(lo2, hi2 + 1):
                sq = x0 * x0 + x1 * x1 + x2 * x2
                if sq > p2:
                    continue
                sh = (x0 + kk[0]) * (x0 + kk[0]) + (x1 + kk[1]) * (x1 + kk[1]) + (x2 + kk[2]) * (x2 + kk[2])
                if sh > p2:
                    count += 1
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out = np.empty((count, 3), dtype=np.int64)
    for x0 in range(-x_max, x_max + 1):
        for x1 in range(lo1, hi1 + 1):
            for x2 in range(lo2, hi2 + 1):
                sq = x0 * x0 + x1 * x1 + x2 * x2
                if sq > p2:
                    continue
                sh = (x0 + kk[0]) * (x0 + kk[0]) + (x1 + kk[1]) * (x1 + kk[1]) + (x2 + kk[2]) * (x2 + kk[2])
                if sh > p2:
                    out[pos, 0] = x0
                    out[pos, 1] = x1
                    out[pos, 2] = x2
                    pos += 1
    return out[:, :d].copy()
