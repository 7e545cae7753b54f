# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled ensemble kernels.

Must stay bit-compatible with ``finitewidth._fallback`` for arithmetic-only
paths (uniform init with relu/identity). Paths through libm (``tanh``,
``log``/``cos``/``sin`` in Box-Muller) may differ from numpy by an ulp.
"""

from libc.stdint cimport uint32_t, uint64_t, int64_t
from libc.math cimport tanh, log, sqrt, cos, sin

cdef double TWO_M53 = 1.0 / 9007199254740992.0
cdef double TWO_PI = 6.283185307179586

cdef uint32_t PHILOX_M0 = 0xD2511F53U
cdef uint32_t PHILOX_M1 = 0xCD9E8D57U
cdef uint32_t PHILOX_W0 = 0x9E3779B9U
cdef uint32_t PHILOX_W1 = 0xBB67AE85U


cdef inline void philox4x32_10(uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3,
                               uint32_t k0, uint32_t k1, uint32_t* out) noexcept nogil:
    cdef uint64_t p0, p1
    cdef uint32_t t0, t1, t2, t3
    cdef int r
    for r in range(10):
        p0 = <uint64_t>PHILOX_M0 * c0
        p1 = <uint64_t>PHILOX_M1 * c2
        t0 = <uint32_t>(p1 >> 32) ^ c1 ^ k0
        t1 = <uint32_t>p1
        t2 = <uint32_t>(p0 >> 32) ^ c3 ^ k1
        t3 = <uint32_t>p0
        c0 = t0
        c1 = t1
        c2 = t2
        c3 = t3
        k0 = k0 + PHILOX_W0
        k1 = k1 + PHILOX_W1
    out[0] = c0
    out[1] = c1
    out[2] = c2
    out[3] = c3


def philox_block(uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3,
                 uint32_t k0, uint32_t k1):
    """One Philox4x32-10 block; exposed for known-answer tests."""
    cdef uint32_t out[4]
    philox4x32_10(c0, c1, c2, c3, k0, k1, out)
    return (out[0], out[1], out[2], out[3])


cdef inline void weight_pair(uint64_t stream, uint32_t block, uint32_t layer,
                             uint32_t k0, uint32_t k1, int family, double scale,
                             double* w) noexcept nogil:
    cdef uint32_t r[4]
    cdef double a, b, rad, theta
    philox4x32_10(<uint32_t>stream, <uint32_t>(stream >> 32), block, layer, k0, k1, r)
    a = <double>(((<uint64_t>r[1] << 32) | r[0]) >> 11) * TWO_M53
    b = <double>(((<uint64_t>r[3] << 32) | r[2]) >> 11) * TWO_M53
    if family == 0:
        w[0] = (2.0 * a - 1.0) * scale
        w[1] = (2.0 * b - 1.0) * scale
    else:
        rad = sqrt(-2.0 * log(1.0 - a))
        theta = TWO_PI * b
        w[0] = rad * cos(theta) * scale
        w[1] = rad * sin(theta) * scale


cdef inline double activate(int act, double s) noexcept nogil:
    if act == 0:
        return s if s > 0.0 else 0.0
    if act == 1:
        return s
    return tanh(s)


def simulate(uint64_t seed, uint64_t start, double[::1] out, int width, int act,
             int fam_u, double scale_u, int fam_v, double scale_v, double x):
    """Fill ``out[j]`` with the output of network ``start + j``."""
    cdef uint32_t k0 = <uint32_t>seed
    cdef uint32_t k1 = <uint32_t>(seed >> 32)
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t j
    cdef int b, nblocks = (width + 1) // 2
    cdef uint64_t stream
    cdef double u[2]
    cdef double v[2]
    cdef double acc
    with nogil:
        for j in range(n):
            stream = start + <uint64_t>j
            acc = 0.0
            for b in range(nblocks):
                weight_pair(stream, <uint32_t>b, 0, k0, k1, fam_u, scale_u, u)
                weight_pair(stream, <uint32_t>b, 1, k0, k1, fam_v, scale_v, v)
                acc = acc + v[0] * activate(act, u[0] * x)
                if 2 * b + 1 < width:
                    acc = acc + v[1] * activate(act, u[1] * x)
            out[j] = acc


def chunk_summary(const double[::1] y, double lo, double inv_width, int64_t[::1] counts):
    """Two-pass central sums of ``y`` plus histogram binning.

    Returns ``(mean, m2, m3, m4, underflow, overflow)``; ``counts`` is
    incremented in place. Sums are strictly sequential.
    """
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t j
    cdef Py_ssize_t n_bins = counts.shape[0]
    cdef double s = 0.0, mean, d, d2, m2 = 0.0, m3 = 0.0, m4 = 0.0, t
    cdef int64_t under = 0, over = 0
    if n == 0:
        return (0.0, 0.0, 0.0, 0.0, 0, 0)
    with nogil:
        for j in range(n):
            s = s + y[j]
        mean = s / <double>n
        for j in range(n):
            d = y[j] - mean
            d2 = d * d
            m2 = m2 + d2
            m3 = m3 + d2 * d
            m4 = m4 + d2 * d2
            t = (y[j] - lo) * inv_width
            if t < 0.0:
                under += 1
            elif not (t < <double>n_bins):
                over += 1
            else:
                counts[<Py_ssize_t>t] += 1
    return (mean, m2, m3, m4, under, over)
