# cython: language_level=3
"""Compiled path-scanning kernels.

Mirrors ``_kernels_py`` operation for operation (see ``novikov.rng`` for the
stream recipe). Loops run without the GIL so chunked thread pools overlap.
"""

import numpy as np

from libc.math cimport frexp
from libc.stdint cimport int64_t, uint64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t TOP52 = 0xFFFFFFFFFFFFFULL
cdef double INV_2_52 = 1.0 / 4503599627370496.0

cdef double LN2_HI = 6.93147180369123816490e-01
cdef double LN2_LO = 1.90821492927058770002e-10
cdef double LG1 = 6.666666666666735130e-01
cdef double LG2 = 3.999999999940941908e-01
cdef double LG3 = 2.857142874366239149e-01
cdef double LG4 = 2.222219843214978396e-01
cdef double LG5 = 1.818357216161805012e-01
cdef double LG6 = 1.531383769920937332e-01
cdef double LG7 = 1.479819860511658591e-01
cdef double SQRT_HALF = 0.70710678118654752440


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t path_key(uint64_t stream, uint64_t index) noexcept nogil:
    return mix64(stream + (index + 1) * GOLDEN)


cdef inline double portable_log(double v) noexcept nogil:
    # operation order must match novikov.rng.portable_log exactly
    cdef int k
    cdef double mant = frexp(v, &k)
    cdef double dk, f, s, z, w, t1, t2, r, hfsq
    if mant < SQRT_HALF:
        mant = mant * 2.0
        k = k - 1
    dk = <double>k
    f = mant - 1.0
    s = f / (2.0 + f)
    z = s * s
    w = z * z
    t1 = w * (LG2 + w * (LG4 + w * LG6))
    t2 = z * (LG1 + w * (LG3 + w * (LG5 + w * LG7)))
    r = t2 + t1
    hfsq = 0.5 * f * f
    return dk * LN2_HI - ((hfsq - (s * (hfsq + r) + dk * LN2_LO)) - f)


cdef inline double expo(uint64_t key, uint64_t k) noexcept nogil:
    cdef uint64_t j = mix64(key + (k + 1) * GOLDEN) >> 12
    cdef double complement = (<double>(TOP52 - j) + 0.5) * INV_2_52
    return -portable_log(complement)


cdef uint64_t _stream(object master_seed):
    return mix64(<uint64_t>(int(master_seed) & 0xFFFFFFFFFFFFFFFF))


def interarrivals(master_seed, int64_t path_index, int64_t start, int64_t count):
    out = np.empty(count, dtype=np.float64)
    cdef double[::1] o = out
    cdef uint64_t key = path_key(_stream(master_seed), <uint64_t>path_index)
    cdef int64_t j
    with nogil:
        for j in range(count):
            o[j] = expo(key, <uint64_t>(start + j))
    return out


def jump_matrix(master_seed, int64_t first_index, int64_t count, int64_t k):
    out = np.empty((count, k), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef uint64_t stream = _stream(master_seed)
    cdef uint64_t key
    cdef int64_t i, j
    cdef double u
    with nogil:
        for i in range(count):
            key = path_key(stream, <uint64_t>(first_index + i))
            u = 0.0
            for j in range(k):
                u = u + expo(key, <uint64_t>j)
                o[i, j] = u
    return out


def scan_lower(master_seed, int64_t first_index, int64_t count, double b, int64_t max_jumps):
    passage = np.full(count, np.nan)
    jumps = np.zeros(count, dtype=np.int64)
    hit = np.zeros(count, dtype=np.uint8)
    scanned = np.full(count, max_jumps, dtype=np.int64)
    cdef double[::1] tv = passage
    cdef int64_t[::1] nv = jumps
    cdef unsigned char[::1] hv = hit
    cdef int64_t[::1] sv = scanned
    cdef uint64_t stream = _stream(master_seed)
    cdef double scale = 1.0 + b
    cdef uint64_t key
    cdef int64_t i, n
    cdef double u, barrier
    with nogil:
        for i in range(count):
            key = path_key(stream, <uint64_t>(first_index + i))
            u = 0.0
            for n in range(1, max_jumps + 1):
                u = u + expo(key, <uint64_t>(n - 1))
                barrier = <double>n / scale
                if u >= barrier:
                    tv[i] = barrier
                    nv[i] = n - 1
                    hv[i] = 1
                    sv[i] = n
                    break
    return passage, jumps, hit.view(np.bool_), scanned


def scan_upper(master_seed, int64_t first_index, int64_t count, double b, double c, int64_t max_jumps):
    passage = np.full(count, np.nan)
    jumps = np.zeros(count, dtype=np.int64)
    hit = np.zeros(count, dtype=np.uint8)
    scanned = np.full(count, max_jumps, dtype=np.int64)
    cdef double[::1] tv = passage
    cdef int64_t[::1] nv = jumps
    cdef unsigned char[::1] hv = hit
    cdef int64_t[::1] sv = scanned
    cdef uint64_t stream = _stream(master_seed)
    cdef double scale = 1.0 + b
    cdef uint64_t key
    cdef int64_t i, n
    cdef double u
    with nogil:
        for i in range(count):
            key = path_key(stream, <uint64_t>(first_index + i))
            u = 0.0
            for n in range(1, max_jumps + 1):
                u = u + expo(key, <uint64_t>(n - 1))
                if <double>n - scale * u >= c:
                    tv[i] = u
                    nv[i] = n
                    hv[i] = 1
                    sv[i] = n
                    break
    return passage, jumps, hit.view(np.bool_), scanned


def count_jumps(master_seed, int64_t first_index, int64_t count, double t, int64_t max_jumps):
    jumps = np.full(count, max_jumps, dtype=np.int64)
    censored = np.ones(count, dtype=np.uint8)
    cdef int64_t[::1] nv = jumps
    cdef unsigned char[::1] cv = censored
    cdef uint64_t stream = _stream(master_seed)
    cdef uint64_t key
    cdef int64_t i, n
    cdef double u
    with nogil:
        for i in range(count):
            key = path_key(stream, <uint64_t>(first_index + i))
            u = 0.0
            for n in range(max_jumps):
                u = u + expo(key, <uint64_t>n)
                if u > t:
                    nv[i] = n
                    cv[i] = 0
                    break
    return jumps, censored.view(np.bool_)
