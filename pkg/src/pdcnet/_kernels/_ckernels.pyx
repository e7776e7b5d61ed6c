# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Must stay bit-for-bit identical to _pykernels.py."""

import numpy as np
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef object PY_M64 = 0xFFFFFFFFFFFFFFFF


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


def mix64(z):
    return _mix64(<uint64_t>(z & PY_M64))


def hash_ints(values, seed):
    cdef Py_ssize_t n = len(values)
    cdef uint64_t h = _mix64(<uint64_t>(seed & PY_M64) + GOLDEN * <uint64_t>(n + 1))
    cdef uint64_t x
    for v in values:
        x = <uint64_t>(v & PY_M64)
        h = _mix64((h ^ x) + GOLDEN)
    return h


def splitmix64_next(state):
    cdef uint64_t st = <uint64_t>(state & PY_M64)
    st += GOLDEN
    return st, _mix64(st)


cdef inline uint64_t _xnext(uint64_t* s) nogil:
    cdef uint64_t result = _rotl(s[1] * 5, 7) * 9
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


def xoshiro_next(list s):
    cdef uint64_t st[4]
    cdef int k
    for k in range(4):
        st[k] = <uint64_t>s[k]
    r = _xnext(st)
    for k in range(4):
        s[k] = st[k]
    return r


def xoshiro_fill_uniform(list s, Py_ssize_t n):
    cdef uint64_t st[4]
    cdef int k
    cdef Py_ssize_t i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] view = out
    for k in range(4):
        st[k] = <uint64_t>s[k]
    with nogil:
        for i in range(n):
            view[i] = <double>(_xnext(st) >> 11) * (1.0 / 9007199254740992.0)
    for k in range(4):
        s[k] = st[k]
    return out


def nw_score(str a, str b, long match=1, long mismatch=0, long gap=0):
    cdef Py_ssize_t n = len(a), m = len(b), i, j
    cdef long diag, up, left, best
    cdef long* prev = <long*>malloc((m + 1) * sizeof(long))
    cdef long* cur = <long*>malloc((m + 1) * sizeof(long))
    cdef long* tmp
    cdef Py_UCS4 ai
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()
    try:
        for j in range(m + 1):
            prev[j] = j * gap
        for i in range(1, n + 1):
            cur[0] = i * gap
            ai = a[i - 1]
            for j in range(1, m + 1):
                diag = prev[j - 1] + (match if ai == b[j - 1] else mismatch)
                up = prev[j] + gap
                left = cur[j - 1] + gap
                best = diag
                if up > best:
                    best = up
                if left > best:
                    best = left
                cur[j] = best
            tmp = prev
            prev = cur
            cur = tmp
        return prev[m]
    finally:
        free(prev)
        free(cur)
