# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython backend for the reference embedder's token-encoding kernel.

Must stay bit-identical to the numpy backend: same constants, same operation
order, double-precision accumulation, final float32 cast.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport uint64_t

from .params import (
    CONTEXT_RADIUS,
    ID_SALT,
    PHI,
    POS_MULT,
    POS_SALT,
    W_CTX,
    W_ID,
    W_POS,
)

cdef uint64_t _PHI = <uint64_t> PHI
cdef uint64_t _ID_SALT = <uint64_t> ID_SALT
cdef uint64_t _POS_SALT = <uint64_t> POS_SALT
cdef uint64_t _POS_MULT = <uint64_t> POS_MULT
cdef int _RADIUS = CONTEXT_RADIUS
cdef double _W_ID = W_ID
cdef double _W_CTX = W_CTX
cdef double _W_POS = W_POS


cdef inline uint64_t splitmix64(uint64_t x) nogil:
    cdef uint64_t z = x + _PHI
    z = (z ^ (z >> 30)) * <uint64_t> 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t> 0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double unit(uint64_t z) nogil:
    return <double> (z >> 11) * (2.0 ** -52) - 1.0


def encode_hashes(hashes, seed, dim):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] h = np.ascontiguousarray(
        hashes, dtype=np.uint64)
    cdef Py_ssize_t n = h.shape[0]
    cdef int d = dim
    cdef uint64_t s = <uint64_t> seed
    cdef cnp.ndarray[cnp.float64_t, ndim=2] id_mat = np.empty((n, d))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out64 = np.empty((n, d))
    cdef Py_ssize_t i, j
    cdef int k, off
    cdef uint64_t key, pos_key
    cdef double lam, den, num, ctx, posv

    with nogil:
        for i in range(n):
            key = h[i] ^ _ID_SALT
            for k in range(d):
                id_mat[i, k] = unit(splitmix64(s ^ key ^ (_PHI * <uint64_t>(k + 1))))

        for i in range(n):
            pos_key = splitmix64((h[i] ^ _POS_SALT) + <uint64_t> i * _POS_MULT)
            den = 0.0
            for off in range(-_RADIUS, _RADIUS + 1):
                if off == 0:
                    continue
                j = i + off
                if 0 <= j < n:
                    den += 1.0 / (1.0 + (-off if off < 0 else off))
            for k in range(d):
                num = 0.0
                for off in range(-_RADIUS, _RADIUS + 1):
                    if off == 0:
                        continue
                    j = i + off
                    if 0 <= j < n:
                        lam = 1.0 / (1.0 + (-off if off < 0 else off))
                        num += lam * id_mat[j, k]
                ctx = num / den if den > 0.0 else 0.0
                posv = unit(splitmix64(s ^ pos_key ^ (_PHI * <uint64_t>(k + 1))))
                out64[i, k] = (_W_ID * id_mat[i, k] + _W_CTX * ctx) + _W_POS * posv

    return out64.astype(np.float32)
