"""Pure-numpy backend for the reference embedder's token-encoding kernel."""

from __future__ import annotations

import numpy as np

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

_U64 = np.uint64


def _splitmix64(x: np.ndarray) -> np.ndarray:
    z = (x + _U64(PHI)).astype(_U64)
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


def _expand(keys: np.ndarray, seed: int, dim: int) -> np.ndarray:
    """Expand one uint64 key per row into dim doubles in [-1, 1)."""
    comp = (_U64(PHI) * (np.arange(1, dim + 1, dtype=_U64)))
    mixed = _splitmix64(keys[:, None] ^ _U64(seed) ^ comp[None, :])
    return (mixed >> _U64(11)).astype(np.float64) * 2.0**-52 - 1.0


def encode_hashes(hashes: np.ndarray, seed: int, dim: int) -> np.ndarray:
    """Encode a sequence of token hashes into context-sensitive vectors.

    Each row blends a token-identity stream, a decay-weighted window of the
    neighbours' identity streams and a positional stream.
    """
    n = len(hashes)
    hashes = hashes.astype(_U64)
    id_mat = _expand(hashes ^ _U64(ID_SALT), seed, dim)

    pos = np.arange(n, dtype=_U64)
    pos_keys = _splitmix64((hashes ^ _U64(POS_SALT)) + pos * _U64(POS_MULT))
    pos_mat = _expand(pos_keys, seed, dim)

    num = np.zeros((n, dim), dtype=np.float64)
    den = np.zeros(n, dtype=np.float64)
    offsets = [d for d in range(-CONTEXT_RADIUS, CONTEXT_RADIUS + 1) if d != 0]
    for d in offsets:
        lam = 1.0 / (1.0 + abs(d))
        if d < 0:
            num[-d:] += lam * id_mat[:d]
            den[-d:] += lam
        else:
            num[:-d] += lam * id_mat[d:]
            den[:-d] += lam
    ctx = np.zeros((n, dim), dtype=np.float64)
    nonzero = den > 0
    ctx[nonzero] = num[nonzero] / den[nonzero, None]

    out = W_ID * id_mat + W_CTX * ctx
    out = out + W_POS * pos_mat
    return out.astype(np.float32)
