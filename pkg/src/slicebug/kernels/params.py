"""Shared constants for the reference-embedder kernels.

Both backends (Cython and numpy) must use exactly these values and the same
operation order so their float32 outputs are bit-identical.
"""

MASK64 = (1 << 64) - 1

PHI = 0x9E3779B97F4A7C15          # splitmix64 increment / component salt
ID_SALT = 0xA24BAED4963EE407      # token-identity stream
POS_SALT = 0x9FB21C651E98DF25     # positional stream
POS_MULT = 0xD6E8FEB86659FD93

DEFAULT_SEED = 0x5EEDB06
DEFAULT_DIM = 768
CONTEXT_RADIUS = 4

# blend weights; sum to 1.0 so every component stays in [-1, 1]
W_ID = 0.40
W_CTX = 0.45
W_POS = 0.15


def fnv1a64(text: str) -> int:
    """FNV-1a hash of the token text, used as the kernel input key."""
    h = 0xCBF29CE484222325
    for b in text.encode("utf-8"):
        h ^= b
        h = (h * 0x100000001B3) & MASK64
    return h
