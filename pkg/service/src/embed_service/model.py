"""Deterministic contextual encoder with subword pooling.

The encoder receives pre-tokenized words. Internally each word is split
into subwords, every subword gets a contextual vector, and subword vectors
are mean-pooled back so the response carries exactly one vector per input
word. A masked word maps to a single mask subword, so the vector at a mask
position is the contextual vector of the mask itself.

Inference is fully deterministic: subword base vectors are derived from a
seeded hash of the subword text, and context mixing uses fixed weights.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

_PIECE = re.compile(r"[A-Za-z]+|\d+|[^\sA-Za-z\d]")
_CHUNK = 4
_RADIUS = 2
_W_SELF = 0.55
_W_POS = 0.10


class DeterministicEncoder:
    name = "embed-service-deterministic"
    version = "1.0"

    def __init__(self, dim: int = 768, max_tokens: int = 1024,
                 mask_token: str = "[MASK]", seed: int = 0x5EED):
        self.dim = dim
        self.max_tokens = max_tokens
        self.mask_token = mask_token
        self.seed = seed
        self._base_cache: dict[str, np.ndarray] = {}

    def subwords(self, word: str) -> list[str]:
        """Split one input word into subword pieces.

        The mask token is never split; it must stay a single piece so the
        vector at a mask position reflects exactly one mask subword.
        """
        if word == self.mask_token:
            return [word]
        pieces = _PIECE.findall(word) or [word]
        out = []
        for piece in pieces:
            for i in range(0, len(piece), _CHUNK):
                out.append(piece[i:i + _CHUNK])
        return out

    def _base_vector(self, subword: str) -> np.ndarray:
        vec = self._base_cache.get(subword)
        if vec is None:
            digest = hashlib.sha256(
                f"{self.seed}:{subword}".encode()).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
            vec = rng.standard_normal(self.dim).astype(np.float64)
            vec /= np.linalg.norm(vec)
            self._base_cache[subword] = vec
        return vec

    def _position_vector(self, pos: int) -> np.ndarray:
        digest = hashlib.sha256(f"{self.seed}:pos:{pos}".encode()).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        vec = rng.standard_normal(self.dim).astype(np.float64)
        return vec / np.linalg.norm(vec)

    def encode(self, tokens: list[str],
               mask_positions: list[int] | None = None) -> np.ndarray:
        """One float32 vector per input token, truncated to max_tokens."""
        if not tokens:
            raise ValueError("tokens must be non-empty")
        words = list(tokens)
        for pos in mask_positions or []:
            if not 0 <= pos < len(words):
                raise IndexError(f"mask position {pos} out of range")
            words[pos] = self.mask_token
        words = words[: self.max_tokens]

        pieces: list[str] = []
        owner: list[int] = []
        for i, word in enumerate(words):
            for sub in self.subwords(word):
                pieces.append(sub)
                owner.append(i)

        base = np.stack([self._base_vector(p) for p in pieces])
        ctx = np.zeros_like(base)
        n = len(pieces)
        for offset in range(-_RADIUS, _RADIUS + 1):
            if offset == 0:
                continue
            weight = (1.0 - _W_SELF - _W_POS) / (2.0 * abs(offset))
            lo = max(0, -offset)
            hi = min(n, n - offset)
            if lo < hi:
                ctx[lo:hi] += weight * base[lo + offset:hi + offset]

        contextual = _W_SELF * base + ctx
        for j in range(n):
            contextual[j] += _W_POS * self._position_vector(owner[j])

        out = np.zeros((len(words), self.dim), dtype=np.float64)
        counts = np.zeros(len(words))
        for j, i in enumerate(owner):
            out[i] += contextual[j]
            counts[i] += 1
        out /= counts[:, None]
        return out.astype(np.float32)


def load_encoder(model_ref: str, dim: int, max_tokens: int):
    if model_ref == "builtin":
        return DeterministicEncoder(dim=dim, max_tokens=max_tokens)
    raise ValueError(f"unknown model reference {model_ref!r}; "
                     "this build ships the 'builtin' encoder only")
