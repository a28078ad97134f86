"""Embedding providers and the vector operations built on them: masked
variable embeddings, token-aggregation embeddings, sequence pooling and
cosine similarity.
"""

from __future__ import annotations

import time

import numpy as np

from . import kernels
from .code_model import Statement, VariableOccurrence
from .errors import (
    DimMismatch,
    EmptyInput,
    ProviderUnavailable,
    SpanMismatch,
    ZeroVector,
)

DEFAULT_MASK_TOKEN = "[MASK]"
DEFAULT_MAX_TOKENS = 1024


class ReferenceEmbedder:
    """Deterministic built-in provider.

    Every token vector blends a token-identity stream, a decay-weighted
    window of neighbour identities (radius 4) and a positional stream, so
    the same token in different contexts gets a different but related
    vector.  That context sensitivity is what makes masked variable vectors
    comparable across functions.
    """

    name = "reference-embedder"
    version = "1.0"

    def __init__(self, dim: int = kernels.DEFAULT_DIM,
                 max_tokens: int = DEFAULT_MAX_TOKENS,
                 seed: int = kernels.DEFAULT_SEED):
        self.dim = dim
        self.max_tokens = max_tokens
        self.mask_token = DEFAULT_MASK_TOKEN
        self.seed = seed
        self._hash_cache: dict[str, int] = {}

    def _hash(self, token: str) -> int:
        h = self._hash_cache.get(token)
        if h is None:
            h = kernels.fnv1a64(token)
            self._hash_cache[token] = h
        return h

    def encode(self, tokens: list[str],
               mask_positions: list[int] | None = None) -> np.ndarray:
        if not tokens:
            raise EmptyInput("cannot encode an empty token sequence")
        toks = list(tokens[: self.max_tokens])
        if mask_positions:
            for p in mask_positions:
                if not 0 <= p < len(toks):
                    raise SpanMismatch(f"mask position {p} out of range")
                toks[p] = self.mask_token
        hashes = np.array([self._hash(t) for t in toks], dtype=np.uint64)
        return kernels.encode_hashes(hashes, self.seed, self.dim)


class RemoteProvider:
    """HTTP provider speaking the shared /encode + /info wire protocol."""

    RETRIES = 3
    BACKOFF = 0.5  # seconds, doubled per retry

    def __init__(self, base_url: str, timeout: float = 30.0):
        import requests

        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()
        info = self._request("GET", "/info")
        self.name = info["name"]
        self.version = info["version"]
        self.dim = int(info["dim"])
        self.max_tokens = int(info["max_tokens"])
        self.mask_token = info["mask_token"]

    def _request(self, method: str, path: str, payload: dict | None = None) -> dict:
        import requests

        url = self.base_url + path
        delay = self.BACKOFF
        last_err: Exception | None = None
        for attempt in range(self.RETRIES):
            try:
                resp = self._session.request(
                    method, url, json=payload, timeout=self.timeout)
                resp.raise_for_status()
                return resp.json()
            except requests.RequestException as exc:
                last_err = exc
                if attempt < self.RETRIES - 1:
                    time.sleep(delay)
                    delay *= 2
        raise ProviderUnavailable(f"{method} {url} failed: {last_err}")

    def encode(self, tokens: list[str],
               mask_positions: list[int] | None = None) -> np.ndarray:
        if not tokens:
            raise EmptyInput("cannot encode an empty token sequence")
        payload: dict = {"tokens": list(tokens)}
        if mask_positions:
            payload["mask_positions"] = list(mask_positions)
        body = self._request("POST", "/encode", payload)
        vectors = np.asarray(body["vectors"], dtype=np.float32)
        if vectors.ndim != 2 or vectors.shape[1] != self.dim:
            raise DimMismatch(
                f"service returned shape {vectors.shape}, expected (*, {self.dim})")
        return vectors


def encode(provider, tokens: list[str]) -> np.ndarray:
    """Per-token vectors, truncated to the provider's token limit."""
    if not tokens:
        raise EmptyInput("cannot encode an empty token sequence")
    return provider.encode(list(tokens[: provider.max_tokens]))


def sequence_embedding(provider, tokens: list[str]) -> np.ndarray:
    """Mean-pooled vector of a (possibly truncated) token sequence."""
    vectors = encode(provider, tokens)
    return vectors.mean(axis=0, dtype=np.float64).astype(np.float32)


def _check_occurrence(stmt: Statement, occ: VariableOccurrence):
    if occ.statement_id != stmt.id:
        raise SpanMismatch(
            f"occurrence {occ.variable_key!r} belongs to {occ.statement_id}, "
            f"not {stmt.id}")
    lo, hi = occ.token_span
    if not (0 <= lo <= hi < len(stmt.tokens)):
        raise SpanMismatch(
            f"span {occ.token_span} outside statement of {len(stmt.tokens)} tokens")


def mask_occurrence(stmt: Statement, occ: VariableOccurrence,
                    mask_token: str = DEFAULT_MASK_TOKEN) -> tuple[list[str], int]:
    """Statement tokens with the occurrence replaced by one mask token.

    Returns the new token list and the mask's position in it.
    """
    _check_occurrence(stmt, occ)
    lo, hi = occ.token_span
    tokens = stmt.tokens[:lo] + [mask_token] + stmt.tokens[hi + 1 :]
    return tokens, lo


def embed_variable_masked(provider, stmt: Statement, occ: VariableOccurrence,
                          mask_context: str = "statement") -> np.ndarray:
    """Contextual vector at the mask position substituted for the occurrence."""
    if mask_context == "function" and stmt.function is not None:
        tokens, pos = _mask_in_function(stmt, occ, provider.mask_token)
    else:
        tokens, pos = mask_occurrence(stmt, occ, provider.mask_token)
    if pos >= provider.max_tokens:
        raise SpanMismatch(
            f"mask position {pos} beyond the provider token limit")
    vectors = provider.encode(tokens[: provider.max_tokens],
                              mask_positions=[pos])
    return np.asarray(vectors[pos], dtype=np.float32)


def _mask_in_function(stmt: Statement, occ: VariableOccurrence, mask_token: str):
    """Whole-function token context with one occurrence masked."""
    _check_occurrence(stmt, occ)
    tokens: list[str] = []
    pos = -1
    for s in stmt.function.statements:
        if s.id == stmt.id:
            masked, off = mask_occurrence(s, occ, mask_token)
            pos = len(tokens) + off
            tokens.extend(masked)
        else:
            tokens.extend(s.tokens)
    return tokens, pos


def embed_variable_aggregated(provider, stmt: Statement,
                              occ: VariableOccurrence) -> np.ndarray:
    """Componentwise sum of the occurrence's token vectors in context."""
    _check_occurrence(stmt, occ)
    lo, hi = occ.token_span
    if hi >= provider.max_tokens:
        raise SpanMismatch(
            f"span {occ.token_span} beyond the provider token limit")
    vectors = encode(provider, stmt.tokens)
    return vectors[lo : hi + 1].sum(axis=0, dtype=np.float64).astype(np.float32)


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimMismatch(f"{u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine similarity of a zero vector is undefined")
    return float(np.dot(u, v) / (nu * nv))
