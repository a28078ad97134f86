"""Candidate pinpointing: find the (statement, variable occurrence) pair in a
target function whose masked contextual vector best matches a seed key
variable's vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .code_model import Function, Statement, VariableOccurrence, collect_variable_occurrences
from .embedding import cosine_similarity, embed_variable_aggregated, embed_variable_masked
from .errors import AllPairsFailed, NoEligibleOccurrence


@dataclass
class PinpointResult:
    stmt: Statement
    occ: VariableOccurrence
    score: float
    seed_pair: tuple | None = None  # (rStmt id, kVar) this result answers


def eligible_occurrences(
    func: Function, fuse_dot_access: bool = True,
) -> list[tuple[Statement, VariableOccurrence]]:
    """Non-declaration occurrences of variables used at least twice."""
    occs = collect_variable_occurrences(func, fuse_dot_access)
    counts: dict[str, int] = {}
    for occ in occs:
        if not occ.is_declaration:
            counts[occ.variable_key] = counts.get(occ.variable_key, 0) + 1
    out = []
    for occ in occs:
        if occ.is_declaration or counts.get(occ.variable_key, 0) < 2:
            continue
        out.append((func.statement_by_id(occ.statement_id), occ))
    return out


def occurrence_vector(provider, stmt: Statement, occ: VariableOccurrence,
                      pinpoint_embedding: str = "mask") -> np.ndarray:
    if pinpoint_embedding == "aggregate":
        return embed_variable_aggregated(provider, stmt, occ)
    return embed_variable_masked(provider, stmt, occ)


def pinpoint_candidate(
    provider,
    seed_vector: np.ndarray,
    func: Function,
    fuse_dot_access: bool = True,
    pinpoint_embedding: str = "mask",
    vector_lookup=None,
) -> PinpointResult:
    """Best-scoring eligible pair; ties go to the lower line, then the
    earlier token span.

    ``vector_lookup(stmt, occ)`` may supply precomputed vectors; a None
    return falls back to on-the-fly embedding.
    """
    best: PinpointResult | None = None
    for stmt, occ in eligible_occurrences(func, fuse_dot_access):
        vec = vector_lookup(stmt, occ) if vector_lookup is not None else None
        if vec is None:
            vec = occurrence_vector(provider, stmt, occ, pinpoint_embedding)
        score = cosine_similarity(seed_vector, vec)
        if best is None or (-score, stmt.line, occ.token_span[0]) < (
                -best.score, best.stmt.line, best.occ.token_span[0]):
            best = PinpointResult(stmt=stmt, occ=occ, score=score)
    if best is None:
        raise NoEligibleOccurrence(func.id)
    return best


def pinpoint_all(
    provider,
    seed_pairs,  # sequence of ((rStmt, kVar), seed vector)
    func: Function,
    fuse_dot_access: bool = True,
    pinpoint_embedding: str = "mask",
    vector_lookup=None,
    diagnostics: list | None = None,
) -> list[PinpointResult]:
    """One pinpoint per seed pair; pairs without eligible occurrences are
    skipped with a diagnostic.
    """
    results: list[PinpointResult] = []
    for (r_stmt, k_var), seed_vec in seed_pairs:
        try:
            res = pinpoint_candidate(
                provider, seed_vec, func, fuse_dot_access,
                pinpoint_embedding, vector_lookup)
        except NoEligibleOccurrence:
            if diagnostics is not None:
                diagnostics.append({
                    "file": func.file_origin,
                    "line": func.start_line,
                    "severity": "warning",
                    "message": f"no eligible occurrence in {func.name} for "
                               f"seed pair ({r_stmt.id}, {k_var})",
                })
            continue
        res.seed_pair = (r_stmt.id, k_var)
        results.append(res)
    if not results:
        raise AllPairsFailed(func.id)
    return results
