"""Query orchestration: seed analysis to ranked report.

A query runs seed analysis on the buggy/fixed pair, slices the seed
function into the query feature slice, screens the index down to the most
similar functions, pinpoints counterpart criteria in each, slices the
candidates and ranks them by slice-vector cosine similarity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .code_model import Function, first_occurrence_of
from .embedding import cosine_similarity, embed_variable_masked, sequence_embedding
from .errors import (
    AllPairsFailed,
    CriterionMismatch,
    EmptyResult,
    IndexRequired,
    NoRootStatement,
    SeedAnalysisFailed,
)
from .index_store import Index, function_tokens, screen_top_k, slice_tokens
from .pinpoint import PinpointResult, pinpoint_all
from .seed import SeedSignature, compute_patch, identify_key_variables, screen_root_statements
from .slicer import FeatureSlice, customized_slice, merge_slices


@dataclass
class QueryConfig:
    screen_top_k: int = 1000
    report_top_n: int = 10
    strategy: str = "default"
    pinpoint_embedding: str = "mask"  # mask | aggregate
    target_slice: str = "slice"       # slice | direct-mask-mapping
    fuse_dot_access: bool = True


@dataclass
class Query:
    seed_function: Function
    seed_signature: SeedSignature
    seed_kvar_vectors: list[np.ndarray]
    query_slice: FeatureSlice
    query_slice_vector: np.ndarray
    seed_function_vector: np.ndarray


@dataclass
class RankedCandidate:
    function_id: str
    function_name: str
    file: str
    start_line: int
    pinpoints: list[PinpointResult]
    candidate_slice: FeatureSlice
    score: float
    rank: int = 0


def build_manual_signature(buggy: Function, criteria: list[tuple[int, str]],
                           fuse_dot_access: bool = True) -> SeedSignature:
    """Seed signature from explicit (line, variable) criteria."""
    pairs = []
    for line, key in criteria:
        stmts = [s for s in buggy.statements if s.line == line]
        hit = None
        for stmt in stmts:
            if first_occurrence_of(stmt, key, fuse_dot_access) is not None:
                hit = stmt
                break
        if hit is None:
            raise CriterionMismatch(
                f"no statement at line {line} contains {key!r}")
        pairs.append((hit, key))
    return SeedSignature(pairs=pairs)


def prepare_query(
    buggy: Function,
    fixed: Function,
    provider,
    config: QueryConfig | None = None,
    manual_signature: SeedSignature | None = None,
    diagnostics: list | None = None,
) -> Query:
    if config is None:
        config = QueryConfig()
    if manual_signature is not None:
        sig = manual_signature
    else:
        patch = compute_patch(buggy, fixed)
        if patch.is_empty:
            raise SeedAnalysisFailed("buggy and fixed versions are identical")
        try:
            k_vars = identify_key_variables(patch, config.fuse_dot_access)
            sig = screen_root_statements(patch, k_vars, config.fuse_dot_access,
                                         diagnostics)
        except (EmptyResult, NoRootStatement) as exc:
            raise SeedAnalysisFailed(str(exc)) from exc

    kvar_vectors = []
    slices = []
    for r_stmt, k_var in sig.pairs:
        occ = first_occurrence_of(r_stmt, k_var, config.fuse_dot_access)
        if occ is None:
            raise CriterionMismatch(
                f"{k_var!r} does not occur in {r_stmt.text!r}")
        kvar_vectors.append(embed_variable_masked(provider, r_stmt, occ))
        slices.append(customized_slice(
            buggy, r_stmt, k_var, config.strategy,
            fuse_dot_access=config.fuse_dot_access))
    query_slice = merge_slices(slices)
    return Query(
        seed_function=buggy,
        seed_signature=sig,
        seed_kvar_vectors=kvar_vectors,
        query_slice=query_slice,
        query_slice_vector=sequence_embedding(provider,
                                              slice_tokens(query_slice)),
        seed_function_vector=sequence_embedding(provider,
                                                function_tokens(buggy)),
    )


def run_query(
    query: Query,
    index: Index,
    provider,
    config: QueryConfig | None = None,
    diagnostics: list | None = None,
) -> list[RankedCandidate]:
    if index is None:
        raise IndexRequired("a built index is required to run a query")
    if config is None:
        config = QueryConfig()
    if diagnostics is None:
        diagnostics = []

    candidates = screen_top_k(index, query.seed_function_vector,
                              config.screen_top_k)
    seed_pairs = list(zip(query.seed_signature.pairs,
                          query.seed_kvar_vectors))
    use_precomputed_slices = (
        config.strategy == "default"
        and config.target_slice == "slice"
        and index.manifest.get("slice_strategy", "default") == "default")

    ranked: list[RankedCandidate] = []
    for fid in candidates:
        if fid == query.seed_function.id:
            continue
        func = index.function_object(fid)
        lookup = (index.mask_vector_lookup(fid)
                  if config.pinpoint_embedding == "mask" else None)
        try:
            pinpoints = pinpoint_all(
                provider, seed_pairs, func, config.fuse_dot_access,
                config.pinpoint_embedding, lookup, diagnostics)
        except AllPairsFailed:
            diagnostics.append({
                "file": func.file_origin, "line": func.start_line,
                "severity": "info",
                "message": f"{func.name} skipped: no pinpointable criterion",
            })
            continue
        cand_slice, cand_vector = _candidate_slice(
            index, provider, func, pinpoints, config, use_precomputed_slices)
        score = cosine_similarity(query.query_slice_vector, cand_vector)
        ranked.append(RankedCandidate(
            function_id=fid, function_name=func.name, file=func.file_origin,
            start_line=func.start_line, pinpoints=pinpoints,
            candidate_slice=cand_slice, score=score))

    ranked.sort(key=lambda c: (-c.score, c.function_id))
    ranked = ranked[: config.report_top_n]
    for i, cand in enumerate(ranked, 1):
        cand.rank = i
    return ranked


def _candidate_slice(index, provider, func, pinpoints, config,
                     use_precomputed):
    if config.target_slice == "direct-mask-mapping":
        # map the pinpointed statements over directly, without slicing
        by_id = {}
        criterion = []
        for res in pinpoints:
            by_id[res.stmt.id] = res.stmt
            criterion.append((res.stmt.id, res.occ.variable_key))
        stmts = sorted(by_id.values(), key=lambda s: (s.line, s.id.ordinal))
        fs = FeatureSlice(function_ref=func.id, criterion=criterion,
                          statements=stmts)
        return fs, sequence_embedding(provider, slice_tokens(fs))

    slices = []
    vectors = []
    for res in pinpoints:
        pre = (index.slice_for(func.id, res.stmt.id, res.occ.variable_key)
               if use_precomputed else None)
        if pre is not None:
            fs, vec = pre
        else:
            fs = customized_slice(func, res.stmt, res.occ.variable_key,
                                  config.strategy,
                                  fuse_dot_access=config.fuse_dot_access)
            vec = None
        slices.append(fs)
        vectors.append(vec)
    merged = merge_slices(slices)
    if len(slices) == 1 and vectors[0] is not None:
        return merged, vectors[0]
    return merged, sequence_embedding(provider, slice_tokens(merged))


def render_report(ranked: list[RankedCandidate], fmt: str = "text") -> str:
    if fmt == "json":
        payload = []
        for cand in ranked:
            payload.append({
                "rank": cand.rank,
                "score": round(cand.score, 4),
                "function_id": cand.function_id,
                "function_name": cand.function_name,
                "file": cand.file,
                "start_line": cand.start_line,
                "pinpoints": [{
                    "line": res.stmt.line,
                    "statement": res.stmt.text,
                    "variable": res.occ.variable_key,
                    "score": round(res.score, 4),
                } for res in cand.pinpoints],
                "slice": {
                    "lines": [s.line for s in cand.candidate_slice.statements],
                    "text": cand.candidate_slice.rendered_text,
                },
            })
        return json.dumps(payload, indent=2, sort_keys=True)

    lines = [f"{len(ranked)} candidate(s)"]
    for cand in ranked:
        lines.append("")
        lines.append(f"#{cand.rank}  score {cand.score:.4f}  "
                     f"{cand.function_name}  {cand.file}:{cand.start_line}")
        for res in cand.pinpoints:
            lines.append(f"    criterion line {res.stmt.line}: "
                         f"{res.occ.variable_key}  ({res.score:.4f})")
        for stmt in cand.candidate_slice.statements:
            lines.append(f"    {stmt.line:>5} | {stmt.text}")
    return "\n".join(lines) + "\n"
