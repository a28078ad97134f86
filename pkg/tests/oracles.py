"""Independently written reference implementations used as test oracles.

These deliberately avoid the library's slicer/pinpoint/screening code paths:
the worklist transcription, unary detection, path enumeration, reachability
and argmax logic are all re-derived here from first principles, in a
different style, so agreement is meaningful.
"""

from __future__ import annotations

import re

from slicebug.code_model import collect_variable_occurrences
from slicebug.embedding import cosine_similarity
from slicebug.graphs import ENTRY, EXIT

CHAIN_RE = r"[A-Za-z_]\w*(?:(?:->|\.)[A-Za-z_]\w*)*"


# ---------------------------------------------------------------------------
# Reachability (BFS over the raw edge set)


def oracle_reachable(edges: set, src) -> set:
    seen = {src}
    frontier = [src]
    while frontier:
        nxt = []
        for node in frontier:
            for a, b in edges:
                if a == node and b not in seen:
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    return seen


# ---------------------------------------------------------------------------
# Statement predicates, re-derived


def oracle_is_normal(stmt) -> bool:
    if stmt.label_name is not None:
        return False
    if stmt.kind in ("jump", "other"):
        return False
    if stmt.kind == "declaration":
        return "=" in stmt.tokens
    return True


def oracle_unary_parts(stmt, occurrences):
    """Regex-based unary-assignment detection on the rendered text."""
    if stmt.kind not in ("assignment", "declaration"):
        return None
    text = stmt.text.strip().rstrip(";").strip()
    m = re.match(
        rf"^(?:[A-Za-z_]\w*[\s\*]+)*[\*\s]*({CHAIN_RE})\s*=\s*"
        rf"([&\*!~\+\-]*)\s*({CHAIN_RE})$",
        text)
    if m is None:
        return None
    lhs, _ops, rhs = m.group(1), m.group(2), m.group(3)
    keys = {o.variable_key for o in occurrences if o.statement_id == stmt.id}
    if lhs not in keys or rhs not in keys:
        return None
    return lhs, rhs


# ---------------------------------------------------------------------------
# Worklist transcription of the slicing algorithm


def oracle_slice_statements(func, cfg, ddg, r_stmt, k_var,
                            strategy="default") -> set:
    """Set of statement ids collected by a direct transcription of the
    depth-limited slicing worklist (before path filtering)."""
    occurrences = collect_variable_occurrences(func)
    by_id = {s.id: s for s in func.statements}
    use_sites: dict[str, list] = {}
    for occ in occurrences:
        if not occ.is_declaration:
            use_sites.setdefault(occ.variable_key, []).append(occ.statement_id)

    collected = {r_stmt.id}
    gamma = [(k_var, 0, r_stmt.id)]
    visited = set()

    def definitions_of(key, at):
        if key in ddg.defs.get(at, ()):
            return [at]
        return sorted(ddg.reach_in.get(at, {}).get(key, ()),
                      key=lambda s: (s.line, s.ordinal))

    def prepare(key, depth, stmt):
        if not oracle_is_normal(stmt):
            return
        collected.add(stmt.id)
        if strategy == "strict-one-step":
            return
        parts = oracle_unary_parts(stmt, occurrences)
        if parts is None:
            return
        lhs, rhs = parts
        if lhs == key and rhs != key:
            gamma.append((rhs, depth + 1, stmt.id))
        elif rhs == key and lhs != key:
            gamma.append((lhs, depth + 1, stmt.id))

    while gamma:
        key, depth, at = gamma.pop()
        if strategy == "unconstrained":
            if (key, at) in visited:
                continue
            visited.add((key, at))
        elif depth > 1:
            continue
        for did in definitions_of(key, at):
            prepare(key, depth, by_id[did])
        seen_use = set()
        for uid in use_sites.get(key, ()):
            if uid in seen_use:
                continue
            seen_use.add(uid)
            fwd = r_stmt.id in oracle_reachable(cfg.edges, uid)
            bwd = uid in oracle_reachable(cfg.edges, r_stmt.id)
            if fwd or bwd:
                prepare(key, depth, by_id[uid])
    return collected


# ---------------------------------------------------------------------------
# Exhaustive path enumeration for the coverage filter


def oracle_all_paths(edges: set, max_expansions: int = 500_000) -> list:
    """Every entry-to-exit path visiting nodes at most twice and each
    back-edge at most once."""
    succ: dict = {}
    for a, b in edges:
        succ.setdefault(a, []).append(b)
    for lst in succ.values():
        lst.sort(key=lambda n: (0, "", 0) if isinstance(n, str)
                 else (1, n.function_id, n.line, n.ordinal))

    back = set()
    state: dict = {}
    stack = [(ENTRY, iter(succ.get(ENTRY, ())))]
    state[ENTRY] = 1
    while stack:
        node, it = stack[-1]
        advanced = False
        for nxt in it:
            if state.get(nxt) == 1:
                back.add((node, nxt))
            elif nxt not in state:
                state[nxt] = 1
                stack.append((nxt, iter(succ.get(nxt, ()))))
                advanced = True
                break
        if not advanced:
            state[node] = 2
            stack.pop()

    paths = []
    budget = [max_expansions]

    def walk(node, path, used_back):
        if budget[0] <= 0:
            return
        budget[0] -= 1
        if node == EXIT:
            paths.append(list(path))
            return
        for nxt in succ.get(node, ()):
            if (node, nxt) in back:
                if (node, nxt) in used_back:
                    continue
                nxt_used = used_back | {(node, nxt)}
            else:
                nxt_used = used_back
            if path.count(nxt) >= 2:
                continue
            path.append(nxt)
            walk(nxt, path, nxt_used)
            path.pop()

    walk(ENTRY, [ENTRY], frozenset())
    return paths


def oracle_coverage_filter(cfg, r_stmt_id, collected: set,
                           coverage_target: set | None = None) -> set:
    if coverage_target is None:
        coverage_target = collected
    best_key = None
    best_nodes = None
    for path in oracle_all_paths(cfg.edges):
        if r_stmt_id not in path:
            continue
        nodes = set(path)
        cover = len(nodes & coverage_target)
        seq = tuple((n.line, n.ordinal) for n in path
                    if n not in (ENTRY, EXIT))
        key = (-cover, seq)
        if best_key is None or key < best_key:
            best_key = key
            best_nodes = nodes
    if best_nodes is None:
        return set(collected)
    return collected & best_nodes


def oracle_slice(func, cfg, ddg, r_stmt, k_var, strategy="default") -> list:
    """Statement ids of the full oracle slice, sorted by position.

    The coverage path is always chosen against the default-strategy
    collection so alternative strategies stay on the same path.
    """
    collected = oracle_slice_statements(func, cfg, ddg, r_stmt, k_var, strategy)
    if strategy == "default":
        base = collected
    else:
        base = oracle_slice_statements(func, cfg, ddg, r_stmt, k_var, "default")
    kept = oracle_coverage_filter(cfg, r_stmt.id, collected, base)
    return sorted(kept, key=lambda s: (s.line, s.ordinal))


# ---------------------------------------------------------------------------
# Brute-force pinpointing


def oracle_pinpoint(provider, seed_vector, func, embed_fn):
    """Exhaustive argmax over eligible pairs with explicit tie-break sort.

    embed_fn(provider, stmt, occ) supplies the occurrence vector so the
    oracle shares only the embedding primitive, not the search.
    """
    occs = collect_variable_occurrences(func)
    tally: dict[str, int] = {}
    for occ in occs:
        if not occ.is_declaration:
            tally[occ.variable_key] = tally.get(occ.variable_key, 0) + 1
    rows = []
    for occ in occs:
        if occ.is_declaration or tally[occ.variable_key] < 2:
            continue
        stmt = func.statement_by_id(occ.statement_id)
        vec = embed_fn(provider, stmt, occ)
        score = cosine_similarity(seed_vector, vec)
        rows.append((-score, stmt.line, occ.token_span[0], stmt, occ, score))
    if not rows:
        return None
    rows.sort(key=lambda r: r[:3])
    _, _, _, stmt, occ, score = rows[0]
    return stmt, occ, score
