"""Customized slicing: depth-limited dependency collection around a
(root statement, key variable) criterion, filtered down to the control-flow
path that covers the root statement and most of the collected statements.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .code_model import (
    Function,
    Statement,
    StatementId,
    _statement_occurrences,
)
from .errors import CriterionMismatch, MixedFunctions
from .graphs import ENTRY, EXIT, Cfg, Ddg, build_cfg_and_ddg, get_all_uses, get_definitions, has_fwd_path

STRATEGIES = ("default", "strict-one-step", "unconstrained")

# guard against path explosion in pathological CFGs; the best path found so
# far is kept, deterministically
MAX_PATH_EXPANSIONS = 500_000


@dataclass(frozen=True)
class TrackedVariable:
    variable_key: str
    depth: int
    at: StatementId  # statement whose occurrence introduced the tracking


@dataclass
class FeatureSlice:
    function_ref: str
    criterion: list[tuple[StatementId, str]]
    statements: list[Statement] = field(default_factory=list)

    @property
    def rendered_text(self) -> str:
        return "\n".join(s.text for s in self.statements)

    @property
    def statement_ids(self) -> list[StatementId]:
        return [s.id for s in self.statements]


def is_normal_stmt(stmt: Statement) -> bool:
    """Statements eligible for slice collection."""
    if stmt.is_label:
        return False
    if stmt.kind == "declaration":
        return "=" in stmt.tokens  # only declarations with initializers
    return stmt.kind in ("assignment", "call", "condition", "return")


def get_unary_parts(stmt: Statement, fuse_dot_access: bool = True):
    """(lhs key, rhs key) when the statement is a unary assignment.

    A unary assignment is a plain ``=`` whose right-hand side is a single
    variable or member chain, optionally behind unary prefix operators.
    Calls and compound assignments never qualify.
    """
    if stmt.kind not in ("assignment", "declaration"):
        return None
    texts = stmt.tokens
    depth = 0
    eq = -1
    for i, t in enumerate(texts):
        if t in ("(", "["):
            depth += 1
        elif t in (")", "]"):
            depth -= 1
        elif depth == 0 and t == "=":
            eq = i
            break
        elif depth == 0 and (t in ("+=", "-=", "*=", "/=", "%=", "&=", "|=",
                                   "^=", "<<=", ">>=", "++", "--")):
            return None
    if eq < 0:
        return None
    occs = _statement_occurrences(stmt, fuse_dot_access)
    lhs = next((o for o in occs if o.token_span[1] == eq - 1
                and o.role in ("definition",)), None)
    if lhs is None:
        return None
    rhs_toks = texts[eq + 1 :]
    if rhs_toks and rhs_toks[-1] == ";":
        rhs_toks = rhs_toks[:-1]
    i = 0
    while i < len(rhs_toks) and rhs_toks[i] in ("&", "*", "!", "~", "-", "+"):
        i += 1
    rhs_occ = [o for o in occs if o.token_span[0] == eq + 1 + i]
    if len(rhs_occ) != 1:
        return None
    # the chain must cover the rest of the right-hand side exactly
    if rhs_occ[0].token_span[1] != eq + len(rhs_toks):
        return None
    return lhs.variable_key, rhs_occ[0].variable_key


def customized_slice(
    func: Function,
    r_stmt: Statement,
    k_var: str,
    strategy: str = "default",
    cfg: Cfg | None = None,
    ddg: Ddg | None = None,
    coverage_metric: str = "statements",
    fuse_dot_access: bool = True,
) -> FeatureSlice:
    """Depth-limited slice around the (r_stmt, k_var) criterion."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    crit_keys = {o.variable_key for o in _statement_occurrences(r_stmt, fuse_dot_access)}
    if k_var not in crit_keys:
        raise CriterionMismatch(f"{k_var!r} does not occur in {r_stmt.text!r}")
    if cfg is None or ddg is None:
        cfg, ddg = build_cfg_and_ddg(func, fuse_dot_access)

    collected = _collect(func, cfg, ddg, r_stmt, k_var, strategy,
                         fuse_dot_access)
    # the coverage path is always selected against the default-strategy
    # collection, so alternative strategies yield nested subsets/supersets
    # of the default slice instead of jumping to a different path
    if strategy == "default":
        base = collected
    else:
        base = _collect(func, cfg, ddg, r_stmt, k_var, "default",
                        fuse_dot_access)
    kept = filter_by_max_coverage_path(
        cfg, r_stmt.id, {s.id for s in collected},
        coverage_metric=coverage_metric,
        key_of=_collected_key_map(func, collected, fuse_dot_access)
        if coverage_metric == "variables" else None,
        coverage_target={s.id for s in base},
    )
    stmts = sorted({s.id: s for s in collected if s.id in kept}.values(),
                   key=lambda s: (s.line, s.id.ordinal))
    return FeatureSlice(
        function_ref=func.id,
        criterion=[(r_stmt.id, k_var)],
        statements=stmts,
    )


def _collect(func, cfg, ddg, r_stmt, k_var, strategy,
             fuse_dot_access) -> list[Statement]:
    """Worklist collection phase of the slice, before path filtering."""
    by_id = {s.id: s for s in func.statements}
    collected: list[Statement] = [r_stmt]
    worklist: deque[TrackedVariable] = deque(
        [TrackedVariable(k_var, 0, r_stmt.id)])
    # minimal depth at which each (key, statement) pair has been queued;
    # shallower rediscoveries are requeued so depth limiting never loses
    # statements to an earlier deeper visit
    best_depth: dict = {(k_var, r_stmt.id): 0}

    def collect_and_prepare(var: TrackedVariable, stmt: Statement):
        if not is_normal_stmt(stmt):
            return
        collected.append(stmt)
        if strategy == "strict-one-step":
            return
        parts = get_unary_parts(stmt, fuse_dot_access)
        if parts is None:
            return
        lhs, rhs = parts
        if lhs == var.variable_key:
            nxt = TrackedVariable(rhs, var.depth + 1, stmt.id)
        elif rhs == var.variable_key:
            nxt = TrackedVariable(lhs, var.depth + 1, stmt.id)
        else:
            return
        mark = (nxt.variable_key, nxt.at)
        if nxt.depth < best_depth.get(mark, float("inf")):
            best_depth[mark] = nxt.depth
            worklist.append(nxt)

    while worklist:
        gamma = worklist.popleft()
        if strategy != "unconstrained" and gamma.depth > 1:
            continue
        v = gamma.variable_key  # member chains are tracked literally
        for def_id in get_definitions(ddg, v, gamma.at):
            collect_and_prepare(gamma, by_id[def_id])
        for psi in get_all_uses(ddg, v):
            if has_fwd_path(cfg, psi, r_stmt.id) or has_fwd_path(cfg, r_stmt.id, psi):
                collect_and_prepare(
                    TrackedVariable(v, gamma.depth, psi), by_id[psi])
    return collected


def _collected_key_map(func, collected, fuse_dot):
    key_of: dict = {}
    for s in collected:
        key_of[s.id] = {o.variable_key for o in _statement_occurrences(s, fuse_dot)}
    return key_of


def filter_by_max_coverage_path(
    cfg: Cfg,
    r_stmt_id: StatementId,
    collected: set,
    coverage_metric: str = "statements",
    key_of: dict | None = None,
    coverage_target: set | None = None,
) -> set:
    """Subset of collected statements on the best single CFG path.

    The best path runs entry to exit through the root statement, traverses
    each back-edge at most once and maximizes the number of retained
    coverage-target statements (or distinct variable keys when the coverage
    metric is ``variables``); ties break on the lexicographically smallest
    line-number sequence.  The coverage target defaults to the collected
    set itself.
    """
    if coverage_target is None:
        coverage_target = collected
    back_edges = _back_edges(cfg)
    best: list = [None]  # (neg score, line seq, frozen path node set)
    expansions = [0]

    def score(path_nodes: list) -> int:
        on_path = [n for n in path_nodes if n in coverage_target]
        if coverage_metric == "variables" and key_of is not None:
            keys: set = set()
            for n in on_path:
                keys |= key_of.get(n, set())
            return len(keys)
        return len(set(on_path))

    def seq_key(path_nodes: list):
        return tuple((n.line, n.ordinal) for n in path_nodes
                     if n not in (ENTRY, EXIT))

    def visit(node, path, counts, used_back):
        if expansions[0] > MAX_PATH_EXPANSIONS:
            return
        expansions[0] += 1
        if node == EXIT:
            if r_stmt_id in counts:
                cand = (-score(path), seq_key(path), frozenset(path))
                if best[0] is None or cand[:2] < best[0][:2]:
                    best[0] = cand
            return
        for nxt in cfg.successors(node):
            edge = (node, nxt)
            if edge in back_edges:
                if edge in used_back:
                    continue
                used = used_back | {edge}
            else:
                used = used_back
            if counts.get(nxt, 0) >= 2:
                continue
            counts[nxt] = counts.get(nxt, 0) + 1
            path.append(nxt)
            visit(nxt, path, counts, used)
            path.pop()
            counts[nxt] -= 1
            if counts[nxt] == 0:
                del counts[nxt]

    visit(ENTRY, [ENTRY], {ENTRY: 1}, frozenset())
    if best[0] is None:
        return set(collected)
    return {n for n in collected if n in best[0][2]}


def _back_edges(cfg: Cfg) -> set:
    """Edges whose target is on the DFS stack (loop back-edges)."""
    back: set = set()
    state: dict = {}  # node -> 1 (on stack) | 2 (done)

    def dfs(node):
        state[node] = 1
        for nxt in cfg.successors(node):
            if state.get(nxt) == 1:
                back.add((node, nxt))
            elif nxt not in state:
                dfs(nxt)
        state[node] = 2

    import sys
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10000))
    try:
        dfs(ENTRY)
    finally:
        sys.setrecursionlimit(old)
    return back


def merge_slices(slices: list[FeatureSlice]) -> FeatureSlice:
    """Union of slices from one function, re-sorted and deduplicated."""
    if not slices:
        raise ValueError("no slices to merge")
    func_ids = {s.function_ref for s in slices}
    if len(func_ids) != 1:
        raise MixedFunctions(f"slices span functions {sorted(func_ids)}")
    by_id: dict = {}
    criterion: list = []
    for sl in slices:
        criterion.extend(sl.criterion)
        for stmt in sl.statements:
            by_id[stmt.id] = stmt
    stmts = sorted(by_id.values(), key=lambda s: (s.line, s.id.ordinal))
    return FeatureSlice(
        function_ref=slices[0].function_ref,
        criterion=criterion,
        statements=stmts,
    )
