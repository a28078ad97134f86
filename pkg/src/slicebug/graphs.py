"""Intraprocedural control-flow and data-dependence graphs.

The CFG covers sequential flow, branches, loops, switch and goto.  The DDG
is computed by reaching definitions over textual variable keys; member-access
chains are treated as whole keys and there is no alias analysis.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .code_model import (
    ASSIGN_OPS,
    Function,
    If,
    LabelNode,
    Loop,
    Simple,
    Statement,
    StatementId,
    Switch,
    collect_variable_occurrences,
)
from .errors import UnknownNode

ENTRY = "__entry__"
EXIT = "__exit__"


@dataclass
class Cfg:
    nodes: list  # StatementId | ENTRY | EXIT
    edges: set = field(default_factory=set)  # (from, to)
    succ: dict = field(default_factory=dict)
    pred: dict = field(default_factory=dict)
    _reach: dict = field(default_factory=dict, repr=False)

    def add_edge(self, a, b):
        if (a, b) in self.edges:
            return
        self.edges.add((a, b))
        self.succ.setdefault(a, []).append(b)
        self.pred.setdefault(b, []).append(a)

    def successors(self, n):
        return self.succ.get(n, [])

    def reachable_from(self, n) -> set:
        if n not in self._reach:
            seen = {n}
            stack = [n]
            while stack:
                cur = stack.pop()
                for nxt in self.succ.get(cur, []):
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
            self._reach[n] = seen
        return self._reach[n]


@dataclass
class Ddg:
    # (def StatementId, use StatementId, variable key)
    def_use_edges: set = field(default_factory=set)
    # per-statement reaching definition map: stmt id -> {key: set of def ids}
    reach_in: dict = field(default_factory=dict)
    defs: dict = field(default_factory=dict)   # stmt id -> set of keys
    uses: dict = field(default_factory=dict)   # stmt id -> set of keys
    key_use_stmts: dict = field(default_factory=dict)  # key -> [stmt ids]


def _statement_defs_uses(func: Function, fuse_dot_access: bool):
    """Per-statement defined and used variable keys."""
    defs: dict[StatementId, set] = {s.id: set() for s in func.statements}
    uses: dict[StatementId, set] = {s.id: set() for s in func.statements}
    non_decl: dict[str, list[StatementId]] = {}
    for occ in collect_variable_occurrences(func, fuse_dot_access):
        sid = occ.statement_id
        stmt = func.statement_by_id(sid)
        if occ.role == "definition":
            defs[sid].add(occ.variable_key)
            # compound assignment and ++/-- also read the old value
            i, j = occ.token_span
            nxt = stmt.tokens[j + 1] if j + 1 < len(stmt.tokens) else None
            prev = stmt.tokens[i - 1] if i > 0 else None
            if (nxt in ASSIGN_OPS and nxt != "=") or nxt in ("++", "--") \
                    or prev in ("++", "--"):
                uses[sid].add(occ.variable_key)
        elif occ.role == "unknown" and occ.is_declaration:
            defs[sid].add(occ.variable_key)  # plain declaration still kills
        else:
            uses[sid].add(occ.variable_key)
        if not occ.is_declaration:
            lst = non_decl.setdefault(occ.variable_key, [])
            if not lst or lst[-1] != sid:
                lst.append(sid)
    return defs, uses, non_decl


def build_cfg_and_ddg(
    func: Function,
    fuse_dot_access: bool = True,
    diagnostics: list | None = None,
) -> tuple[Cfg, Ddg]:
    cfg = _build_cfg(func, diagnostics if diagnostics is not None else [])
    ddg = _build_ddg(func, cfg, fuse_dot_access)
    return cfg, ddg


# ---------------------------------------------------------------------------
# CFG construction


class _CfgBuilder:
    def __init__(self, func: Function, diagnostics: list):
        self.cfg = Cfg(nodes=[ENTRY, EXIT] + [s.id for s in func.statements])
        self.func = func
        self.diagnostics = diagnostics
        self.labels: dict[str, StatementId] = {}
        self.gotos: list[tuple[StatementId, str]] = []
        self.break_stack: list[list] = []      # collects break sources
        self.continue_stack: list = []         # loop header targets

    def build(self) -> Cfg:
        out = self.wire(self.func.body, [ENTRY])
        for src in out:
            self.cfg.add_edge(src, EXIT)
        for src, target in self.gotos:
            if target in self.labels:
                self.cfg.add_edge(src, self.labels[target])
            else:
                self.diagnostics.append({
                    "file": self.func.file_origin,
                    "line": src.line,
                    "severity": "warning",
                    "message": f"dangling goto {target!r}; edge omitted",
                })
                self.cfg.add_edge(src, EXIT)
        # keep successor lists deterministic
        for k in self.cfg.succ:
            self.cfg.succ[k].sort(key=_node_sort_key)
        return self.cfg

    def wire(self, nodes: list, incoming: list) -> list:
        """Connect a node sequence; returns the dangling outgoing sources."""
        current = incoming
        for node in nodes:
            current = self.wire_node(node, current)
        return current

    def wire_node(self, node, incoming: list) -> list:
        if isinstance(node, list):
            return self.wire(node, incoming)
        if isinstance(node, Simple):
            stmt = node.stmt
            for src in incoming:
                self.cfg.add_edge(src, stmt.id)
            if stmt.kind == "return":
                self.cfg.add_edge(stmt.id, EXIT)
                return []
            if stmt.kind == "jump":
                head = stmt.tokens[0]
                if head == "goto":
                    self.gotos.append((stmt.id, stmt.goto_target or ""))
                    return []
                if head == "break" and self.break_stack:
                    self.break_stack[-1].append(stmt.id)
                    return []
                if head == "continue" and self.continue_stack:
                    self.cfg.add_edge(stmt.id, self.continue_stack[-1])
                    return []
            return [stmt.id]
        if isinstance(node, LabelNode):
            stmt = node.stmt
            self.labels[stmt.label_name] = stmt.id
            for src in incoming:
                self.cfg.add_edge(src, stmt.id)
            return [stmt.id]
        if isinstance(node, If):
            cond = node.cond.id
            for src in incoming:
                self.cfg.add_edge(src, cond)
            out_then = self.wire(node.then, [cond])
            if node.orelse:
                out_else = self.wire(node.orelse, [cond])
            else:
                out_else = [cond]
            return out_then + out_else
        if isinstance(node, Loop):
            return self._wire_loop(node, incoming)
        if isinstance(node, Switch):
            return self._wire_switch(node, incoming)
        raise TypeError(f"unexpected node {node!r}")

    def _wire_loop(self, node: Loop, incoming: list) -> list:
        header = node.header.id
        breaks: list = []
        self.break_stack.append(breaks)
        self.continue_stack.append(header)
        if node.post_test:
            body_out = self.wire(node.body, incoming + [header])
            for src in body_out:
                self.cfg.add_edge(src, header)
            if not node.body:
                for src in incoming:
                    self.cfg.add_edge(src, header)
        else:
            for src in incoming:
                self.cfg.add_edge(src, header)
            body_out = self.wire(node.body, [header])
            for src in body_out:
                self.cfg.add_edge(src, header)  # back edge
        self.continue_stack.pop()
        self.break_stack.pop()
        return [header] + breaks

    def _wire_switch(self, node: Switch, incoming: list) -> list:
        header = node.header.id
        for src in incoming:
            self.cfg.add_edge(src, header)
        breaks: list = []
        self.break_stack.append(breaks)
        fallthrough: list = []
        has_default = False
        for is_default, group in node.cases:
            has_default = has_default or is_default
            fallthrough = self.wire(group, [header] + fallthrough)
        self.break_stack.pop()
        out = fallthrough + breaks
        if not has_default:
            out.append(header)
        return out


def _node_sort_key(n):
    if n == ENTRY:
        return (-1, -1)
    if n == EXIT:
        return (1 << 30, 0)
    return (n.line, n.ordinal)


def _build_cfg(func: Function, diagnostics: list) -> Cfg:
    return _CfgBuilder(func, diagnostics).build()


# ---------------------------------------------------------------------------
# DDG construction (reaching definitions)


def _build_ddg(func: Function, cfg: Cfg, fuse_dot_access: bool) -> Ddg:
    defs, uses, non_decl = _statement_defs_uses(func, fuse_dot_access)
    stmt_ids = [s.id for s in func.statements]
    reach_in: dict = {sid: {} for sid in stmt_ids}
    reach_out: dict = {sid: {} for sid in stmt_ids}
    reach_in[ENTRY] = {}
    reach_out[ENTRY] = {}

    worklist = deque(stmt_ids)
    while worklist:
        sid = worklist.popleft()
        merged: dict = {}
        for p in cfg.pred.get(sid, []):
            for key, dset in reach_out.get(p, {}).items():
                merged.setdefault(key, set()).update(dset)
        reach_in[sid] = merged
        out = {k: set(v) for k, v in merged.items()}
        for key in defs[sid]:
            out[key] = {sid}
        if out != reach_out[sid]:
            reach_out[sid] = out
            for s in cfg.succ.get(sid, []):
                if s not in (ENTRY, EXIT):
                    worklist.append(s)

    ddg = Ddg(defs=defs, uses=uses, key_use_stmts=non_decl)
    ddg.reach_in = reach_in
    for sid in stmt_ids:
        for key in uses[sid]:
            for d in reach_in[sid].get(key, ()):
                ddg.def_use_edges.add((d, sid, key))
    return ddg


# ---------------------------------------------------------------------------
# Queries


def has_fwd_path(cfg: Cfg, src, dst) -> bool:
    """Directed reachability, reflexive."""
    if src not in cfg.nodes or dst not in cfg.nodes:
        raise UnknownNode(f"{src} or {dst} not in cfg")
    return dst in cfg.reachable_from(src)


def get_definitions(ddg: Ddg, variable_key: str, at_stmt: StatementId,
                    is_definition: bool = False) -> list[StatementId]:
    """Reaching definition statements of a key at a statement.

    If the occurrence is itself a definition, its own statement is the
    definition.  An empty result means the key has no in-function definition
    (parameter or global, defined at the virtual entry).
    """
    if is_definition or variable_key in ddg.defs.get(at_stmt, ()):
        return [at_stmt]
    found = sorted(ddg.reach_in.get(at_stmt, {}).get(variable_key, ()),
                   key=lambda s: (s.line, s.ordinal))
    return found


def get_all_uses(ddg: Ddg, variable_key: str) -> list[StatementId]:
    """Statements holding a non-declaration occurrence of the key, in order."""
    return list(ddg.key_use_stmts.get(variable_key, []))


# ---------------------------------------------------------------------------
# Debug export


def to_dot(func: Function, cfg: Cfg, ddg: Ddg | None = None) -> str:
    by_id = {s.id: s for s in func.statements}

    def label(n):
        if n in (ENTRY, EXIT):
            return n.strip("_").upper()
        return f"{n.line}: {by_id[n].text}".replace('"', "'")

    lines = [f'digraph "{func.name}" {{']
    for n in cfg.nodes:
        lines.append(f'  "{n}" [label="{label(n)}"];')
    for a, b in sorted(cfg.edges, key=lambda e: (str(e[0]), str(e[1]))):
        lines.append(f'  "{a}" -> "{b}";')
    if ddg is not None:
        for d, u, key in sorted(ddg.def_use_edges, key=str):
            lines.append(f'  "{d}" -> "{u}" [style=dashed, label="{key}"];')
    lines.append("}")
    return "\n".join(lines)
