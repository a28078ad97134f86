"""Seed analysis: diff a buggy/fixed function pair into a patch, pick key
variables by term frequency and screen root statements.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from difflib import SequenceMatcher

from .code_model import Function, Statement, collect_variable_occurrences
from .errors import EmptyResult, NoRootStatement

# normalized-token similarity at or above which an aligned buggy/fixed
# statement pair counts as modified rather than delete+insert
MODIFIED_DICE_THRESHOLD = 0.5


@dataclass
class Patch:
    buggy: Function
    fixed: Function
    deleted: list[Statement] = field(default_factory=list)
    inserted: list[Statement] = field(default_factory=list)
    modified: list[tuple[Statement, Statement]] = field(default_factory=list)
    # alignment slot (index into the buggy statement list after which the
    # insertion happens) for every inserted statement
    insert_slots: dict = field(default_factory=dict)

    @property
    def is_empty(self) -> bool:
        return not (self.deleted or self.inserted or self.modified)


@dataclass
class SeedSignature:
    pairs: list[tuple[Statement, str]]  # (rStmt, kVar)
    source_patch: Patch | None = None


def _dice_bigrams(a: list[str], b: list[str]) -> float:
    if len(a) < 2 or len(b) < 2:
        return 1.0 if a == b else 0.0
    ba = Counter(zip(a, a[1:]))
    bb = Counter(zip(b, b[1:]))
    overlap = sum((ba & bb).values())
    return 2.0 * overlap / (sum(ba.values()) + sum(bb.values()))


def compute_patch(buggy: Function, fixed: Function) -> Patch:
    """Statement-level patch via LCS alignment on token sequences."""
    patch = Patch(buggy=buggy, fixed=fixed)
    a = [tuple(s.tokens) for s in buggy.statements]
    b = [tuple(s.tokens) for s in fixed.statements]
    sm = SequenceMatcher(a=a, b=b, autojunk=False)
    for tag, i1, i2, j1, j2 in sm.get_opcodes():
        if tag == "equal":
            continue
        old = buggy.statements[i1:i2]
        new = fixed.statements[j1:j2]
        if tag == "replace":
            for k in range(min(len(old), len(new))):
                if _dice_bigrams(list(old[k].tokens),
                                 list(new[k].tokens)) >= MODIFIED_DICE_THRESHOLD:
                    patch.modified.append((old[k], new[k]))
                else:
                    patch.deleted.append(old[k])
                    patch.inserted.append(new[k])
                    patch.insert_slots[new[k].id] = i1 + k
            patch.deleted.extend(old[min(len(old), len(new)):])
            for extra in new[min(len(old), len(new)):]:
                patch.inserted.append(extra)
                patch.insert_slots[extra.id] = i2
        elif tag == "delete":
            patch.deleted.extend(old)
        elif tag == "insert":
            for stmt in new:
                patch.inserted.append(stmt)
                patch.insert_slots[stmt.id] = i1
    return patch


def _return_tainted_keys(func: Function, fuse_dot: bool) -> set[str]:
    keys = set()
    for occ in collect_variable_occurrences(func, fuse_dot):
        stmt = func.statement_by_id(occ.statement_id)
        if stmt.kind == "return":
            keys.add(occ.variable_key)
    return keys


def identify_key_variables(patch: Patch, fuse_dot_access: bool = True) -> list[str]:
    """Key variables of a patch, ranked by occurrence frequency.

    Candidates must exist in the buggy function and must not appear in any
    return statement of either version; among the survivors all keys tied at
    the maximal frequency are kept.
    """
    freq: Counter = Counter()
    changed = list(patch.deleted) + list(patch.inserted)
    for old, new in patch.modified:
        changed.append(old)
        changed.append(new)
    changed_ids = {s.id for s in changed}
    for func in (patch.buggy, patch.fixed):
        for occ in collect_variable_occurrences(func, fuse_dot_access):
            if occ.statement_id in changed_ids:
                freq[occ.variable_key] += 1
    if not freq:
        raise EmptyResult("patch touches no variables")

    buggy_keys = {
        occ.variable_key
        for occ in collect_variable_occurrences(patch.buggy, fuse_dot_access)
    }
    tainted = (_return_tainted_keys(patch.buggy, fuse_dot_access)
               | _return_tainted_keys(patch.fixed, fuse_dot_access))
    candidates = {
        key: count for key, count in freq.items()
        if key in buggy_keys and key not in tainted
    }
    if not candidates:
        raise EmptyResult("no key variable survives return-statement screening")
    best = max(candidates.values())
    return sorted(k for k, c in candidates.items() if c == best)


def screen_root_statements(
    patch: Patch, k_vars: list[str], fuse_dot_access: bool = True,
    diagnostics: list | None = None,
) -> SeedSignature:
    """Root statements for each key variable.

    Rule 1: a deleted/modified buggy statement containing the key variable is
    itself a root statement.  Rule 2: for an inserted statement containing the
    key variable, the nearest preceding buggy statement containing it becomes
    the root statement.
    """
    if diagnostics is None:
        diagnostics = []
    buggy = patch.buggy
    key_stmts: dict[str, set] = {}
    for occ in collect_variable_occurrences(buggy, fuse_dot_access):
        key_stmts.setdefault(occ.variable_key, set()).add(occ.statement_id)
    fixed_keys: dict = {}
    for occ in collect_variable_occurrences(patch.fixed, fuse_dot_access):
        fixed_keys.setdefault(occ.statement_id, set()).add(occ.variable_key)

    pairs: list[tuple[Statement, str]] = []
    seen: set = set()

    def add(stmt: Statement, kvar: str):
        if (stmt.id, kvar) not in seen:
            seen.add((stmt.id, kvar))
            pairs.append((stmt, kvar))

    for kvar in k_vars:
        found = False
        containing = key_stmts.get(kvar, set())
        for stmt in patch.deleted:
            if stmt.id in containing:
                add(stmt, kvar)
                found = True
        for old, _new in patch.modified:
            if old.id in containing:
                add(old, kvar)
                found = True
        for stmt in patch.inserted:
            if kvar not in fixed_keys.get(stmt.id, ()):
                continue
            slot = patch.insert_slots.get(stmt.id, len(buggy.statements))
            # nearest preceding buggy statement with the key; ties on line
            # distance resolve to the later statement
            for idx in range(min(slot, len(buggy.statements)) - 1, -1, -1):
                cand = buggy.statements[idx]
                if cand.id in containing:
                    add(cand, kvar)
                    found = True
                    break
        if not found:
            diagnostics.append({
                "file": buggy.file_origin,
                "line": buggy.start_line,
                "severity": "warning",
                "message": f"no root statement for key variable {kvar!r}; dropped",
            })
    if not pairs:
        raise NoRootStatement(", ".join(k_vars))
    return SeedSignature(pairs=pairs, source_patch=patch)


# ---------------------------------------------------------------------------
# Unified-diff support: reconstruct the fixed source from buggy + diff


def apply_unified_diff(buggy_source: str, diff_text: str) -> str:
    """Apply a unified diff to the buggy source, returning the fixed source."""
    src_lines = buggy_source.split("\n")
    out: list[str] = []
    pos = 0  # 0-based index into src_lines
    for raw in diff_text.split("\n"):
        if raw.startswith(("---", "+++", "diff ", "index ")):
            continue
        if raw.startswith("@@"):
            # @@ -start,count +start,count @@
            header = raw.split("@@")[1].strip()
            old_part = header.split()[0]
            start = int(old_part.lstrip("-").split(",")[0])
            target = max(start - 1, 0)
            out.extend(src_lines[pos:target])
            pos = target
            continue
        if raw.startswith("+"):
            out.append(raw[1:])
        elif raw.startswith("-"):
            pos += 1
        elif raw.startswith(" ") or raw == "":
            if raw == "" and pos >= len(src_lines):
                continue
            out.append(src_lines[pos] if pos < len(src_lines) else raw[1:])
            pos += 1
    out.extend(src_lines[pos:])
    return "\n".join(out)
