"""Offline index: per-function vectors, per-occurrence mask vectors and
per-criterion slices with their vectors, persisted to a directory of
manifest.json + functions.jsonl + a raw float32 vector blob.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .code_model import Function, StatementId, extract_functions, tokenize
from .embedding import sequence_embedding
from .errors import CorruptIndex, ManifestMismatch, ParseError
from .pinpoint import eligible_occurrences, occurrence_vector
from .slicer import FeatureSlice, customized_slice

FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"
FUNCTIONS_NAME = "functions.jsonl"
VECTORS_NAME = "vectors.vec"
DEFAULT_SCREEN_TOP_K = 1000


def function_tokens(func: Function) -> list[str]:
    """Whole-function token sequence used for function-level vectors."""
    return [t.text for t in tokenize(func.source_text, func.start_line)]


def slice_tokens(fs: FeatureSlice) -> list[str]:
    toks: list[str] = []
    for stmt in fs.statements:
        toks.extend(stmt.tokens)
    return toks


def _content_hash(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8")).hexdigest()


@dataclass
class OccurrenceRecord:
    occ_id: str
    variable_key: str
    stmt_line: int
    stmt_ordinal: int
    token_span: tuple[int, int]
    mask_vector: np.ndarray
    slice_statement_ids: list[tuple[int, int]]  # (line, ordinal)
    slice_vector: np.ndarray


@dataclass
class FunctionRecord:
    id: str
    name: str
    file: str
    start_line: int
    end_line: int
    content_hash: str
    source: str
    vector: np.ndarray
    occurrences: list[OccurrenceRecord] = field(default_factory=list)


@dataclass
class Index:
    directory: str
    manifest: dict
    functions: dict[str, FunctionRecord] = field(default_factory=dict)
    _parsed: dict[str, Function] = field(default_factory=dict, repr=False)

    def function_object(self, function_id: str) -> Function:
        func = self._parsed.get(function_id)
        if func is None:
            rec = self.functions[function_id]
            extracted = extract_functions(rec.source, rec.file, rec.start_line)
            match = [f for f in extracted if f.id == function_id]
            if not match:
                raise CorruptIndex(
                    f"stored source for {function_id} no longer parses to it")
            func = match[0]
            self._parsed[function_id] = func
        return func

    def mask_vector_lookup(self, function_id: str):
        """Precomputed mask-vector lookup for pinpointing, keyed by
        (statement id, token span)."""
        rec = self.functions[function_id]
        table = {
            (r.stmt_line, r.stmt_ordinal, r.token_span): r.mask_vector
            for r in rec.occurrences
        }

        def lookup(stmt, occ):
            return table.get((stmt.line, stmt.id.ordinal, tuple(occ.token_span)))

        return lookup

    def slice_for(self, function_id: str, stmt_id: StatementId,
                  variable_key: str):
        """Precomputed (FeatureSlice, vector) for a criterion, or None."""
        rec = self.functions[function_id]
        for r in rec.occurrences:
            if (r.stmt_line, r.stmt_ordinal) == (stmt_id.line, stmt_id.ordinal) \
                    and r.variable_key == variable_key:
                func = self.function_object(function_id)
                by_pos = {(s.line, s.id.ordinal): s for s in func.statements}
                stmts = [by_pos[tuple(p)] for p in r.slice_statement_ids]
                fs = FeatureSlice(function_ref=function_id,
                                  criterion=[(stmt_id, variable_key)],
                                  statements=stmts)
                return fs, r.slice_vector
        return None


def _provider_identity(provider) -> dict:
    return {
        "provider_name": provider.name,
        "provider_version": provider.version,
        "dim": provider.dim,
        "max_tokens": provider.max_tokens,
    }


def _scan_corpus(corpus_root: str, diagnostics: list) -> list[Function]:
    """All functions from .c/.h files under the corpus root, in a
    file-order-independent deterministic order."""
    paths = []
    for root, dirs, files in os.walk(corpus_root):
        dirs.sort()
        for fn in sorted(files):
            if fn.endswith((".c", ".h")):
                paths.append(os.path.join(root, fn))
    funcs: list[Function] = []
    for path in sorted(paths):
        rel = os.path.relpath(path, corpus_root)
        with open(path, encoding="utf-8", errors="replace") as fh:
            source = fh.read()
        try:
            funcs.extend(extract_functions(source, rel, 1, diagnostics))
        except ParseError as exc:
            diagnostics.append({
                "file": rel, "line": getattr(exc, "line", 0),
                "severity": "error",
                "message": f"skipped file: {exc}",
            })
    funcs.sort(key=lambda f: f.id)
    return funcs


def build_index(
    corpus_root: str,
    out_dir: str,
    provider,
    strategy: str = "default",
    fuse_dot_access: bool = True,
    diagnostics: list | None = None,
    progress=None,
) -> Index:
    """Embed every corpus function, its eligible occurrences and their
    criterion slices; reuses records from a previous build in ``out_dir``
    whose function source is unchanged.
    """
    if diagnostics is None:
        diagnostics = []
    previous: dict[str, FunctionRecord] = {}
    if os.path.exists(os.path.join(out_dir, MANIFEST_NAME)):
        try:
            old = load_index(out_dir, provider)
            previous = {rec.content_hash: rec for rec in old.functions.values()}
        except (ManifestMismatch, CorruptIndex):
            previous = {}

    funcs = _scan_corpus(corpus_root, diagnostics)
    records: list[FunctionRecord] = []
    for i, func in enumerate(funcs):
        chash = _content_hash(func.source_text)
        prior = previous.get(chash)
        if prior is not None and prior.id == func.id:
            records.append(prior)
            continue
        records.append(_embed_function(func, chash, provider, strategy,
                                       fuse_dot_access, diagnostics))
        if progress is not None:
            progress(i + 1, len(funcs), func.id)

    os.makedirs(out_dir, exist_ok=True)
    _write_index(out_dir, corpus_root, provider, records, strategy)
    return load_index(out_dir, provider)


def _embed_function(func, chash, provider, strategy, fuse_dot_access,
                    diagnostics) -> FunctionRecord:
    from .graphs import build_cfg_and_ddg

    rec = FunctionRecord(
        id=func.id, name=func.name, file=func.file_origin,
        start_line=func.start_line, end_line=func.end_line,
        content_hash=chash, source=func.source_text,
        vector=sequence_embedding(provider, function_tokens(func)),
    )
    pairs = eligible_occurrences(func, fuse_dot_access)
    if not pairs:
        return rec
    cfg, ddg = build_cfg_and_ddg(func, fuse_dot_access)
    slice_cache: dict = {}
    for stmt, occ in pairs:
        key = (stmt.id, occ.variable_key)
        cached = slice_cache.get(key)
        if cached is None:
            fs = customized_slice(func, stmt, occ.variable_key, strategy,
                                  cfg, ddg, fuse_dot_access=fuse_dot_access)
            vec = sequence_embedding(provider, slice_tokens(fs))
            cached = (fs, vec)
            slice_cache[key] = cached
        fs, svec = cached
        rec.occurrences.append(OccurrenceRecord(
            occ_id=f"{stmt.line}.{stmt.id.ordinal}.{occ.token_span[0]}",
            variable_key=occ.variable_key,
            stmt_line=stmt.line,
            stmt_ordinal=stmt.id.ordinal,
            token_span=tuple(occ.token_span),
            mask_vector=occurrence_vector(provider, stmt, occ),
            slice_statement_ids=[(s.line, s.id.ordinal) for s in fs.statements],
            slice_vector=svec,
        ))
    return rec


def _write_index(out_dir, corpus_root, provider, records, strategy="default"):
    vec_path = os.path.join(out_dir, VECTORS_NAME)
    jsonl_path = os.path.join(out_dir, FUNCTIONS_NAME)
    offset = 0
    n_mask = 0
    n_slice = 0
    with open(vec_path, "wb") as vf, open(jsonl_path, "w", encoding="utf-8") as jf:

        def put(vec: np.ndarray) -> dict:
            nonlocal offset
            raw = np.asarray(vec, dtype="<f4").tobytes()
            vf.write(raw)
            ref = {"offset": offset, "count": int(len(vec))}
            offset += len(raw)
            return ref

        for rec in records:
            occs = []
            for occ in rec.occurrences:
                occs.append({
                    "occ_id": occ.occ_id,
                    "variable_key": occ.variable_key,
                    "stmt_line": occ.stmt_line,
                    "stmt_ordinal": occ.stmt_ordinal,
                    "token_span": list(occ.token_span),
                    "mask_vector": put(occ.mask_vector),
                    "slice_statement_ids": [list(p) for p in
                                            occ.slice_statement_ids],
                    "slice_vector": put(occ.slice_vector),
                })
                n_mask += 1
                n_slice += 1
            jf.write(json.dumps({
                "id": rec.id, "name": rec.name, "file": rec.file,
                "start_line": rec.start_line, "end_line": rec.end_line,
                "content_hash": rec.content_hash, "source": rec.source,
                "function_vector": put(rec.vector),
                "occurrences": occs,
            }, sort_keys=True) + "\n")

    manifest = dict(_provider_identity(provider))
    manifest.update({
        "format_version": FORMAT_VERSION,
        "pooling_method": "mean",
        "mask_context": "statement",
        "slice_strategy": strategy,
        "corpus_root": os.path.abspath(corpus_root),
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "counts": {"functions": len(records), "mask_vectors": n_mask,
                   "slices": n_slice},
        "checksums": {
            VECTORS_NAME: _file_sha256(vec_path),
            FUNCTIONS_NAME: _file_sha256(jsonl_path),
        },
    })
    with open(os.path.join(out_dir, MANIFEST_NAME), "w", encoding="utf-8") as mf:
        json.dump(manifest, mf, indent=2, sort_keys=True)
        mf.write("\n")


def _file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def load_index(directory: str, provider=None) -> Index:
    manifest_path = os.path.join(directory, MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise CorruptIndex(f"no {MANIFEST_NAME} in {directory}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if provider is not None:
        ident = _provider_identity(provider)
        stored = {k: manifest.get(k) for k in ident}
        if stored != ident:
            raise ManifestMismatch(f"index built with {stored}, "
                                   f"query provider is {ident}")

    for name, want in manifest.get("checksums", {}).items():
        path = os.path.join(directory, name)
        if not os.path.exists(path) or _file_sha256(path) != want:
            raise CorruptIndex(f"checksum mismatch for {name}")

    vec_path = os.path.join(directory, VECTORS_NAME)
    with open(vec_path, "rb") as fh:
        blob = fh.read()

    def get(ref: dict) -> np.ndarray:
        start = ref["offset"]
        end = start + 4 * ref["count"]
        if end > len(blob):
            raise CorruptIndex("vector reference beyond blob end")
        return np.frombuffer(blob[start:end], dtype="<f4")

    index = Index(directory=directory, manifest=manifest)
    with open(os.path.join(directory, FUNCTIONS_NAME), encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            rec = FunctionRecord(
                id=row["id"], name=row["name"], file=row["file"],
                start_line=row["start_line"], end_line=row["end_line"],
                content_hash=row["content_hash"], source=row["source"],
                vector=get(row["function_vector"]),
            )
            for occ in row["occurrences"]:
                rec.occurrences.append(OccurrenceRecord(
                    occ_id=occ["occ_id"],
                    variable_key=occ["variable_key"],
                    stmt_line=occ["stmt_line"],
                    stmt_ordinal=occ["stmt_ordinal"],
                    token_span=tuple(occ["token_span"]),
                    mask_vector=get(occ["mask_vector"]),
                    slice_statement_ids=[tuple(p) for p in
                                         occ["slice_statement_ids"]],
                    slice_vector=get(occ["slice_vector"]),
                ))
            index.functions[rec.id] = rec
    counts = manifest.get("counts", {})
    if counts.get("functions") not in (None, len(index.functions)):
        raise CorruptIndex("function count does not match manifest")
    return index


def screen_top_k(index: Index, seed_vector: np.ndarray, k: int) -> list[str]:
    """Function ids by descending whole-function cosine similarity."""
    from .embedding import cosine_similarity

    scored = []
    for rec in index.functions.values():
        scored.append((-cosine_similarity(seed_vector, rec.vector), rec.id))
    scored.sort()
    return [fid for _neg, fid in scored[: max(k, 0)]]
