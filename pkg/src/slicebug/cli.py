"""Command-line interface: build an index, run queries, inspect seeds."""

from __future__ import annotations

import json
import os
import sys

import click

from .code_model import extract_functions
from .embedding import ReferenceEmbedder, RemoteProvider
from .errors import SlicebugError
from .graphs import build_cfg_and_ddg, to_dot
from .index_store import MANIFEST_NAME, build_index, load_index
from .pipeline import (
    QueryConfig,
    build_manual_signature,
    prepare_query,
    render_report,
    run_query,
)
from .seed import apply_unified_diff
from .slicer import STRATEGIES


def make_provider(spec: str):
    if spec == "reference":
        return ReferenceEmbedder()
    if spec.startswith(("http://", "https://")):
        return RemoteProvider(spec)
    raise click.BadParameter(
        f"provider must be 'reference' or an http(s) URL, got {spec!r}")


def _emit_diagnostics(diags: list, log_path: str | None):
    if not diags:
        return
    if log_path:
        with open(log_path, "a", encoding="utf-8") as fh:
            for d in diags:
                fh.write(json.dumps(d, sort_keys=True) + "\n")
    else:
        for d in diags:
            click.echo(json.dumps(d, sort_keys=True), err=True)


def _load_function(path: str, name: str, source: str | None = None):
    if source is None:
        with open(path, encoding="utf-8") as fh:
            source = fh.read()
    funcs = extract_functions(source, path)
    matches = [f for f in funcs if f.name == name]
    if not matches:
        raise click.ClickException(
            f"function {name!r} not found in {path} "
            f"(found: {', '.join(f.name for f in funcs) or 'none'})")
    return matches[0]


def _parse_criteria(values):
    out = []
    for raw in values:
        try:
            line, var = raw.split(":", 1)
            out.append((int(line), var))
        except ValueError:
            raise click.BadParameter(f"--criterion expects LINE:VAR, got {raw!r}")
    return out


@click.group()
def main():
    """Recurring-bug detection by feature-slice similarity over C code."""


@main.command()
@click.option("--corpus", "corpus_root", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--provider", default="reference", show_default=True,
              help="'reference' or a remote provider base URL.")
@click.option("--screen-top-k", default=1000, show_default=True, type=int,
              help="Default screening depth recorded in the manifest.")
@click.option("--log", "log_path", type=click.Path(dir_okay=False),
              help="Append JSON-lines diagnostics to this file.")
def index(corpus_root, out_dir, provider, screen_top_k, log_path):
    """Build the offline index for a corpus of C sources."""
    diags: list = []
    prov = make_provider(provider)

    def progress(done, total, fid):
        if done % 25 == 0 or done == total:
            click.echo(f"  embedded {done}/{total} functions", err=True)

    try:
        idx = build_index(corpus_root, out_dir, prov,
                          diagnostics=diags, progress=progress)
    except SlicebugError as exc:
        _emit_diagnostics(diags, log_path)
        raise click.ClickException(str(exc))
    idx.manifest["default_screen_top_k"] = screen_top_k
    manifest_path = os.path.join(out_dir, MANIFEST_NAME)
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(idx.manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _emit_diagnostics(diags, log_path)
    counts = idx.manifest["counts"]
    click.echo(f"indexed {counts['functions']} functions, "
               f"{counts['mask_vectors']} mask vectors, "
               f"{counts['slices']} slices -> {out_dir}")


def _query_inputs(buggy_path, fixed_path, diff_path, function):
    if fixed_path is None and diff_path is None:
        raise click.UsageError("provide --fixed or --diff")
    buggy = _load_function(buggy_path, function)
    if diff_path is not None:
        with open(buggy_path, encoding="utf-8") as fh:
            buggy_src = fh.read()
        with open(diff_path, encoding="utf-8") as fh:
            diff_text = fh.read()
        fixed = _load_function(buggy_path + "(fixed)", function,
                               apply_unified_diff(buggy_src, diff_text))
    else:
        fixed = _load_function(fixed_path, function)
    return buggy, fixed


@main.command()
@click.option("--index", "index_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--buggy", "buggy_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--fixed", "fixed_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--function", required=True, help="Seed function name.")
@click.option("--diff", "diff_path", type=click.Path(exists=True, dir_okay=False),
              help="Unified diff producing the fixed version from --buggy.")
@click.option("--criterion", "criteria", multiple=True, metavar="LINE:VAR",
              help="Manual seed criteria, bypassing diff analysis.")
@click.option("--provider", default="reference", show_default=True)
@click.option("--top-n", default=10, show_default=True, type=int)
@click.option("--screen-top-k", default=1000, show_default=True, type=int)
@click.option("--strategy", default="default", show_default=True,
              type=click.Choice(STRATEGIES))
@click.option("--pinpoint-embedding", default="mask", show_default=True,
              type=click.Choice(["mask", "aggregate"]))
@click.option("--target-slice", default="slice", show_default=True,
              type=click.Choice(["slice", "direct-mask-mapping"]))
@click.option("--format", "fmt", default="text", show_default=True,
              type=click.Choice(["text", "json"]))
@click.option("--log", "log_path", type=click.Path(dir_okay=False))
def query(index_dir, buggy_path, fixed_path, function, diff_path, criteria,
          provider, top_n, screen_top_k, strategy, pinpoint_embedding,
          target_slice, fmt, log_path):
    """Rank indexed functions by similarity to a seed bug's feature slice."""
    diags: list = []
    prov = make_provider(provider)
    config = QueryConfig(
        screen_top_k=screen_top_k, report_top_n=top_n, strategy=strategy,
        pinpoint_embedding=pinpoint_embedding, target_slice=target_slice)
    try:
        idx = load_index(index_dir, prov)
        buggy, fixed = _query_inputs(buggy_path, fixed_path, diff_path, function)
        manual = (build_manual_signature(buggy, _parse_criteria(criteria))
                  if criteria else None)
        q = prepare_query(buggy, fixed, prov, config, manual, diags)
        ranked = run_query(q, idx, prov, config, diags)
    except SlicebugError as exc:
        _emit_diagnostics(diags, log_path)
        raise click.ClickException(str(exc))
    _emit_diagnostics(diags, log_path)
    click.echo(render_report(ranked, fmt), nl=False)


@main.command()
@click.option("--buggy", "buggy_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--fixed", "fixed_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--function", required=True)
@click.option("--diff", "diff_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--criterion", "criteria", multiple=True, metavar="LINE:VAR")
@click.option("--strategy", default="default", show_default=True,
              type=click.Choice(STRATEGIES))
@click.option("--dot", is_flag=True, help="Also dump CFG/DDG in DOT format.")
def inspect(buggy_path, fixed_path, function, diff_path, criteria, strategy, dot):
    """Dump the seed signature, query slice and graphs for debugging."""
    diags: list = []
    prov = ReferenceEmbedder()
    config = QueryConfig(strategy=strategy)
    try:
        buggy, fixed = _query_inputs(buggy_path, fixed_path, diff_path, function)
        manual = (build_manual_signature(buggy, _parse_criteria(criteria))
                  if criteria else None)
        q = prepare_query(buggy, fixed, prov, config, manual, diags)
    except SlicebugError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"seed function: {buggy.id}")
    click.echo("seed signature:")
    for stmt, kvar in q.seed_signature.pairs:
        click.echo(f"  line {stmt.line}: {kvar}  in  {stmt.text}")
    click.echo("query slice:")
    for stmt in q.query_slice.statements:
        click.echo(f"  {stmt.line:>5} | {stmt.text}")
    if dot:
        cfg, ddg = build_cfg_and_ddg(buggy)
        click.echo(to_dot(buggy, cfg, ddg))
    for d in diags:
        click.echo(json.dumps(d, sort_keys=True), err=True)


if __name__ == "__main__":
    sys.exit(main())
