import difflib
import json
import os
import shutil

import pytest
from click.testing import CliRunner

from conftest import SEEDS_DIR
from slicebug.cli import main

SMALL_CORPUS = {
    "targets.c": """
int register_widget(struct widget *w)
{
    int err;

    err = widget_attach(&w->dev);
    if (err) {
        kfree(w);
        return err;
    }
    notify(&w->dev);
    return 0;
}

int plain_helper(int n)
{
    int total = 0;

    while (n > 0) {
        total = total + n;
        n = n - 1;
    }
    return total;
}
""",
}

SEED_BUGGY = """
int register_gadget(struct gadget *g)
{
    int err;

    err = gadget_attach(&g->dev);
    if (err) {
        kfree(g);
        return err;
    }
    return 0;
}
"""

SEED_FIXED = SEED_BUGGY.replace("kfree(g);", "put_device(&g->dev);")


@pytest.fixture()
def workdir(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for name, src in SMALL_CORPUS.items():
        (corpus / name).write_text(src)
    (tmp_path / "buggy.c").write_text(SEED_BUGGY)
    (tmp_path / "fixed.c").write_text(SEED_FIXED)
    return tmp_path


def build(runner, workdir, extra=()):
    return runner.invoke(main, [
        "index", "--corpus", str(workdir / "corpus"),
        "--out", str(workdir / "idx"), *extra])


def test_index_command_builds_and_reports(workdir):
    runner = CliRunner()
    result = build(runner, workdir)
    assert result.exit_code == 0, result.output
    assert "indexed 2 functions" in result.output
    manifest = json.loads((workdir / "idx" / "manifest.json").read_text())
    assert manifest["counts"]["functions"] == 2


def test_index_persists_screen_top_k(workdir):
    runner = CliRunner()
    result = build(runner, workdir, ["--screen-top-k", "7"])
    assert result.exit_code == 0, result.output
    manifest = json.loads((workdir / "idx" / "manifest.json").read_text())
    assert manifest["default_screen_top_k"] == 7


def test_query_text_output(workdir):
    runner = CliRunner()
    assert build(runner, workdir).exit_code == 0
    result = runner.invoke(main, [
        "query", "--index", str(workdir / "idx"),
        "--buggy", str(workdir / "buggy.c"),
        "--fixed", str(workdir / "fixed.c"),
        "--function", "register_gadget"])
    assert result.exit_code == 0, result.output
    assert "register_widget" in result.output
    assert "#1  score" in result.output


def test_query_json_output_parses(workdir):
    runner = CliRunner()
    assert build(runner, workdir).exit_code == 0
    result = runner.invoke(main, [
        "query", "--index", str(workdir / "idx"),
        "--buggy", str(workdir / "buggy.c"),
        "--fixed", str(workdir / "fixed.c"),
        "--function", "register_gadget", "--format", "json"])
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload[0]["function_name"] == "register_widget"
    assert payload[0]["rank"] == 1


def test_query_with_diff_input(workdir):
    runner = CliRunner()
    assert build(runner, workdir).exit_code == 0
    diff = "".join(difflib.unified_diff(
        SEED_BUGGY.splitlines(keepends=True),
        SEED_FIXED.splitlines(keepends=True),
        fromfile="a/buggy.c", tofile="b/buggy.c"))
    (workdir / "fix.diff").write_text(diff)
    result = runner.invoke(main, [
        "query", "--index", str(workdir / "idx"),
        "--buggy", str(workdir / "buggy.c"),
        "--diff", str(workdir / "fix.diff"),
        "--function", "register_gadget"])
    assert result.exit_code == 0, result.output
    assert "register_widget" in result.output


def test_query_with_manual_criterion(workdir):
    runner = CliRunner()
    assert build(runner, workdir).exit_code == 0
    line = SEED_BUGGY.splitlines().index("        kfree(g);") + 1
    result = runner.invoke(main, [
        "query", "--index", str(workdir / "idx"),
        "--buggy", str(workdir / "buggy.c"),
        "--fixed", str(workdir / "fixed.c"),
        "--function", "register_gadget",
        "--criterion", f"{line}:g"])
    assert result.exit_code == 0, result.output
    assert "register_widget" in result.output


def test_query_missing_function_errors(workdir):
    runner = CliRunner()
    assert build(runner, workdir).exit_code == 0
    result = runner.invoke(main, [
        "query", "--index", str(workdir / "idx"),
        "--buggy", str(workdir / "buggy.c"),
        "--fixed", str(workdir / "fixed.c"),
        "--function", "no_such_function"])
    assert result.exit_code != 0
    assert "not found" in result.output


def test_query_requires_fixed_or_diff(workdir):
    runner = CliRunner()
    assert build(runner, workdir).exit_code == 0
    result = runner.invoke(main, [
        "query", "--index", str(workdir / "idx"),
        "--buggy", str(workdir / "buggy.c"),
        "--function", "register_gadget"])
    assert result.exit_code != 0
    assert "--fixed or --diff" in result.output


def test_bad_criterion_format_errors(workdir):
    runner = CliRunner()
    assert build(runner, workdir).exit_code == 0
    result = runner.invoke(main, [
        "query", "--index", str(workdir / "idx"),
        "--buggy", str(workdir / "buggy.c"),
        "--fixed", str(workdir / "fixed.c"),
        "--function", "register_gadget",
        "--criterion", "notaline"])
    assert result.exit_code != 0
    assert "LINE:VAR" in result.output


def test_bad_provider_spec_errors(workdir):
    runner = CliRunner()
    result = build(runner, workdir, ["--provider", "ftp://nope"])
    assert result.exit_code != 0


def test_inspect_command(workdir):
    runner = CliRunner()
    result = runner.invoke(main, [
        "inspect", "--buggy", str(workdir / "buggy.c"),
        "--fixed", str(workdir / "fixed.c"),
        "--function", "register_gadget"])
    assert result.exit_code == 0, result.output
    assert "seed signature:" in result.output
    assert "query slice:" in result.output
    assert "kfree(g);" in result.output


def test_inspect_dot_output(workdir):
    runner = CliRunner()
    result = runner.invoke(main, [
        "inspect", "--buggy", str(workdir / "buggy.c"),
        "--fixed", str(workdir / "fixed.c"),
        "--function", "register_gadget", "--dot"])
    assert result.exit_code == 0, result.output
    assert "digraph" in result.output


def test_query_against_bundled_seed(tmp_path):
    runner = CliRunner()
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    shutil.copy(os.path.join(SEEDS_DIR, "usb_clone", "buggy.c"),
                corpus / "clone.c")
    assert runner.invoke(main, [
        "index", "--corpus", str(corpus),
        "--out", str(tmp_path / "idx")]).exit_code == 0
    result = runner.invoke(main, [
        "query", "--index", str(tmp_path / "idx"),
        "--buggy", os.path.join(SEEDS_DIR, "usb_clone", "buggy.c"),
        "--fixed", os.path.join(SEEDS_DIR, "usb_clone", "fixed.c"),
        "--function", "comedi_usb_driver_register",
        "--format", "json"])
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload[0]["score"] == pytest.approx(1.0, abs=1e-4)
