import difflib

import pytest

from conftest import load_seed_pair, parse_function
from slicebug.errors import EmptyResult
from slicebug.seed import (
    apply_unified_diff,
    compute_patch,
    identify_key_variables,
    screen_root_statements,
)


def pair_from(buggy_src: str, fixed_src: str, name=None):
    return (parse_function(buggy_src, "b.c", name),
            parse_function(fixed_src, "f.c", name))


def test_empty_patch():
    src = "int f(int a)\n{\n    return a;\n}\n"
    patch = compute_patch(*pair_from(src, src))
    assert patch.is_empty


def test_similar_replacement_counts_as_modified():
    buggy, fixed = pair_from(
        "int f(int a)\n{\n    helper_one(a);\n    return a;\n}\n",
        "int f(int a)\n{\n    helper_two(a);\n    return a;\n}\n")
    patch = compute_patch(buggy, fixed)
    assert len(patch.modified) == 1
    assert not patch.deleted and not patch.inserted


def test_dissimilar_replacement_is_delete_plus_insert():
    buggy, fixed = pair_from(
        "int f(struct c *x)\n{\n    use(x);\n    kfree(x);\n    return 0;\n}\n",
        "int f(struct c *x)\n{\n    use(x);\n    put_device(&x->dev);\n    return 0;\n}\n")
    patch = compute_patch(buggy, fixed)
    assert [s.text for s in patch.deleted] == ["kfree(x);"]
    assert [s.text for s in patch.inserted] == ["put_device(&x->dev);"]


def test_key_variable_frequency_ranking():
    buggy, fixed = pair_from(
        "int f(int a, int b)\n{\n    use(a, b);\n    use2(a);\n    return 0;\n}\n",
        "int f(int a, int b)\n{\n    use(a, b);\n    use2(a);\n"
        "    check(a, a, b);\n    return 0;\n}\n")
    patch = compute_patch(buggy, fixed)
    # a occurs twice in the inserted statement, b once
    assert identify_key_variables(patch) == ["a"]


def test_key_variables_tie_keeps_all():
    buggy, fixed = pair_from(
        "int f(int a, int b)\n{\n    use(a);\n    use(b);\n    return 0;\n}\n",
        "int f(int a, int b)\n{\n    use(a);\n    use(b);\n"
        "    check(a, b);\n    return 0;\n}\n")
    patch = compute_patch(buggy, fixed)
    assert identify_key_variables(patch) == ["a", "b"]


def test_return_tainted_candidates_dropped():
    buggy, fixed = load_seed_pair("idr_cleanup")
    patch = compute_patch(buggy, fixed)
    # `id` appears in the inserted cleanup call but also in `return id;`
    assert identify_key_variables(patch) == ["map->idr"]


def test_key_variable_must_exist_in_buggy_version():
    buggy, fixed = pair_from(
        "int f(int a)\n{\n    use(a);\n    return 0;\n}\n",
        "int f(int a)\n{\n    int fresh = probe();\n    use(a);\n"
        "    check(fresh);\n    return 0;\n}\n")
    patch = compute_patch(buggy, fixed)
    with pytest.raises(EmptyResult):
        identify_key_variables(patch)


def test_rule1_deleted_statement_is_root():
    buggy, fixed = load_seed_pair("buf_refcount")
    patch = compute_patch(buggy, fixed)
    kvars = identify_key_variables(patch)
    sig = screen_root_statements(patch, kvars)
    assert [(s.text, kv) for s, kv in sig.pairs] == [("kfree(buf);", "buf")]


def test_rule2_nearest_preceding_statement_is_root():
    buggy, fixed = load_seed_pair("lock_release")
    patch = compute_patch(buggy, fixed)
    kvars = identify_key_variables(patch)
    assert kvars == ["cache->lock"]
    sig = screen_root_statements(patch, kvars)
    assert [s.text for s, _ in sig.pairs] == ["mutex_lock(&cache->lock);"]


def test_fig_style_pair_full_seed_analysis():
    buggy, fixed = load_seed_pair("fig1_device")
    patch = compute_patch(buggy, fixed)
    kvars = identify_key_variables(patch)
    assert kvars == ["client_dev", "dev"]
    sig = screen_root_statements(patch, kvars)
    by_kvar = {kv: s.text for s, kv in sig.pairs}
    assert by_kvar == {
        "client_dev": "kfree(client_dev);",
        "dev": "rc = device_register(dev);",
    }


def test_root_statement_pairs_deduplicated():
    buggy, fixed = pair_from(
        "int f(int a)\n{\n    set(a);\n    use(a);\n    drop(a);\n    return 0;\n}\n",
        "int f(int a)\n{\n    set(a);\n    use(a);\n    return 0;\n}\n")
    patch = compute_patch(buggy, fixed)
    sig = screen_root_statements(patch, ["a"])
    assert len(sig.pairs) == len(set((s.id, kv) for s, kv in sig.pairs))


def test_apply_unified_diff_round_trip():
    with open("tests/data/seeds/fig1_device/buggy.c", encoding="utf-8") as fh:
        buggy_src = fh.read()
    with open("tests/data/seeds/fig1_device/fixed.c", encoding="utf-8") as fh:
        fixed_src = fh.read()
    diff = "".join(difflib.unified_diff(
        buggy_src.splitlines(keepends=True),
        fixed_src.splitlines(keepends=True),
        fromfile="a/buggy.c", tofile="b/buggy.c"))
    assert apply_unified_diff(buggy_src, diff) == fixed_src
