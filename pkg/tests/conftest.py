import json
import os

import pytest

from slicebug.code_model import extract_functions
from slicebug.embedding import ReferenceEmbedder
from slicebug.index_store import build_index

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
CORPUS_DIR = os.path.join(DATA_DIR, "corpus")
SEEDS_DIR = os.path.join(DATA_DIR, "seeds")


def parse_function(source: str, file_origin: str = "test.c", name: str | None = None):
    funcs = extract_functions(source, file_origin)
    if name is None:
        assert len(funcs) == 1, f"expected one function, got {len(funcs)}"
        return funcs[0]
    return next(f for f in funcs if f.name == name)


def load_seed_pair(pair_name: str):
    """(buggy Function, fixed Function) for a bundled seed pair."""
    info = planted_pairs()[pair_name]
    out = []
    for variant in ("buggy", "fixed"):
        path = os.path.join(SEEDS_DIR, pair_name, f"{variant}.c")
        with open(path, encoding="utf-8") as fh:
            source = fh.read()
        out.append(parse_function(source, f"{pair_name}/{variant}.c",
                                  info["function"]))
    return tuple(out)


def planted_pairs() -> dict:
    with open(os.path.join(DATA_DIR, "pairs.json"), encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def provider():
    return ReferenceEmbedder()


@pytest.fixture(scope="session")
def small_provider():
    """Lower-dimensional embedder for cheap unit tests."""
    return ReferenceEmbedder(dim=64)


@pytest.fixture(scope="session")
def desk_index(tmp_path_factory, provider):
    out = tmp_path_factory.mktemp("desk_index")
    return build_index(CORPUS_DIR, str(out), provider)
