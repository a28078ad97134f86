import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from fastapi.testclient import TestClient  # noqa: E402

from embed_service import ServiceConfig, create_app  # noqa: E402


@pytest.fixture(scope="session")
def client():
    return TestClient(create_app())


@pytest.fixture(scope="session")
def small_client():
    config = ServiceConfig(dim=32, max_tokens=16, max_request_tokens=64)
    return TestClient(create_app(config))
