"""HTTP sidecar serving per-token contextual embeddings."""

from .app import create_app
from .config import ServiceConfig
from .model import DeterministicEncoder

__all__ = ["DeterministicEncoder", "ServiceConfig", "create_app"]
