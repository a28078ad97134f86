"""Token-encoding kernels for the reference embedder.

The compiled Cython backend is preferred; a pure-numpy fallback with
bit-identical output is selected at import time when the extension is
unavailable.
"""

from . import _ref_embed_np as numpy_backend
from .params import DEFAULT_DIM, DEFAULT_SEED, fnv1a64

try:
    from . import _ref_embed_c as _impl

    BACKEND = "cython"
    cython_backend = _impl
except ImportError:  # extension not built
    _impl = numpy_backend
    BACKEND = "numpy"
    cython_backend = None

encode_hashes = _impl.encode_hashes

__all__ = [
    "BACKEND",
    "DEFAULT_DIM",
    "DEFAULT_SEED",
    "cython_backend",
    "encode_hashes",
    "fnv1a64",
    "numpy_backend",
]
