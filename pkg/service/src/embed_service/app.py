"""FastAPI application implementing the embedding wire protocol.

GET /info    -> provider identity (name, version, dim, max_tokens, mask_token)
POST /encode -> {"dim": d, "vectors": [...]}, one vector per input token

Errors: 400 malformed input, 413 oversized request, 503 until the model
has loaded and passed its startup probe.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import ServiceConfig
from .model import load_encoder


class EncodeRequest(BaseModel):
    tokens: list[str]
    mask_positions: list[int] = []


def _probe(encoder, expected_dim: int):
    """Verify at startup that reported and actual dimensions agree."""
    out = encoder.encode(["probe"])
    if out.shape != (1, expected_dim):
        raise RuntimeError(
            f"model produced dim {out.shape[1]}, config says {expected_dim}")


def create_app(config: ServiceConfig | None = None,
               preload: bool = True) -> FastAPI:
    if config is None:
        config = ServiceConfig()
    app = FastAPI(title="embed-service")
    state = {"encoder": None}

    def load():
        encoder = load_encoder(config.model_ref, config.dim,
                               config.max_tokens)
        _probe(encoder, config.dim)
        state["encoder"] = encoder

    if preload:
        load()
    else:
        app.on_event("startup")(load)

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"error": "malformed request"})

    def unavailable():
        return JSONResponse(status_code=503,
                            content={"error": "model is loading"})

    @app.get("/info")
    def info():
        encoder = state["encoder"]
        if encoder is None:
            return unavailable()
        return {
            "name": encoder.name,
            "version": encoder.version,
            "dim": encoder.dim,
            "max_tokens": encoder.max_tokens,
            "mask_token": encoder.mask_token,
        }

    @app.post("/encode")
    def encode(req: EncodeRequest):
        encoder = state["encoder"]
        if encoder is None:
            return unavailable()
        if not req.tokens:
            return JSONResponse(status_code=400,
                                content={"error": "tokens must be non-empty"})
        if len(req.tokens) > config.max_request_tokens:
            return JSONResponse(
                status_code=413,
                content={"error": f"request exceeds "
                                  f"{config.max_request_tokens} tokens"})
        for pos in req.mask_positions:
            if not 0 <= pos < len(req.tokens):
                return JSONResponse(
                    status_code=400,
                    content={"error": f"mask position {pos} out of range"})
        vectors = encoder.encode(req.tokens, req.mask_positions)
        return {
            "dim": encoder.dim,
            "vectors": [[float(x) for x in row] for row in vectors],
        }

    return app
