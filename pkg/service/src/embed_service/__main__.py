import argparse

import uvicorn

from .app import create_app
from .config import ServiceConfig


def main():
    parser = argparse.ArgumentParser(
        description="Serve per-token contextual embeddings over HTTP.")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8090)
    parser.add_argument("--model-ref", default="builtin")
    parser.add_argument("--dim", type=int, default=768)
    parser.add_argument("--max-tokens", type=int, default=1024)
    args = parser.parse_args()

    config = ServiceConfig(model_ref=args.model_ref, dim=args.dim,
                           max_tokens=args.max_tokens, host=args.host,
                           port=args.port)
    uvicorn.run(create_app(config), host=config.host, port=config.port)


if __name__ == "__main__":
    main()
