from dataclasses import dataclass


@dataclass
class ServiceConfig:
    model_ref: str = "builtin"
    dim: int = 768
    max_tokens: int = 1024
    host: str = "127.0.0.1"
    port: int = 8090
    # hard cap on the number of tokens accepted in a single request; larger
    # payloads are rejected with 413 rather than silently truncated away
    max_request_tokens: int = 8192
