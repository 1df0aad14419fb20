"""Backend wire protocol: schema, client, deterministic mock, replay, server."""

from .client import BackendClient, EmbeddingVector, ExtractiveResult
from .mock import Keyword, KeywordTable, MockBackend, mock_backend_from_params
from .replay import FixtureRecorder, ReplayBackend, ReplayStore
from .server import build_app
from .wire import (
    BackendDescriptor,
    Capability,
    EmbedRequest,
    EmbedResponse,
    ExtractiveAnswer,
    ExtractiveRequest,
    ExtractiveResponse,
    GenerateRequest,
    GenerateResponse,
    request_digest,
)

__all__ = [
    "BackendClient",
    "BackendDescriptor",
    "Capability",
    "EmbedRequest",
    "EmbedResponse",
    "EmbeddingVector",
    "ExtractiveAnswer",
    "ExtractiveRequest",
    "ExtractiveResponse",
    "ExtractiveResult",
    "FixtureRecorder",
    "GenerateRequest",
    "GenerateResponse",
    "Keyword",
    "KeywordTable",
    "MockBackend",
    "ReplayBackend",
    "ReplayStore",
    "build_app",
    "mock_backend_from_params",
    "request_digest",
]
