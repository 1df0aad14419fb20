"""HTTP client for backend capabilities.

mock:// and replay:// descriptors are served by in-process FastAPI apps, so
every call crosses the same wire schema as a remote deployment. Transport
failures are retried with exponential backoff; protocol errors are not.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from pathlib import Path

import httpx
from fastapi.testclient import TestClient

from ..errors import ContextOverflowError, ProtocolError, TransportError
from .mock import mock_backend_from_params
from .replay import FixtureRecorder, ReplayBackend, ReplayStore
from .server import build_app
from .wire import (
    BackendDescriptor,
    Capability,
    EmbedRequest,
    EmbedResponse,
    ExtractiveRequest,
    ExtractiveResponse,
    GenerateRequest,
    GenerateResponse,
    RESPONSE_MODELS,
    ROUTES,
)

ExtractiveResult = ExtractiveResponse


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    dimension: int


_replay_stores: dict[Path, ReplayStore] = {}
_replay_lock = threading.Lock()


def _load_replay_store(path: Path) -> ReplayStore:
    with _replay_lock:
        store = _replay_stores.get(path)
        if store is None:
            store = ReplayStore.load(path)
            _replay_stores[path] = store
        return store


def _excerpt(payload: str, limit: int = 200) -> str:
    return payload if len(payload) <= limit else payload[:limit] + "..."


class BackendClient:
    """One client per backend descriptor. Safe for concurrent use."""

    def __init__(
        self,
        descriptor: BackendDescriptor,
        recorder: FixtureRecorder | None = None,
        retries: int = 3,
        backoff: float = 0.05,
    ):
        self.descriptor = descriptor
        self.recorder = recorder
        self.retries = retries
        self.backoff = backoff
        self._http = self._open(descriptor)

    def _open(self, d: BackendDescriptor) -> httpx.Client:
        if d.endpoint.startswith(("http://", "https://")):
            return httpx.Client(base_url=d.endpoint, timeout=d.timeout)
        if d.endpoint.startswith("mock://"):
            backend = mock_backend_from_params(d.model_id, d.params)
            return TestClient(build_app(backend, d.model_id), raise_server_exceptions=False)
        if d.endpoint.startswith("replay://"):
            path = Path(d.endpoint[len("replay://") :] or d.params.get("fixtures", ""))
            store = _load_replay_store(path)
            backend = ReplayBackend(store, d.model_id)
            return TestClient(build_app(backend, d.model_id), raise_server_exceptions=False)
        raise ProtocolError(f"unsupported endpoint scheme: {d.endpoint!r}")

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "BackendClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _require(self, capability: Capability) -> None:
        if self.descriptor.capability is not capability:
            raise ProtocolError(
                f"backend {self.descriptor.model_id!r} has capability "
                f"{self.descriptor.capability.value}, not {capability.value}"
            )

    def _post(self, capability: Capability, body: dict) -> dict:
        route = ROUTES[capability]
        last_exc: Exception | None = None
        for attempt in range(self.retries):
            if attempt:
                time.sleep(self.backoff * (2 ** (attempt - 1)))
            try:
                resp = self._http.post(route, json=body)
            except httpx.TransportError as exc:
                last_exc = exc
                continue
            if resp.status_code >= 500:
                last_exc = TransportError(f"{route} -> HTTP {resp.status_code}: {_excerpt(resp.text)}")
                continue
            if resp.status_code >= 400:
                raise ProtocolError(f"{route} -> HTTP {resp.status_code}: {_excerpt(resp.text)}")
            try:
                payload = resp.json()
            except ValueError as exc:
                raise ProtocolError(f"{route}: non-JSON response: {_excerpt(resp.text)}") from exc
            try:
                RESPONSE_MODELS[capability].model_validate(payload)
            except Exception as exc:
                raise ProtocolError(f"{route}: malformed response ({exc}): {_excerpt(resp.text)}") from exc
            if self.recorder is not None:
                self.recorder.record(capability, self.descriptor.model_id, body, payload)
            return payload
        raise TransportError(
            f"{self.descriptor.model_id}: {route} failed after {self.retries} attempts: {last_exc}"
        )

    def extract_spans(self, question: str, context: str, top_k: int) -> ExtractiveResult:
        self._require(Capability.EXTRACTIVE_QA)
        if top_k < 1:
            raise ProtocolError(f"top_k must be >= 1, got {top_k}")
        if len(context) > self.descriptor.max_context:
            raise ContextOverflowError(
                f"context of {len(context)} chars exceeds max_context "
                f"{self.descriptor.max_context} for {self.descriptor.model_id!r}"
            )
        req = ExtractiveRequest(question=question, context=context, top_k=top_k)
        result = ExtractiveResponse.model_validate(self._post(Capability.EXTRACTIVE_QA, req.model_dump()))
        self._validate_extractive(result, context, top_k)
        return result

    def _validate_extractive(self, result: ExtractiveResult, context: str, top_k: int) -> None:
        if len(result.answers) > top_k:
            raise ProtocolError(f"backend returned {len(result.answers)} answers for top_k={top_k}")
        prev = 1.0
        for a in result.answers:
            if a.score > prev:
                raise ProtocolError("extractive scores are not descending")
            prev = a.score
            if a.end > len(context) or context[a.start : a.end] != a.text:
                raise ProtocolError(
                    f"extractive offsets [{a.start}, {a.end}) do not slice the context to {a.text!r}"
                )

    def generate(self, prompt: str, max_new: int = 256, temperature: float = 0.0) -> str:
        self._require(Capability.GENERATE)
        if temperature < 0:
            raise ProtocolError(f"temperature must be >= 0, got {temperature}")
        if len(prompt) > self.descriptor.max_context:
            raise ContextOverflowError(
                f"prompt of {len(prompt)} chars exceeds max_context "
                f"{self.descriptor.max_context} for {self.descriptor.model_id!r}"
            )
        req = GenerateRequest(prompt=prompt, max_new_tokens=max_new, temperature=temperature)
        payload = self._post(Capability.GENERATE, req.model_dump())
        return GenerateResponse.model_validate(payload).text

    def embed(self, texts: list[str]) -> list[EmbeddingVector]:
        self._require(Capability.EMBED)
        if not texts:
            raise ProtocolError("embed requires at least one text")
        req = EmbedRequest(texts=list(texts))
        payload = self._post(Capability.EMBED, req.model_dump())
        resp = EmbedResponse.model_validate(payload)
        if len(resp.embeddings) != len(texts):
            raise ProtocolError(
                f"embed returned {len(resp.embeddings)} vectors for {len(texts)} texts"
            )
        dims = {len(v) for v in resp.embeddings}
        if len(dims) != 1:
            raise ProtocolError(f"embedding dimensions disagree: {sorted(dims)}")
        dim = dims.pop()
        out = []
        for vec in resp.embeddings:
            if not any(v != 0.0 for v in vec):
                raise ProtocolError("embedding with zero norm")
            out.append(EmbeddingVector(values=tuple(vec), dimension=dim))
        return out
