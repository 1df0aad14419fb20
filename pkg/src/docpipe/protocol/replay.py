"""Replay backend: serves stored responses keyed by (capability, model_id,
request digest). Fixture format: JSONL of
{"capability", "model_id", "request_sha256", "response"}; an optional
"request" field keeps the raw body for inspection and re-recording."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from ..errors import ProtocolError
from .wire import (
    Capability,
    EmbedRequest,
    EmbedResponse,
    ExtractiveRequest,
    ExtractiveResponse,
    GenerateRequest,
    GenerateResponse,
    request_digest,
)


@dataclass(frozen=True)
class FixtureKey:
    capability: Capability
    model_id: str
    request_sha256: str


class ReplayStore:
    """Immutable view of a recorded fixture file."""

    def __init__(self, entries: dict[FixtureKey, dict[str, Any]]):
        self._entries = entries

    def __len__(self) -> int:
        return len(self._entries)

    def lookup(self, capability: Capability, model_id: str, body: dict[str, Any]) -> dict[str, Any]:
        key = FixtureKey(capability, model_id, request_digest(body))
        try:
            return self._entries[key]
        except KeyError:
            raise ProtocolError(
                f"replay key miss: capability={capability.value} model_id={model_id} "
                f"request_sha256={key.request_sha256}"
            ) from None

    @classmethod
    def load(cls, path: str | Path) -> "ReplayStore":
        p = Path(path)
        if not p.exists():
            raise ProtocolError(f"replay fixture file not found: {p}")
        entries: dict[FixtureKey, dict[str, Any]] = {}
        with p.open(encoding="utf-8") as fh:
            for i, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                    key = FixtureKey(
                        Capability(row["capability"]), row["model_id"], row["request_sha256"]
                    )
                    entries[key] = row["response"]
                except (KeyError, ValueError) as exc:
                    raise ProtocolError(f"{p.name}:{i}: malformed fixture line ({exc})") from exc
        return cls(entries)


class ReplayBackend:
    """Backend view of a ReplayStore for one model id."""

    def __init__(self, store: ReplayStore, model_id: str):
        self.store = store
        self.model_id = model_id

    def extractive_qa(self, req: ExtractiveRequest) -> ExtractiveResponse:
        body = req.model_dump()
        return ExtractiveResponse.model_validate(
            self.store.lookup(Capability.EXTRACTIVE_QA, self.model_id, body)
        )

    def generate(self, req: GenerateRequest) -> GenerateResponse:
        body = req.model_dump()
        return GenerateResponse.model_validate(
            self.store.lookup(Capability.GENERATE, self.model_id, body)
        )

    def embed(self, req: EmbedRequest) -> EmbedResponse:
        body = req.model_dump()
        return EmbedResponse.model_validate(self.store.lookup(Capability.EMBED, self.model_id, body))


class FixtureRecorder:
    """Appends (request, response) pairs in replay fixture format. Thread-safe."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._seen: set[FixtureKey] = set()

    def record(
        self,
        capability: Capability,
        model_id: str,
        request_body: dict[str, Any],
        response_body: dict[str, Any],
    ) -> None:
        key = FixtureKey(capability, model_id, request_digest(request_body))
        with self._lock:
            if key in self._seen:
                return
            self._seen.add(key)
            row = {
                "capability": capability.value,
                "model_id": model_id,
                "request_sha256": key.request_sha256,
                "request": request_body,
                "response": response_body,
            }
            with self.path.open("a", encoding="utf-8", newline="\n") as fh:
                fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
