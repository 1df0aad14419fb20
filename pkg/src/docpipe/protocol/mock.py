"""Deterministic in-process backend for tests and offline harness runs.

Extractive answers come from keyword-table hits in the submitted context;
generation emits the canonical names of keywords found in the prompt, one
per line; embeddings are seeded hash projections with unit norm. Identical
(seed, request) pairs produce identical responses across process restarts.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import ProtocolError
from .wire import (
    EmbedRequest,
    EmbedResponse,
    ExtractiveAnswer,
    ExtractiveRequest,
    ExtractiveResponse,
    GenerateRequest,
    GenerateResponse,
)

NONE_COMPLETION = "none"


@dataclass(frozen=True)
class Keyword:
    """One recognizable surface string with its extraction score.

    `canonical` is what generation emits for this surface (defaults to the
    surface itself). `models`, when nonempty, limits the surface to those
    model ids so different mock models disagree like real ones do.
    """

    surface: str
    score: float = 0.9
    canonical: str | None = None
    models: tuple[str, ...] = ()

    def visible_to(self, model_id: str) -> bool:
        return not self.models or model_id in self.models

    def emit(self) -> str:
        return self.canonical if self.canonical is not None else self.surface


@dataclass(frozen=True)
class KeywordTable:
    """Selector -> keywords. A selector matches when it occurs (case-insensitively)
    in the extraction question or generation prompt."""

    entries: tuple[tuple[str, tuple[Keyword, ...]], ...]
    embedding_dim: int = 64

    def keywords_for(self, text: str, model_id: str) -> list[Keyword]:
        lowered = text.lower()
        out: list[Keyword] = []
        for selector, keywords in self.entries:
            if selector.lower() in lowered:
                out.extend(k for k in keywords if k.visible_to(model_id))
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "KeywordTable":
        entries = []
        for entry in d["entries"]:
            keywords = tuple(
                Keyword(
                    surface=k["surface"],
                    score=float(k.get("score", 0.9)),
                    canonical=k.get("canonical"),
                    models=tuple(k.get("models", ())),
                )
                for k in entry["keywords"]
            )
            entries.append((entry["selector"], keywords))
        return cls(entries=tuple(entries), embedding_dim=int(d.get("embedding_dim", 64)))

    @classmethod
    def load(cls, path: str | Path) -> "KeywordTable":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


_NUMBERED_LINE = re.compile(r"^\s*\d+\.\s?(.*)$")

_pattern_cache: dict[str, re.Pattern[str]] = {}


def _surface_pattern(surface: str) -> re.Pattern[str]:
    """Case-insensitive whole-token match, so 'R' never fires inside words."""
    pat = _pattern_cache.get(surface)
    if pat is None:
        pat = re.compile(rf"(?<!\w){re.escape(surface)}(?!\w)", re.IGNORECASE)
        _pattern_cache[surface] = pat
    return pat


@dataclass
class MockBackend:
    """Implements all three capabilities as pure functions of (seed, request)."""

    seed: int
    table: KeywordTable
    model_id: str = "mock"
    generation_mode: str = "keywords"  # keywords | echo | canned
    canned: tuple[tuple[str, str], ...] = field(default_factory=tuple)

    def extractive_qa(self, req: ExtractiveRequest) -> ExtractiveResponse:
        hits: dict[tuple[int, int], ExtractiveAnswer] = {}
        for kw in self.table.keywords_for(req.question, self.model_id):
            for m in _surface_pattern(kw.surface).finditer(req.context):
                key = (m.start(), m.end())
                prev = hits.get(key)
                if prev is None or kw.score > prev.score:
                    hits[key] = ExtractiveAnswer(
                        text=req.context[m.start() : m.end()],
                        start=m.start(),
                        end=m.end(),
                        score=kw.score,
                    )
        ordered = sorted(hits.values(), key=lambda a: (-a.score, a.start, a.end))
        return ExtractiveResponse(answers=ordered[: req.top_k])

    def generate(self, req: GenerateRequest) -> GenerateResponse:
        if self.generation_mode == "canned":
            for contains, completion in self.canned:
                if contains in req.prompt:
                    return GenerateResponse(text=completion)
            return GenerateResponse(text=NONE_COMPLETION)
        if self.generation_mode == "echo":
            lines = [m.group(1) for m in map(_NUMBERED_LINE.match, req.prompt.splitlines()) if m]
            return GenerateResponse(text="\n".join(lines) if lines else NONE_COMPLETION)

        found: list[tuple[int, str]] = []
        emitted: set[str] = set()
        for kw in self.table.keywords_for(req.prompt, self.model_id):
            m = _surface_pattern(kw.surface).search(req.prompt)
            if m is None:
                continue
            name = kw.emit()
            if name.lower() in emitted:
                continue
            emitted.add(name.lower())
            found.append((m.start(), name))
        found.sort()
        text = "\n".join(name for _, name in found) if found else NONE_COMPLETION
        return GenerateResponse(text=text)

    def embed(self, req: EmbedRequest) -> EmbedResponse:
        return EmbedResponse(embeddings=[self._embed_one(t) for t in req.texts])

    def _embed_one(self, text: str) -> list[float]:
        material = hashlib.sha256(f"{self.seed}:{text}".encode("utf-8")).digest()
        rng = np.random.default_rng(int.from_bytes(material[:8], "big"))
        vec = rng.standard_normal(self.table.embedding_dim)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:  # vanishingly unlikely; keep the non-zero-norm invariant
            vec = np.ones(self.table.embedding_dim)
            norm = float(np.linalg.norm(vec))
        return [float(x) for x in vec / norm]


def mock_backend_from_params(model_id: str, params: dict[str, Any]) -> MockBackend:
    """Build a mock from descriptor params: seed, table (inline dict or path),
    generation_mode, canned [[contains, text], ...]."""
    table_spec = params.get("table")
    if table_spec is None:
        table = KeywordTable(entries=())
    elif isinstance(table_spec, dict):
        table = KeywordTable.from_dict(table_spec)
    else:
        path = Path(table_spec)
        if not path.exists():
            raise ProtocolError(f"mock keyword table not found: {path}")
        table = KeywordTable.load(path)
    return MockBackend(
        seed=int(params.get("seed", 0)),
        table=table,
        model_id=model_id,
        generation_mode=params.get("generation_mode", "keywords"),
        canned=tuple((c["contains"], c["text"]) for c in params.get("canned", ())),
    )
