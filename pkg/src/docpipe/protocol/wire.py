"""Wire schema for the three model capabilities, plus backend descriptors.

All endpoints are HTTP POST with JSON bodies:
  /v1/extractive_qa {question, context, top_k} -> {answers: [{text, start, end, score}]}
  /v1/generate      {prompt, max_new_tokens, temperature} -> {text}
  /v1/embed         {texts: [...]} -> {embeddings: [[...]]}
"""

from __future__ import annotations

import hashlib
import json
from enum import Enum
from typing import Any

from pydantic import BaseModel, Field, field_validator


class Capability(str, Enum):
    EXTRACTIVE_QA = "extractive_qa"
    GENERATE = "generate"
    EMBED = "embed"


ROUTES = {
    Capability.EXTRACTIVE_QA: "/v1/extractive_qa",
    Capability.GENERATE: "/v1/generate",
    Capability.EMBED: "/v1/embed",
}


class ExtractiveRequest(BaseModel):
    question: str
    context: str
    top_k: int = Field(ge=1)


class ExtractiveAnswer(BaseModel):
    text: str
    start: int = Field(ge=0)
    end: int = Field(ge=1)
    score: float = Field(ge=0.0, le=1.0)


class ExtractiveResponse(BaseModel):
    answers: list[ExtractiveAnswer]


class GenerateRequest(BaseModel):
    prompt: str
    max_new_tokens: int = Field(ge=1)
    temperature: float = Field(ge=0.0)


class GenerateResponse(BaseModel):
    text: str


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1)


class EmbedResponse(BaseModel):
    embeddings: list[list[float]]


REQUEST_MODELS = {
    Capability.EXTRACTIVE_QA: ExtractiveRequest,
    Capability.GENERATE: GenerateRequest,
    Capability.EMBED: EmbedRequest,
}

RESPONSE_MODELS = {
    Capability.EXTRACTIVE_QA: ExtractiveResponse,
    Capability.GENERATE: GenerateResponse,
    Capability.EMBED: EmbedResponse,
}


class BackendDescriptor(BaseModel):
    """Identity and reachability of one model capability.

    endpoint schemes: http(s)://... for remote servers, mock:// for the
    deterministic in-process mock, replay://<fixture-path> for stored
    responses. `params` carries scheme-specific settings (mock seed and
    keyword table, replay path overrides).
    """

    model_id: str
    capability: Capability
    endpoint: str
    timeout: float = 30.0
    max_context: int = 8000
    params: dict[str, Any] = Field(default_factory=dict)

    @field_validator("timeout")
    @classmethod
    def _timeout_positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("timeout must be > 0")
        return v

    @field_validator("model_id")
    @classmethod
    def _model_id_nonempty(cls, v: str) -> str:
        if not v:
            raise ValueError("model_id must be nonempty")
        return v


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def request_digest(request_body: dict[str, Any]) -> str:
    """Digest used to key replay fixtures; canonical JSON of the wire body."""
    return hashlib.sha256(canonical_json(request_body).encode("utf-8")).hexdigest()
