"""FastAPI app serving any in-process backend over the wire protocol."""

from __future__ import annotations

from typing import Protocol

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from ..errors import ProtocolError
from .wire import (
    EmbedRequest,
    EmbedResponse,
    ExtractiveRequest,
    ExtractiveResponse,
    GenerateRequest,
    GenerateResponse,
)


class Backend(Protocol):
    def extractive_qa(self, req: ExtractiveRequest) -> ExtractiveResponse: ...

    def generate(self, req: GenerateRequest) -> GenerateResponse: ...

    def embed(self, req: EmbedRequest) -> EmbedResponse: ...


def build_app(backend: Backend, model_id: str = "backend") -> FastAPI:
    app = FastAPI(title=f"docpipe backend: {model_id}")

    @app.exception_handler(ProtocolError)
    async def _protocol_error(_request, exc: ProtocolError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.post("/v1/extractive_qa", response_model=ExtractiveResponse)
    def extractive_qa(req: ExtractiveRequest) -> ExtractiveResponse:
        return backend.extractive_qa(req)

    @app.post("/v1/generate", response_model=GenerateResponse)
    def generate(req: GenerateRequest) -> GenerateResponse:
        return backend.generate(req)

    @app.post("/v1/embed", response_model=EmbedResponse)
    def embed(req: EmbedRequest) -> EmbedResponse:
        return backend.embed(req)

    return app
