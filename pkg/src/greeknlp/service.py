"""HTTP annotation service.

Stateless JSON-over-HTTP front end: models load once at startup, every
request gets an isolated pipeline view over the shared immutable models.
``POST /process`` returns exactly the canonical document JSON that the
library and CLI produce, so the three entry points are byte-identical.
Errors carry a machine-readable ``code`` and ``message``.
"""

from __future__ import annotations

import os
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import container as container_mod
from .pipeline import (MODEL_FILES, PROCESSOR_NAMES, Pipeline, PipelineError,
                       default_models_dir, doc_to_json_str)

MAX_TEXT_BYTES = 64 * 1024


class TokenOut(BaseModel):
    index: int
    form: str
    upos: Optional[str]
    feats: Optional[dict[str, str]]
    ner: Optional[str]
    head: Optional[int]
    deprel: Optional[str]


class SentenceOut(BaseModel):
    tokens: list[TokenOut]


class ProcessResponse(BaseModel):
    text: str
    transliterated: Optional[str]
    normalized: bool
    sentences: list[SentenceOut]


class ProcessRequest(BaseModel):
    text: str
    processors: list[str]


class ErrorBody(BaseModel):
    code: str
    message: str


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status, self.code, self.message = status, code, message


def _load_available(models_dir) -> dict[str, object]:
    loaded: dict[str, object] = {}
    for name in PROCESSOR_NAMES:
        path = models_dir / MODEL_FILES[name]
        if not path.exists():
            continue
        cont = container_mod.load_container(path)
        if name == "pos":
            loaded[name] = container_mod.unpack_tagger(cont)
        elif name == "ner":
            loaded[name] = container_mod.unpack_ner(cont)
        elif name == "dp":
            loaded[name] = container_mod.unpack_parser(cont)
        else:
            loaded[name] = container_mod.unpack_g2g(cont)
    return loaded


def create_app(models_dir: Optional[os.PathLike | str] = None,
               max_text_bytes: int = MAX_TEXT_BYTES,
               decoder: str = "greedy") -> FastAPI:
    from pathlib import Path

    mdir = Path(models_dir) if models_dir is not None else default_models_dir()
    loaded = _load_available(mdir)

    app = FastAPI(
        title="Greek NLP service",
        description="POS/morphological tagging, dependency parsing, NER and "
                    "Greeklish-to-Greek transliteration for modern Greek text.",
        version="0.1.0",
    )

    @app.exception_handler(ServiceError)
    async def service_error_handler(_req: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422,
                            content={"code": "invalid_body", "message": str(exc.errors())})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "models": sorted(loaded)}

    @app.post("/process", response_model=ProcessResponse, responses={
        400: {"model": ErrorBody}, 413: {"model": ErrorBody}, 422: {"model": ErrorBody}})
    def process(request: ProcessRequest) -> Response:
        if len(request.text.encode("utf-8")) > max_text_bytes:
            raise ServiceError(413, "payload_too_large",
                               f"text exceeds {max_text_bytes} bytes")
        try:
            spec = ",".join(request.processors)
            pipeline = Pipeline.from_loaded(spec, loaded, decoder=decoder)
        except PipelineError as exc:
            code = "model_unavailable" if "missing model" in str(exc) else "invalid_processor"
            raise ServiceError(400, code, str(exc)) from None
        doc = pipeline.run(request.text)
        return Response(content=doc_to_json_str(doc).encode("utf-8"),
                        media_type="application/json")

    return app


def serve(models_dir=None, host: str = "127.0.0.1", port: int = 8000,
          decoder: str = "greedy") -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(create_app(models_dir, decoder=decoder), host=host, port=port)
