"""FastAPI application serving the four /v1 capabilities plus /v1/health."""

from __future__ import annotations

import base64

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .adapters import AdapterRegistry, EmptyInput, ModelUnavailable, UndecodableImage


class CaptionRequest(BaseModel):
    image_b64: str
    min_confidence: float = Field(ge=0.0, le=1.0)


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1)


class GenerateRequest(BaseModel):
    prompt: str = Field(min_length=1)
    max_length: int = Field(ge=1)
    temperature: float = Field(ge=0.0)


class ImageRequest(BaseModel):
    prompt: str = Field(min_length=1)
    height: int = Field(ge=8)
    width: int = Field(ge=8)
    seed: int = Field(ge=0)


def create_app(registry: AdapterRegistry) -> FastAPI:
    app = FastAPI(title="cogito-sidecar", docs_url=None, redoc_url=None)

    def guard(call):
        try:
            return call()
        except UndecodableImage as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except EmptyInput as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except ModelUnavailable as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc

    @app.post("/v1/caption")
    def caption(request: CaptionRequest) -> dict:
        try:
            image_bytes = base64.b64decode(request.image_b64, validate=True)
        except Exception as exc:
            raise HTTPException(status_code=400, detail=f"bad base64: {exc}") from exc
        detections = guard(
            lambda: registry.caption.detect_and_caption(
                image_bytes, request.min_confidence
            )
        )
        response_id = "resp-" + _digest_bytes(image_bytes)[:16]
        return {
            "response_id": response_id,
            "detections": [
                {
                    "caption": d.caption,
                    "confidence": d.confidence,
                    "bbox": list(d.bbox),
                }
                for d in detections
            ],
        }

    @app.post("/v1/embed")
    def embed(request: EmbedRequest) -> dict:
        vectors, dim = guard(lambda: registry.embed.embed(request.texts))
        return {"vectors": vectors, "dim": dim}

    @app.post("/v1/generate")
    def generate(request: GenerateRequest) -> dict:
        text = guard(
            lambda: registry.generate.generate(
                request.prompt, request.max_length, request.temperature
            )
        )
        return {"text": text}

    @app.post("/v1/image")
    def image(request: ImageRequest) -> dict:
        png = guard(
            lambda: registry.image.image(
                request.prompt, request.height, request.width, request.seed
            )
        )
        return {"png_b64": base64.b64encode(png).decode("ascii")}

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "models": registry.config.model_map()}

    return app


def _digest_bytes(data: bytes) -> str:
    import hashlib

    return hashlib.sha256(data).hexdigest()
