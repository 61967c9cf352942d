"""FastAPI application exposing the three model endpoints.

Routes:
    POST /v1/features    batch image feature extraction (limit 64)
    POST /v1/compensate  prompt-guided recoloring, dimensions preserved
    GET  /v1/health      readiness probe with served model ids

All malformed input is reported as 400, oversized feature batches as
413, and any request before models finish loading as 503.
"""

import os
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .codec import ImageDecodeError, decode_image, encode_image
from .models import ModelRegistry
from .schemas import (
    CompensateRequest,
    CompensateResponse,
    FeatureRequest,
    FeatureResponse,
    HealthResponse,
)

BATCH_LIMIT = 64

_FROM_ENV = object()


def create_app(model_dir=_FROM_ENV, load: bool = True) -> FastAPI:
    """Build the service; ``model_dir=None`` forces seeded weights.

    With the default sentinel the weight directory comes from the
    MODEL_DIR environment variable. ``load=False`` skips model loading
    entirely, leaving every endpoint in its 503 state.
    """
    if model_dir is _FROM_ENV:
        env = os.environ.get("MODEL_DIR", "").strip()
        model_dir = Path(env) if env else None

    app = FastAPI(title="dc3 model server", version="0.1.0")
    app.state.registry = ModelRegistry.load(model_dir) if load else None

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def registry() -> ModelRegistry:
        reg = app.state.registry
        if reg is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        return reg

    @app.get("/v1/health", response_model=HealthResponse)
    def health():
        reg = app.state.registry
        if reg is None:
            return JSONResponse(
                status_code=503, content={"status": "loading", "model_ids": []}
            )
        return HealthResponse(status="ok", model_ids=reg.model_ids)

    @app.post("/v1/features", response_model=FeatureResponse)
    def features(req: FeatureRequest):
        reg = registry()
        if len(req.images) > BATCH_LIMIT:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(req.images)} exceeds limit {BATCH_LIMIT}",
            )
        decoded = []
        for index, payload in enumerate(req.images):
            try:
                decoded.append(decode_image(payload))
            except ImageDecodeError as exc:
                raise HTTPException(
                    status_code=400,
                    detail=f"undecodable image at index {index}: {exc}",
                ) from exc
        vectors = reg.features.extract(decoded) if decoded else []
        return FeatureResponse(
            dim=reg.features.dim, vectors=[row.tolist() for row in vectors]
        )

    @app.post("/v1/compensate", response_model=CompensateResponse)
    def compensate(req: CompensateRequest):
        reg = registry()
        if not req.prompt.strip():
            raise HTTPException(status_code=400, detail="empty prompt")
        try:
            image = decode_image(req.image)
        except ImageDecodeError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        out = reg.recolor.recolor(image, req.prompt, req.seed, req.guidance_scale)
        return CompensateResponse(
            image=encode_image(out),
            model_id=reg.recolor.model_id,
            steps=reg.recolor.steps,
            strength=reg.recolor.strength,
        )

    return app
