"""Request and response bodies for the HTTP endpoints."""

from pydantic import BaseModel


class FeatureRequest(BaseModel):
    images: list[str]


class FeatureResponse(BaseModel):
    dim: int
    vectors: list[list[float]]


class CompensateRequest(BaseModel):
    image: str
    prompt: str
    seed: int
    guidance_scale: float = 4.0


class CompensateResponse(BaseModel):
    image: str
    model_id: str
    steps: int
    strength: float


class HealthResponse(BaseModel):
    status: str
    model_ids: list[str]
