"""Hue-variant generation: cool and warm recolorings of selected images.

Two interchangeable backends produce the variants. The HTTP backend posts the
image and a hue prompt to an image-to-image service and returns whatever the
model paints. The fallback backend applies a fixed per-channel gain, a cheap
white-balance shift toward blue (cool) or red (warm), so the whole pipeline
runs deterministically with no model in reach.

Prompt choice and per-variant seeds are derived from the caller's seed alone,
which keeps reruns reproducible under either backend: the cool variant uses
seed XOR 1, the warm variant seed XOR 2, and a second pair (when four
variants are requested) XOR 3 and XOR 4.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol, Sequence

import numpy as np
import requests

from .errors import (
    BackendError,
    BackendUnreachable,
    ConfigInvalid,
    DimensionMismatch,
    EmptyFamily,
)
from .images import as_rgb8, decode_png_base64, encode_png_base64
from .rng import SplitMix64

DEFAULT_GUIDANCE_SCALE = 4.0
COOL_SEED_XOR = 1
WARM_SEED_XOR = 2


class PromptFamily(str, Enum):
    COOL = "cool"
    WARM = "warm"


@dataclass(frozen=True)
class HuePrompt:
    text: str
    family: PromptFamily


# Instruction prompts steering color temperature, grouped by family.
DEFAULT_CATALOG: tuple[HuePrompt, ...] = (
    HuePrompt("rainy", PromptFamily.COOL),
    HuePrompt("snowy", PromptFamily.COOL),
    HuePrompt("infrared", PromptFamily.COOL),
    HuePrompt("underwater", PromptFamily.COOL),
    HuePrompt("frozen lake", PromptFamily.COOL),
    HuePrompt("sepia", PromptFamily.WARM),
    HuePrompt("sunny", PromptFamily.WARM),
    HuePrompt("daylight", PromptFamily.WARM),
    HuePrompt("vivid colors", PromptFamily.WARM),
    HuePrompt("golden hour", PromptFamily.WARM),
)

# Fallback white-balance gains per family, in (R, G, B) order.
_FALLBACK_GAINS = {
    PromptFamily.COOL: np.array([0.85, 0.95, 1.15]),
    PromptFamily.WARM: np.array([1.15, 1.05, 0.85]),
}


@dataclass(frozen=True)
class CompensationRequest:
    image: np.ndarray
    prompt: HuePrompt
    seed: int
    guidance_scale: float = DEFAULT_GUIDANCE_SCALE


@dataclass(frozen=True)
class VariantRecord:
    """One produced variant plus everything needed to reproduce it."""

    raster: np.ndarray
    prompt: HuePrompt
    seed: int


@dataclass(frozen=True)
class CompensatedPair:
    cool: np.ndarray
    warm: np.ndarray
    provenance: dict = field(default_factory=dict)


class Backend(Protocol):
    name: str

    def compensate(self, req: CompensationRequest) -> np.ndarray: ...


def _families(catalog: Sequence[HuePrompt]) -> tuple[list[HuePrompt], list[HuePrompt]]:
    cool = [p for p in catalog if p.family is PromptFamily.COOL]
    warm = [p for p in catalog if p.family is PromptFamily.WARM]
    if not cool:
        raise EmptyFamily(PromptFamily.COOL.value)
    if not warm:
        raise EmptyFamily(PromptFamily.WARM.value)
    return cool, warm


def pick_prompt_pairs(
    catalog: Sequence[HuePrompt], seed: int, pairs: int
) -> list[tuple[HuePrompt, HuePrompt]]:
    """Draw ``pairs`` (cool, warm) prompt pairs from one seeded stream."""
    cool, warm = _families(catalog)
    rng = SplitMix64(seed)
    out = []
    for _ in range(pairs):
        c = cool[rng.randrange(len(cool))]
        w = warm[rng.randrange(len(warm))]
        out.append((c, w))
    return out


def pick_prompts(
    catalog: Sequence[HuePrompt], seed: int
) -> tuple[HuePrompt, HuePrompt]:
    """One cool and one warm prompt, deterministic in the seed."""
    return pick_prompt_pairs(catalog, seed, 1)[0]


def fallback_transform(image: np.ndarray, family: PromptFamily) -> np.ndarray:
    """Per-channel gain, rounded half-to-even and clamped to [0, 255]."""
    img = as_rgb8(image).astype(np.float64)
    out = np.rint(img * _FALLBACK_GAINS[family])
    return np.clip(out, 0, 255).astype(np.uint8)


class FallbackBackend:
    """Model-free recoloring; pure function of (image, prompt family)."""

    name = "fallback"

    def compensate(self, req: CompensationRequest) -> np.ndarray:
        return fallback_transform(req.image, req.prompt.family)


class HttpBackend:
    """Client for the hue-compensation service.

    Transient failures (connection errors, 5xx) are retried up to ``retries``
    times with exponential backoff; 4xx responses fail immediately since the
    request will not get better on its own.
    """

    name = "http"

    def __init__(
        self,
        url: str,
        timeout: float = 30.0,
        retries: int = 2,
        backoff: float = 0.25,
        session: requests.Session | None = None,
    ):
        self.url = url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.session = session or requests.Session()

    def health_check(self) -> dict:
        try:
            resp = self.session.get(f"{self.url}/v1/health", timeout=self.timeout)
        except requests.RequestException as exc:
            raise BackendUnreachable(self.url, str(exc)) from exc
        if resp.status_code != 200:
            raise BackendError(resp.status_code, resp.text[:500])
        return resp.json()

    def _post(self, path: str, payload: dict) -> dict:
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * (2 ** (attempt - 1)))
            try:
                resp = self.session.post(
                    f"{self.url}{path}", json=payload, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last = BackendUnreachable(self.url, str(exc))
                continue
            if resp.status_code == 200:
                return resp.json()
            last = BackendError(resp.status_code, resp.text[:500])
            if resp.status_code < 500:
                break
        assert last is not None
        raise last

    def compensate(self, req: CompensationRequest) -> np.ndarray:
        image = as_rgb8(req.image)
        body = self._post(
            "/v1/compensate",
            {
                "image": encode_png_base64(image),
                "prompt": req.prompt.text,
                "seed": int(req.seed),
                "guidance_scale": float(req.guidance_scale),
            },
        )
        out = decode_png_base64(body["image"])
        if out.shape != image.shape:
            raise DimensionMismatch(
                f"service returned shape {out.shape}, expected {image.shape}"
            )
        return out


def compensate(req: CompensationRequest, backend: Backend) -> np.ndarray:
    """Run one request through a backend; output keeps the input's size."""
    image = as_rgb8(req.image)
    out = backend.compensate(
        CompensationRequest(image, req.prompt, req.seed, req.guidance_scale)
    )
    if out.shape != image.shape:
        raise DimensionMismatch(
            f"backend returned shape {out.shape}, expected {image.shape}"
        )
    return out


def compensate_variants(
    image: np.ndarray,
    catalog: Sequence[HuePrompt],
    seed: int,
    backend: Backend,
    count: int = 2,
    guidance_scale: float = DEFAULT_GUIDANCE_SCALE,
) -> list[VariantRecord]:
    """Produce ``count`` variants ordered cool, warm[, cool', warm'].

    Variant seeds are the base seed XORed with 1..count so each output is
    independently reproducible.
    """
    if count % 2 != 0 or count < 2:
        raise ConfigInvalid(f"variant count must be an even number >= 2, got {count}")
    pairs = pick_prompt_pairs(catalog, seed, count // 2)
    out: list[VariantRecord] = []
    for k, (cool_prompt, warm_prompt) in enumerate(pairs):
        for offset, prompt in ((1, cool_prompt), (2, warm_prompt)):
            variant_seed = seed ^ (2 * k + offset)
            raster = compensate(
                CompensationRequest(image, prompt, variant_seed, guidance_scale),
                backend,
            )
            out.append(VariantRecord(raster, prompt, variant_seed))
    return out


def compensate_pair(
    image: np.ndarray,
    catalog: Sequence[HuePrompt],
    seed: int,
    backend: Backend,
    guidance_scale: float = DEFAULT_GUIDANCE_SCALE,
    source_id: str = "",
) -> CompensatedPair:
    """One cool and one warm variant of ``image`` with full provenance."""
    records = compensate_variants(
        image, catalog, seed, backend, count=2, guidance_scale=guidance_scale
    )
    cool, warm = records
    return CompensatedPair(
        cool=cool.raster,
        warm=warm.raster,
        provenance={
            "source_id": source_id,
            "cool_prompt": cool.prompt.text,
            "warm_prompt": warm.prompt.text,
            "seeds": {"cool": cool.seed, "warm": warm.seed},
            "backend": getattr(backend, "name", type(backend).__name__),
        },
    )
