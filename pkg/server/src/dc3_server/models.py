"""Inference engines behind the endpoints.

Two models are served. The feature extractor is a ResNet-18 trunk whose
weights come from ``MODEL_DIR/resnet18.pt`` when configured, or from a
fixed-seed random initialization otherwise; either way inference runs in
eval mode on a single thread, so the same input always yields the same
vector on a given runtime. The compensator is a procedural recolorizer:
it maps the prompt to a cool or warm channel-gain profile, blends the
gain in with guidance_scale, and adds a small seeded jitter. It stands in
for a diffusion image-to-image checkpoint, which would slot in behind the
same interface as deployment config.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np
import torch
import torchvision

WEIGHT_SEED = 0x5EED
FEATURE_DIM = 512
INPUT_SIDE = 224

# ImageNet channel statistics, the standard input normalization for ResNets.
_MEAN = torch.tensor([0.485, 0.456, 0.406]).view(1, 3, 1, 1)
_STD = torch.tensor([0.229, 0.224, 0.225]).view(1, 3, 1, 1)

COOL_WORDS = ("rainy", "snowy", "infrared", "underwater", "frozen", "cold", "winter")
WARM_WORDS = ("sepia", "sunny", "daylight", "vivid", "golden", "sunset", "warm")

_GAINS = {
    "cool": np.array([0.85, 0.95, 1.15]),
    "warm": np.array([1.15, 1.05, 0.85]),
    "neutral": np.array([1.0, 1.0, 1.0]),
}

# Echoed in responses as provenance; a diffusion deployment would report
# its real sampler settings here.
RECOLOR_STEPS = 25
RECOLOR_STRENGTH = 0.6


class FeatureExtractor:
    """ResNet-18 trunk with the classifier head replaced by identity."""

    dim = FEATURE_DIM

    def __init__(self, weights_file: Path | None = None):
        torch.set_num_threads(1)
        if weights_file is None:
            torch.manual_seed(WEIGHT_SEED)
            net = torchvision.models.resnet18(weights=None)
            self.model_id = "resnet18-seeded/v1"
        else:
            net = torchvision.models.resnet18(weights=None)
            state = torch.load(weights_file, map_location="cpu", weights_only=True)
            net.load_state_dict(state)
            self.model_id = "resnet18/v1"
        net.fc = torch.nn.Identity()
        net.eval()
        self.net = net

    def state_dict(self) -> dict:
        state = dict(self.net.state_dict())
        # Restore the head so the file loads into a stock resnet18.
        torch.manual_seed(WEIGHT_SEED)
        stock = torchvision.models.resnet18(weights=None)
        for key, value in stock.fc.state_dict().items():
            state[f"fc.{key}"] = value
        return state

    @staticmethod
    def _prepare(image: np.ndarray) -> torch.Tensor:
        # Copy: PIL-backed arrays are read-only and torch wants writable.
        x = torch.from_numpy(np.array(image, dtype=np.uint8)).permute(2, 0, 1)
        x = x.unsqueeze(0).float() / 255.0
        x = torch.nn.functional.interpolate(
            x, size=(INPUT_SIDE, INPUT_SIDE), mode="bilinear", antialias=True
        )
        return (x - _MEAN) / _STD

    def extract(self, images: list[np.ndarray]) -> np.ndarray:
        """Return one dim-length float32 row per input image."""
        batch = torch.cat([self._prepare(img) for img in images], dim=0)
        with torch.no_grad():
            out = self.net(batch)
        return out.numpy().astype(np.float32)


class Recolorizer:
    """Prompt-keyed channel-gain recoloring, deterministic per seed."""

    model_id = "hue-recolor/v1"
    steps = RECOLOR_STEPS
    strength = RECOLOR_STRENGTH

    @staticmethod
    def family(prompt: str) -> str:
        text = prompt.lower()
        cool = sum(word in text for word in COOL_WORDS)
        warm = sum(word in text for word in WARM_WORDS)
        if cool > warm:
            return "cool"
        if warm > cool:
            return "warm"
        return "neutral"

    def recolor(
        self, image: np.ndarray, prompt: str, seed: int, guidance_scale: float
    ) -> np.ndarray:
        base = _GAINS[self.family(prompt)]
        # guidance_scale 0 leaves the image untouched; 8+ applies the
        # full profile. The default 4.0 lands halfway.
        blend = float(np.clip(guidance_scale / 8.0, 0.0, 1.0))
        jitter = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF).normal(0, 0.02, 3)
        gains = 1.0 + blend * (base - 1.0) + jitter
        out = np.rint(image.astype(np.float64) * gains)
        return np.clip(out, 0, 255).astype(np.uint8)


@dataclasses.dataclass
class ModelRegistry:
    """The models an app instance serves, loaded once at startup."""

    features: FeatureExtractor
    recolor: Recolorizer

    @classmethod
    def load(cls, model_dir: Path | None) -> "ModelRegistry":
        weights = None
        if model_dir is not None:
            weights = Path(model_dir) / "resnet18.pt"
            if not weights.is_file():
                raise FileNotFoundError(
                    f"MODEL_DIR is set but {weights} does not exist"
                )
        return cls(features=FeatureExtractor(weights), recolor=Recolorizer())

    @property
    def model_ids(self) -> list[str]:
        return [self.features.model_id, self.recolor.model_id]
