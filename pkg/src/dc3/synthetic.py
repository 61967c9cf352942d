"""Synthetic dataset generation for tests and desk-scale experiments.

Produces a complete on-disk dataset: a manifest, a binary feature matrix,
and one PNG per sample. Features are Gaussian blobs (optionally several
well-separated blobs per class, giving clean cluster structure), and images
are low-saturation textures whose channels stay close together, so hue
compensation has visible headroom to add color.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import MANIFEST_NAME, write_features
from .images import save_png


@dataclass(frozen=True)
class SyntheticSpec:
    classes: int = 3
    per_class: int = 30
    feature_dim: int = 8
    image_size: tuple[int, int] = (32, 32)   # (width, height)
    blobs_per_class: int | None = None       # None = one blob per class
    blob_spread: float = 1.0
    center_scale: float = 10.0
    seed: int = 0
    name: str = "synthetic"


def make_features(spec: SyntheticSpec) -> np.ndarray:
    """Per-class Gaussian features, shape (classes * per_class, dim)."""
    rng = np.random.default_rng(spec.seed)
    rows = []
    for c in range(spec.classes):
        if spec.blobs_per_class:
            centers = rng.normal(0.0, spec.center_scale, (spec.blobs_per_class, spec.feature_dim))
            counts = _split_evenly(spec.per_class, spec.blobs_per_class)
            for center, count in zip(centers, counts):
                rows.append(rng.normal(center, spec.blob_spread, (count, spec.feature_dim)))
        else:
            center = rng.normal(0.0, spec.center_scale, spec.feature_dim)
            rows.append(rng.normal(center, spec.blob_spread, (spec.per_class, spec.feature_dim)))
    return np.concatenate(rows).astype(np.float32)


def _split_evenly(total: int, parts: int) -> list[int]:
    base, rem = divmod(total, parts)
    return [base + (1 if i < rem else 0) for i in range(parts)]


def make_image(rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    """A low-saturation texture: one gray base tone plus mild channel tilt."""
    base = rng.uniform(70.0, 180.0)
    tilt = rng.uniform(-6.0, 6.0, 3)
    noise = rng.normal(0.0, 8.0, (height, width, 1))
    img = base + noise + tilt[None, None, :]
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def write_synthetic_dataset(root: Path | str, spec: SyntheticSpec = SyntheticSpec()) -> Path:
    """Write manifest + features + images under ``root``; returns the root."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    features = make_features(spec)
    write_features(features, root / "features.bin")

    rng = np.random.default_rng(spec.seed + 1)
    width, height = spec.image_size
    samples = []
    classes = [f"class{c}" for c in range(spec.classes)]
    row = 0
    for label in classes:
        for i in range(spec.per_class):
            sample_id = f"{label}_{i:04d}"
            rel = f"images/{label}/{sample_id}.png"
            save_png(make_image(rng, width, height), root / rel)
            samples.append(
                {"id": sample_id, "class": label, "image": rel, "feature_row": row}
            )
            row += 1

    manifest = {
        "name": spec.name,
        "classes": classes,
        "feature_file": "features.bin",
        "samples": samples,
    }
    with open(root / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return root
