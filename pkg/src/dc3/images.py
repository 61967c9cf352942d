"""Raster I/O helpers: RGB8 arrays to and from PNG files, bytes, and base64.

Everything downstream (compensation, stitching, metrics) works on uint8
arrays of shape (height, width, 3). PNG is the only write format because it
is lossless; recompression noise would leak into the color statistics.
"""

from __future__ import annotations

import base64
import io
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import EmptyImage, UnreadableImage


def as_rgb8(array: np.ndarray) -> np.ndarray:
    """Validate and coerce to a (H, W, 3) uint8 array."""
    arr = np.asarray(array)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise EmptyImage(f"expected (H, W, 3) raster, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise EmptyImage(f"raster has a zero dimension: {arr.shape}")
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr.astype(np.float64)), 0, 255).astype(np.uint8)
    return arr


def load_rgb(path: Path | str, sample_id: str = "") -> np.ndarray:
    path = Path(path)
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise UnreadableImage(sample_id or path.name, str(path), str(exc)) from exc


def save_png(array: np.ndarray, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(as_rgb8(array), mode="RGB").save(path, format="PNG")


def to_png_bytes(array: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(as_rgb8(array), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def from_png_bytes(data: bytes, sample_id: str = "") -> np.ndarray:
    try:
        with Image.open(io.BytesIO(data)) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise UnreadableImage(sample_id, "<bytes>", str(exc)) from exc


def encode_png_base64(array: np.ndarray) -> str:
    return base64.b64encode(to_png_bytes(array)).decode("ascii")


def decode_png_base64(text: str, sample_id: str = "") -> np.ndarray:
    try:
        raw = base64.b64decode(text, validate=True)
    except (ValueError, TypeError) as exc:
        raise UnreadableImage(sample_id, "<base64>", str(exc)) from exc
    return from_png_bytes(raw, sample_id)
