"""Base64 PNG transport helpers.

Images travel inside JSON bodies as base64-encoded PNG strings. PNG is
lossless, so a round trip through these helpers is bit-exact.
"""

import base64
import binascii
import io

import numpy as np
from PIL import Image


class ImageDecodeError(ValueError):
    """The payload is not a decodable base64 PNG image."""


def decode_image(payload: str) -> np.ndarray:
    """Decode a base64 PNG string into an RGB uint8 array (H, W, 3)."""
    try:
        raw = base64.b64decode(payload, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ImageDecodeError(f"invalid base64: {exc}") from exc
    try:
        with Image.open(io.BytesIO(raw)) as img:
            rgb = img.convert("RGB")
    except Exception as exc:
        raise ImageDecodeError(f"undecodable image: {exc}") from exc
    return np.asarray(rgb, dtype=np.uint8)


def encode_image(image: np.ndarray) -> str:
    """Encode an RGB uint8 array as a base64 PNG string."""
    arr = np.ascontiguousarray(image, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB array, got {arr.shape}")
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")
