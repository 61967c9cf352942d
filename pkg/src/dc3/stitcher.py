"""Fusing hue variants into one image by assigning regions to sources.

Every strategy partitions the pixel grid and copies each region verbatim from
one input variant; nothing is blended or resampled, so any output pixel can
be traced back to a source. The seeded strategies (pixel mask, grid) draw
their region assignment from the package's splitmix64 stream and are fully
reproducible.

Strategies, two inputs unless noted:
  half2      left half from variant 0, right half from variant 1
  quarter4   four inputs; quadrants TL, TR, BL, BR map to variants 0..3
  pixels:F   a seeded uniform mask sends round(F * W * H) pixels to variant 0
  grid:N     N x N cells shuffled; ceil(N^2 / 2) cells go to variant 0
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigInvalid, DimensionMismatch, WrongVariantCount
from .images import as_rgb8
from .rng import SplitMix64


class StitchKind(str, Enum):
    HALF2 = "half2"
    QUARTER4 = "quarter4"
    PIXELMASK = "pixels"
    GRID = "grid"


@dataclass(frozen=True)
class StitchStrategy:
    kind: StitchKind = StitchKind.HALF2
    fraction: float = 0.5   # PIXELMASK only: share of pixels from variant 0
    grid_n: int = 8         # GRID only: cells per side

    def spec_string(self) -> str:
        if self.kind is StitchKind.PIXELMASK:
            return f"pixels:{self.fraction:g}"
        if self.kind is StitchKind.GRID:
            return f"grid:{self.grid_n}"
        return self.kind.value

    @property
    def variant_count(self) -> int:
        return 4 if self.kind is StitchKind.QUARTER4 else 2


def parse_strategy(text: str) -> StitchStrategy:
    """Parse a CLI strategy string: half2, quarter4, pixels:F, or grid:N."""
    head, _, arg = text.strip().lower().partition(":")
    if head == StitchKind.HALF2.value and not arg:
        return StitchStrategy(StitchKind.HALF2)
    if head == StitchKind.QUARTER4.value and not arg:
        return StitchStrategy(StitchKind.QUARTER4)
    if head == StitchKind.PIXELMASK.value:
        try:
            fraction = float(arg) if arg else 0.5
        except ValueError:
            raise ConfigInvalid(f"bad pixel fraction in stitch strategy {text!r}")
        if not 0.0 <= fraction <= 1.0:
            raise ConfigInvalid(f"pixel fraction must be in [0, 1], got {fraction}")
        return StitchStrategy(StitchKind.PIXELMASK, fraction=fraction)
    if head == StitchKind.GRID.value:
        try:
            n = int(arg) if arg else 8
        except ValueError:
            raise ConfigInvalid(f"bad grid size in stitch strategy {text!r}")
        if n < 1:
            raise ConfigInvalid(f"grid size must be >= 1, got {n}")
        return StitchStrategy(StitchKind.GRID, grid_n=n)
    raise ConfigInvalid(f"unknown stitch strategy {text!r}")


def _grid_edges(extent: int, n: int) -> list[tuple[int, int]]:
    """Cell bounds along one axis; the last cell absorbs the remainder."""
    step = extent // n
    edges = []
    for i in range(n):
        lo = i * step
        hi = (i + 1) * step if i < n - 1 else extent
        edges.append((lo, hi))
    return edges


def provenance_mask(
    strategy: StitchStrategy, seed: int, width: int, height: int
) -> np.ndarray:
    """Per-pixel source index, shape (height, width).

    The mask alone determines the stitch: output[p] = variants[mask[p]][p].
    """
    if width < 1 or height < 1:
        raise DimensionMismatch(f"degenerate raster {width}x{height}")
    mask = np.zeros((height, width), dtype=np.int64)

    if strategy.kind is StitchKind.HALF2:
        mask[:, width // 2 :] = 1
        return mask

    if strategy.kind is StitchKind.QUARTER4:
        h2, w2 = height // 2, width // 2
        mask[:h2, w2:] = 1
        mask[h2:, :w2] = 2
        mask[h2:, w2:] = 3
        return mask

    if strategy.kind is StitchKind.PIXELMASK:
        total = width * height
        keep = int(np.floor(strategy.fraction * total + 0.5))
        perm = SplitMix64(seed).permutation(total)
        flat = np.ones(total, dtype=np.int64)
        flat[np.asarray(perm[:keep], dtype=np.int64)] = 0
        return flat.reshape(height, width)

    n = strategy.grid_n
    if height < n or width < n:
        raise DimensionMismatch(
            f"{width}x{height} raster cannot hold a {n}x{n} cell grid"
        )
    cells = n * n
    keep = (cells + 1) // 2
    perm = SplitMix64(seed).permutation(cells)
    cell_source = np.ones(cells, dtype=np.int64)
    cell_source[np.asarray(perm[:keep], dtype=np.int64)] = 0
    rows = _grid_edges(height, n)
    cols = _grid_edges(width, n)
    for i, (r0, r1) in enumerate(rows):
        for j, (c0, c1) in enumerate(cols):
            mask[r0:r1, c0:c1] = cell_source[i * n + j]
    return mask


def stitch(
    variants: list[np.ndarray], strategy: StitchStrategy, seed: int
) -> np.ndarray:
    """Compose one raster from equal-size variants per the strategy's mask."""
    expected = strategy.variant_count
    if len(variants) != expected:
        raise WrongVariantCount(expected, len(variants))
    rasters = [as_rgb8(v) for v in variants]
    shape = rasters[0].shape
    for r in rasters[1:]:
        if r.shape != shape:
            raise DimensionMismatch(
                f"variant shapes differ: {shape} vs {r.shape}"
            )
    height, width = shape[0], shape[1]
    mask = provenance_mask(strategy, seed, width, height)
    out = np.empty(shape, dtype=np.uint8)
    for source in range(expected):
        sel = mask == source
        out[sel] = rasters[source][sel]
    return out
