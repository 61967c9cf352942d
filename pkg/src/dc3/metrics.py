"""Color statistics for comparing original and condensed datasets.

Two views of color diversity: a scalar colorfulness score per image (opponent
channel spread plus chroma magnitude), and smoothed per-channel density
curves of normalized pixel values. The density curves make color collapse
visible as a narrowing distribution; the report quantifies it as an L1 gap.

Both are computed exactly from 8-bit value counts, so results depend only on
pixel content, never on iteration order or sample size tricks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import EmptyDataset, EmptyImage, GridMismatch
from .images import as_rgb8

GRID_POINTS = 256
_GRID = np.linspace(0.0, 1.0, GRID_POINTS)
# Smallest usable bandwidth: one grid step. Below this the quadrature under a
# kernel spike between grid points loses mass and the integral check fails.
MIN_BANDWIDTH = 1.0 / 255.0
CHANNELS = ("R", "G", "B")


@dataclass(frozen=True)
class ColorfulnessComponents:
    sigma_rg: float
    sigma_yb: float
    mu_rg: float
    mu_yb: float
    sigma_root: float
    mu_root: float


@dataclass(frozen=True)
class ColorfulnessScore:
    score: float
    components: ColorfulnessComponents


@dataclass(frozen=True)
class DatasetColorfulness:
    mean: float
    min: float
    max: float
    count: int


@dataclass(frozen=True)
class KdeCurve:
    channel: str
    grid: np.ndarray      # (256,) points on [0, 1]
    density: np.ndarray   # (256,) nonnegative
    bandwidth: float


def colorfulness(image: np.ndarray) -> ColorfulnessScore:
    """Opponent-channel colorfulness of one image, on the 8-bit scale.

    rg = |R - G| per pixel; yb = (R + G)/2 - B kept signed. The score is the
    root of the two spreads plus 0.3 times the root of the two means, with
    population (divide-by-N) standard deviations.
    """
    img = as_rgb8(image).astype(np.float64)
    if img.shape[0] * img.shape[1] == 0:
        raise EmptyImage("image has no pixels")
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    rg = np.abs(r - g)
    yb = 0.5 * (r + g) - b
    sigma_rg = float(rg.std())
    sigma_yb = float(yb.std())
    mu_rg = float(rg.mean())
    mu_yb = float(yb.mean())
    sigma_root = math.hypot(sigma_rg, sigma_yb)
    mu_root = math.hypot(mu_rg, mu_yb)
    return ColorfulnessScore(
        score=sigma_root + 0.3 * mu_root,
        components=ColorfulnessComponents(
            sigma_rg, sigma_yb, mu_rg, mu_yb, sigma_root, mu_root
        ),
    )


def dataset_colorfulness(images: Iterable[np.ndarray]) -> DatasetColorfulness:
    """Mean per-image colorfulness over a dataset, with min and max."""
    scores = [colorfulness(img).score for img in images]
    if not scores:
        raise EmptyDataset("no images to score")
    return DatasetColorfulness(
        mean=float(np.mean(scores)),
        min=float(min(scores)),
        max=float(max(scores)),
        count=len(scores),
    )


def _channel_counts(images: Iterable[np.ndarray]) -> np.ndarray:
    """Pooled 8-bit value counts per channel, shape (3, 256)."""
    counts = np.zeros((3, 256), dtype=np.int64)
    empty = True
    for img in images:
        arr = as_rgb8(img)
        empty = False
        for c in range(3):
            counts[c] += np.bincount(arr[..., c].ravel(), minlength=256)
    if empty:
        raise EmptyDataset("no images to estimate a density from")
    return counts


def _weighted_quantile(values: np.ndarray, counts: np.ndarray, q: float) -> float:
    """Quantile of a repeated-value sample, linear interpolation between
    order statistics (the default numpy percentile rule)."""
    n = int(counts.sum())
    pos = q * (n - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, n - 1)
    cums = np.cumsum(counts)
    v_lo = float(values[np.searchsorted(cums, lo + 1)])
    v_hi = float(values[np.searchsorted(cums, hi + 1)])
    return v_lo + (pos - lo) * (v_hi - v_lo)


def silverman_bandwidth(values: np.ndarray, counts: np.ndarray) -> float:
    """Rule-of-thumb bandwidth 0.9 * min(sigma, IQR/1.34) * n^(-1/5).

    Degenerate spreads fall back to whichever of the two is positive, and the
    result is floored at one grid step so the quadrature stays honest.
    """
    n = int(counts.sum())
    mean = float((values * counts).sum() / n)
    var = float(((values - mean) ** 2 * counts).sum() / n)
    sigma = math.sqrt(var)
    iqr = _weighted_quantile(values, counts, 0.75) - _weighted_quantile(
        values, counts, 0.25
    )
    spreads = [s for s in (sigma, iqr / 1.34) if s > 0.0]
    if not spreads:
        return MIN_BANDWIDTH
    return max(0.9 * min(spreads) * n ** (-0.2), MIN_BANDWIDTH)


def _kde_from_counts(counts: np.ndarray, bandwidth: float) -> np.ndarray:
    """Gaussian KDE over [0, 1] with reflection at both boundaries.

    Sample values sit at k/255 so the 256-bin counts make the estimate exact,
    not an approximation.
    """
    n = int(counts.sum())
    values = _GRID
    # direct kernel plus reflections about 0 (at -v) and 1 (at 2 - v)
    deltas = np.concatenate(
        [
            _GRID[:, None] - values[None, :],
            _GRID[:, None] + values[None, :],
            _GRID[:, None] - (2.0 - values[None, :]),
        ],
        axis=1,
    )
    weights = np.concatenate([counts, counts, counts]).astype(np.float64)
    kernel = np.exp(-0.5 * (deltas / bandwidth) ** 2)
    norm = bandwidth * math.sqrt(2.0 * math.pi) * n
    return (kernel @ weights) / norm


def kde_rgb(
    images: Iterable[np.ndarray], bandwidth: float | None = None
) -> list[KdeCurve]:
    """Density curves of normalized pixel values, one per channel.

    Pixels are pooled across all images; bandwidth defaults to Silverman's
    rule per channel.
    """
    counts = _channel_counts(images)
    curves = []
    for c, name in enumerate(CHANNELS):
        h = (
            float(bandwidth)
            if bandwidth is not None
            else silverman_bandwidth(_GRID, counts[c])
        )
        if h <= 0.0:
            raise EmptyDataset(f"bandwidth must be positive, got {h}")
        curves.append(
            KdeCurve(
                channel=name,
                grid=_GRID.copy(),
                density=_kde_from_counts(counts[c], h),
                bandwidth=h,
            )
        )
    return curves


def curve_integral(curve: KdeCurve) -> float:
    return float(np.trapezoid(curve.density, curve.grid))


@dataclass(frozen=True)
class HomogenizationReport:
    """Per-channel L1 gap between two sets of density curves."""

    per_channel: dict
    mean: float


def homogenization_report(
    original: Sequence[KdeCurve], condensed: Sequence[KdeCurve]
) -> HomogenizationReport:
    """L1 distance between density curves, channel by channel.

    Zero means the condensed set reproduces the original color distribution
    on the grid; disjoint distributions approach 2.
    """
    if len(original) != len(condensed):
        raise GridMismatch(
            f"{len(original)} original curves vs {len(condensed)} condensed"
        )
    gaps = {}
    for a, b in zip(original, condensed):
        if a.channel != b.channel:
            raise GridMismatch(f"channel order differs: {a.channel} vs {b.channel}")
        if a.grid.shape != b.grid.shape or not np.array_equal(a.grid, b.grid):
            raise GridMismatch(f"grids differ on channel {a.channel}")
        gaps[a.channel] = float(
            np.trapezoid(np.abs(a.density - b.density), a.grid)
        )
    return HomogenizationReport(
        per_channel=gaps, mean=float(np.mean(list(gaps.values())))
    )


def iter_images(paths: Iterable) -> Iterator[np.ndarray]:
    """Lazily load rasters from paths; handy for dataset-level metrics."""
    from .images import load_rgb

    for p in paths:
        yield load_rgb(p)
