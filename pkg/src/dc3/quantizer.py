"""Per-class binning of feature vectors with deterministic k-means.

Samples are grouped into bins by Lloyd iteration under squared Euclidean
distance, with k-means++ seeding driven by the package's splitmix64 stream so
a (features, bin_count, seed) triple pins the partition exactly, on any
machine. Ties in the nearest-centroid rule always go to the lowest bin index,
and the stored assignment is re-derived from the final centroids, so at
convergence every sample provably sits in its argmin bin.

Features are taken as given; no normalization is applied here. Callers that
want unit-norm clustering normalize before calling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyInput
from .rng import ALGORITHM, SplitMix64

DEFAULT_BIN_COUNT = 10
DEFAULT_MAX_ITERS = 100
DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class BinPartition:
    """Result of clustering one class: centroids, per-sample bin, and cost."""

    class_label: str
    bin_count: int
    centroids: np.ndarray        # (bin_count, dim) float64
    assignment: np.ndarray       # (n,) int64, values in [0, bin_count)
    inertia: float               # sum of squared distances to assigned centroids
    inertia_history: list[float] = field(default_factory=list)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.bin_count)

    def members(self, bin_index: int) -> np.ndarray:
        """Sample indices assigned to one bin, ascending."""
        return np.flatnonzero(self.assignment == bin_index)

    def to_json_dict(self) -> dict:
        return {
            "class": self.class_label,
            "bin_count": self.bin_count,
            "rng": ALGORITHM,
            "centroids": self.centroids.tolist(),
            "assignment": self.assignment.tolist(),
            "inertia": self.inertia,
            "inertia_history": list(self.inertia_history),
        }

    @classmethod
    def from_json_dict(cls, raw: dict) -> "BinPartition":
        return cls(
            class_label=raw["class"],
            bin_count=int(raw["bin_count"]),
            centroids=np.asarray(raw["centroids"], dtype=np.float64),
            assignment=np.asarray(raw["assignment"], dtype=np.int64),
            inertia=float(raw["inertia"]),
            inertia_history=[float(x) for x in raw["inertia_history"]],
        )


def _sq_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, shape (n, bin_count)."""
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nmd,nmd->nm", diff, diff)


def assign(point: np.ndarray, centroids: np.ndarray) -> int:
    """Index of the nearest centroid by squared distance; ties take the
    smallest index."""
    point = np.asarray(point, dtype=np.float64)
    centroids = np.asarray(centroids, dtype=np.float64)
    if point.ndim != 1 or centroids.ndim != 2 or point.shape[0] != centroids.shape[1]:
        raise DimensionMismatch(
            f"point has dim {point.shape}, centroids have shape {centroids.shape}"
        )
    return int(_sq_distances(point[None, :], centroids)[0].argmin())


def _weighted_pick(rng: SplitMix64, weights: np.ndarray) -> int:
    """Draw an index with probability proportional to ``weights``.

    Falls back to a uniform draw when all weights vanish (duplicate points)."""
    total = float(weights.sum())
    if total <= 0.0:
        return rng.randrange(len(weights))
    u = rng.next_float() * total
    cums = np.cumsum(weights)
    return min(int(np.searchsorted(cums, u, side="right")), len(weights) - 1)


def _kmeanspp_init(points: np.ndarray, bin_count: int, rng: SplitMix64) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((bin_count, points.shape[1]), dtype=np.float64)
    centroids[0] = points[rng.randrange(n)]
    if bin_count == 1:
        return centroids
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for k in range(1, bin_count):
        centroids[k] = points[_weighted_pick(rng, d2)]
        if k + 1 < bin_count:
            d2 = np.minimum(d2, ((points - centroids[k]) ** 2).sum(axis=1))
    return centroids


def _repair_empty(labels: np.ndarray, dists: np.ndarray, bin_count: int) -> bool:
    """Fill empty bins by moving in the point farthest from its own centroid.

    Donor bins must keep at least one member. Returns True if any label moved;
    the caller must then run another iteration before declaring convergence.
    """
    moved = False
    counts = np.bincount(labels, minlength=bin_count)
    taken: set[int] = set()
    for j in range(bin_count):
        if counts[j] > 0:
            continue
        candidates = [
            i for i in range(len(labels)) if i not in taken and counts[labels[i]] > 1
        ]
        if not candidates:
            break
        own = np.array([dists[i, labels[i]] for i in candidates])
        pick = candidates[int(own.argmax())]
        counts[labels[pick]] -= 1
        labels[pick] = j
        counts[j] += 1
        taken.add(pick)
        moved = True
    return moved


def kmeans_partition(
    features: np.ndarray,
    bin_count: int = DEFAULT_BIN_COUNT,
    seed: int = 0,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    class_label: str = "",
) -> BinPartition:
    """Cluster one class's feature rows into at most ``bin_count`` bins.

    ``bin_count`` is clamped to the number of samples. Iteration stops when
    the largest centroid shift drops below ``tol`` (with no empty-bin repair
    pending) or after ``max_iters`` rounds. The recorded inertia history is
    the assignment cost at each round's centroids and is non-increasing under
    plain Lloyd steps.
    """
    points = np.asarray(features, dtype=np.float64)
    if points.ndim != 2:
        raise DimensionMismatch(f"features must be 2-D, got shape {points.shape}")
    n = points.shape[0]
    if n == 0:
        raise EmptyInput("cannot cluster an empty class")
    if bin_count < 1:
        raise EmptyInput(f"bin_count must be >= 1, got {bin_count}")
    m = min(bin_count, n)

    rng = SplitMix64(seed)
    centroids = _kmeanspp_init(points, m, rng)

    row = np.arange(n)
    dists = _sq_distances(points, centroids)
    labels = dists.argmin(axis=1)
    history = [float(dists[row, labels].sum())]
    _repair_empty(labels, dists, m)

    for _ in range(max_iters):
        new_centroids = centroids.copy()
        for j in range(m):
            mask = labels == j
            if mask.any():
                new_centroids[j] = points[mask].mean(axis=0)
        shift = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids

        dists = _sq_distances(points, centroids)
        labels = dists.argmin(axis=1)
        history.append(float(dists[row, labels].sum()))
        repaired = _repair_empty(labels, dists, m)
        if shift < tol and not repaired:
            break

    return BinPartition(
        class_label=class_label,
        bin_count=m,
        centroids=centroids,
        assignment=labels.astype(np.int64),
        inertia=history[-1],
        inertia_history=history,
    )
