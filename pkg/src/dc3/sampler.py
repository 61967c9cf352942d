"""Representative selection inside bins by pairwise-distance gain.

Each sample is scored against a reference set D (its bin's members): the gain
rewards distance to already-selected samples and penalizes distance to the
unselected remainder, so high-gain samples are the ones that summarize their
neighborhood. With nothing selected yet the gain reduces to minus the total
squared distance to the rest of the bin, which makes the most central sample
score highest.

Static mode scores every sample once against D and takes the top of each bin,
matching a single sort. Greedy mode rescores after every pick, trading compute
for the literal iterative definition. Both use the same tie rule: ascending
original sample index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import CandidateAlreadySelected, DimensionMismatch, EmptyInput
from .quantizer import BinPartition


class GainScope(str, Enum):
    BIN = "bin"
    CLASS = "class"


class SelectionMode(str, Enum):
    STATIC = "static"
    GREEDY = "greedy"


@dataclass(frozen=True)
class GainTable:
    """One gain per sample of the scoring scope, aligned with row order."""

    gains: np.ndarray           # (n,) float64
    scope: GainScope = GainScope.BIN


@dataclass(frozen=True)
class SelectionResult:
    """Per-class outcome: ordered picks, their gains, and the bin quotas."""

    class_label: str
    selected: list[int]                 # class-local sample indices, pick order
    per_bin_quota: list[int]
    mode: SelectionMode
    selected_gains: list[float] = field(default_factory=list)

    def to_json_dict(self, ids: Sequence[str] | None = None) -> dict:
        chosen: list = list(self.selected)
        if ids is not None:
            chosen = [ids[i] for i in self.selected]
        return {
            "class": self.class_label,
            "mode": self.mode.value,
            "selected": chosen,
            "per_bin_quota": list(self.per_bin_quota),
            "selected_gains": list(self.selected_gains),
        }


def _pairwise_sq(features: np.ndarray) -> np.ndarray:
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2:
        raise DimensionMismatch(f"features must be 2-D, got shape {f.shape}")
    diff = f[:, None, :] - f[None, :, :]
    return np.einsum("ijd,ijd->ij", diff, diff)


def static_gains(features: np.ndarray, scope: GainScope = GainScope.BIN) -> GainTable:
    """Score all samples at once with nothing selected.

    The gain of x is minus the sum of squared distances from x to every other
    member of the scope, so a lone sample scores 0 and duplicates score alike.
    """
    f = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if f.shape[0] == 0:
        raise EmptyInput("cannot score an empty sample set")
    d2 = _pairwise_sq(f)
    return GainTable(gains=-d2.sum(axis=1), scope=scope)


def incremental_gain(
    candidate: int, selected: Sequence[int], features: np.ndarray
) -> float:
    """Gain of adding ``candidate`` given the already-selected index set.

    Distances to selected samples count positive, distances to the unselected
    remainder (excluding the candidate itself) count negative.
    """
    chosen = set(int(i) for i in selected)
    if int(candidate) in chosen:
        raise CandidateAlreadySelected(int(candidate))
    f = np.atleast_2d(np.asarray(features, dtype=np.float64))
    d2 = ((f - f[int(candidate)]) ** 2).sum(axis=1)
    pos = sum(d2[i] for i in sorted(chosen))
    neg = sum(
        d2[i] for i in range(f.shape[0]) if i not in chosen and i != int(candidate)
    )
    return float(pos - neg)


def _rank_order(gains: np.ndarray) -> np.ndarray:
    """Indices sorted by gain descending, ties by ascending index."""
    order = np.lexsort((np.arange(len(gains)), -gains))
    return order


def bin_quotas(sizes: Sequence[int], n: int) -> list[int]:
    """Split a budget of ``n`` picks across bins of the given sizes.

    Every bin gets ``n // m``; the remainder goes one-each to the largest
    bins (ties by lowest bin index). Quotas are capped at bin size and any
    shortfall cascades round-robin through the bins, largest first, until the
    budget min(n, total) is met.
    """
    sizes = [int(s) for s in sizes]
    m = len(sizes)
    if m == 0:
        raise EmptyInput("no bins to fill")
    budget = min(int(n), sum(sizes))
    by_size = sorted(range(m), key=lambda j: (-sizes[j], j))

    quota = [n // m] * m
    for j in by_size[: n % m]:
        quota[j] += 1
    quota = [min(q, s) for q, s in zip(quota, sizes)]

    shortfall = budget - sum(quota)
    while shortfall > 0:
        for j in by_size:
            if shortfall == 0:
                break
            if quota[j] < sizes[j]:
                quota[j] += 1
                shortfall -= 1
    return quota


def _greedy_pick(features: np.ndarray, members: np.ndarray, quota: int) -> list[int]:
    """Repeated argmax of the incremental gain inside one bin.

    Ties keep the earliest candidate in ascending index order.
    """
    d2 = _pairwise_sq(features[members])
    local_selected: list[int] = []
    remaining = list(range(len(members)))
    for _ in range(quota):
        best = None
        best_gain = -np.inf
        chosen = set(local_selected)
        for c in remaining:
            others = d2[c]
            pos = sum(others[i] for i in local_selected)
            neg = others.sum() - pos - others[c]
            gain = pos - neg
            if gain > best_gain:
                best_gain = gain
                best = c
        local_selected.append(best)
        remaining.remove(best)
    return [int(members[i]) for i in local_selected]


def select_per_class(
    features: np.ndarray,
    bins: BinPartition,
    n: int,
    mode: SelectionMode = SelectionMode.STATIC,
) -> SelectionResult:
    """Pick ``n`` samples for one class, spread across its bins.

    ``features`` holds the class's feature rows in the same order the
    partition was built from. Returns class-local row indices in pick order:
    bins in ascending index, then each bin's picks best-first.
    """
    f = np.asarray(features, dtype=np.float64)
    if f.shape[0] != len(bins.assignment):
        raise DimensionMismatch(
            f"{f.shape[0]} feature rows vs {len(bins.assignment)} assigned samples"
        )
    if n < 1:
        raise EmptyInput(f"selection budget must be >= 1, got {n}")

    sizes = bins.sizes()
    quotas = bin_quotas(sizes.tolist(), n)

    selected: list[int] = []
    gains_out: list[float] = []
    for j in range(bins.bin_count):
        quota = quotas[j]
        if quota == 0:
            continue
        members = bins.members(j)
        table = static_gains(f[members])
        if mode is SelectionMode.STATIC:
            order = _rank_order(table.gains)
            picks = [int(members[i]) for i in order[:quota]]
            gains_out.extend(float(table.gains[i]) for i in order[:quota])
        else:
            picks = _greedy_pick(f, members, quota)
            local = {int(m): i for i, m in enumerate(members)}
            gains_out.extend(float(table.gains[local[p]]) for p in picks)
        selected.extend(picks)

    return SelectionResult(
        class_label=bins.class_label,
        selected=selected,
        per_bin_quota=quotas,
        mode=mode,
        selected_gains=gains_out,
    )
