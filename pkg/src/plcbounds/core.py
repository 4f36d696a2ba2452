"""Shared value types: universes, rankings, datasets and top-l statistics.

Items are dense 0-based indices; string labels only appear at the I/O boundary.
Utilities and consideration probabilities are plain float64 numpy arrays,
checked by :func:`as_utilities` and :func:`as_probs`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np

from .errors import (
    DuplicateItem,
    EmptyRanking,
    ItemOutOfRange,
    PlcError,
)

Ranking = tuple[int, ...]


@dataclass(frozen=True)
class Universe:
    n: int
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.n < 1:
            raise PlcError("universe needs at least one item")
        if self.labels is not None:
            if len(self.labels) != self.n:
                raise PlcError("label count does not match n")
            if any(not lab for lab in self.labels):
                raise PlcError("labels must be non-empty")
            if len(set(self.labels)) != self.n:
                raise PlcError("labels must be distinct")

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def index(self, label: str) -> int:
        if self.labels is None:
            return int(label)
        return self.labels.index(label)


def as_utilities(u, n: Optional[int] = None) -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    if arr.ndim != 1:
        raise PlcError("utilities must be a vector")
    if n is not None and arr.shape[0] != n:
        raise PlcError(f"expected {n} utilities, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise PlcError("utilities must be finite")
    return arr


def as_probs(p, n: Optional[int] = None) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1:
        raise PlcError("consideration probabilities must be a vector")
    if n is not None and arr.shape[0] != n:
        raise PlcError(f"expected {n} probabilities, got {arr.shape[0]}")
    if np.any(~(arr > 0)) or np.any(arr > 1):
        raise PlcError("consideration probabilities must lie in (0, 1]")
    return arr


def validate_ranking(r: Sequence[int], n: int) -> None:
    """Raise unless ``r`` is a non-empty run of distinct indices below ``n``."""
    if len(r) == 0:
        raise EmptyRanking("ranking has no entries")
    seen = set()
    for item in r:
        if item in seen:
            raise DuplicateItem(item)
        if not 0 <= item < n:
            raise ItemOutOfRange(item, n)
        seen.add(item)


def normalize_utilities(
    u, mode: Literal["mean_zero", "min_zero"] = "mean_zero"
) -> np.ndarray:
    """Shift ``u`` so its mean (or minimum) is zero. PL probabilities are unchanged."""
    u = as_utilities(u)
    if u.size == 0:
        return u.copy()
    if mode == "mean_zero":
        return u - u.mean()
    if mode == "min_zero":
        return u - u.min()
    raise ValueError(f"unknown normalization mode {mode!r}")


@dataclass
class RankingDataset:
    """Equal-length rankings over ``n`` items, optionally with known consideration sets."""

    n: int
    rankings: list[Ranking] = field(default_factory=list)
    considered: list[Optional[frozenset[int]]] = field(default_factory=list)
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        self.rankings = [tuple(int(x) for x in r) for r in self.rankings]
        if not self.considered:
            self.considered = [None] * len(self.rankings)
        else:
            self.considered = [
                None if c is None else frozenset(int(x) for x in c)
                for c in self.considered
            ]
        if len(self.considered) != len(self.rankings):
            raise PlcError("one consideration entry per ranking is required")
        k = None
        for pos, (r, c) in enumerate(zip(self.rankings, self.considered)):
            validate_ranking(r, self.n)
            if k is None:
                k = len(r)
            elif len(r) != k:
                raise PlcError(f"ranking {pos} has length {len(r)}, expected {k}")
            if c is not None:
                if not set(r) <= c:
                    raise PlcError(f"ranking {pos} is not inside its consideration set")
                if any(not 0 <= x < self.n for x in c):
                    raise ItemOutOfRange(max(c), self.n)
        if self.labels is not None and len(self.labels) != self.n:
            raise PlcError("label count does not match n")

    @property
    def k(self) -> int:
        return len(self.rankings[0]) if self.rankings else 0

    def __len__(self) -> int:
        return len(self.rankings)

    @property
    def universe(self) -> Universe:
        return Universe(self.n, self.labels)

    def has_consideration_sets(self) -> bool:
        return all(c is not None for c in self.considered)


@dataclass(frozen=True)
class TopLStats:
    """``pr_top[i, l-1]`` is the probability that item ``i`` lands in the top ``l``."""

    pr_top: np.ndarray
    source: Literal["exact", "empirical"] = "exact"
    samples: Optional[int] = None
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        pr = np.asarray(self.pr_top, dtype=float)
        if pr.ndim != 2:
            raise PlcError("pr_top must be an n x k matrix")
        if np.any(pr < -1e-12) or np.any(pr > 1 + 1e-12):
            raise PlcError("top-l probabilities must lie in [0, 1]")
        if np.any(np.diff(pr, axis=1) < -1e-12):
            raise PlcError("top-l probabilities must be non-decreasing in l")
        object.__setattr__(self, "pr_top", np.clip(pr, 0.0, 1.0))

    @property
    def n(self) -> int:
        return self.pr_top.shape[0]

    @property
    def k(self) -> int:
        return self.pr_top.shape[1]

    def prob(self, i: int, ell: int) -> float:
        return float(self.pr_top[i, ell - 1])

    def interval(self, confidence: float) -> tuple[np.ndarray, np.ndarray]:
        """Wilson score interval for every entry; needs a sample count."""
        if self.samples is None or self.samples <= 0:
            raise PlcError("confidence intervals need the number of samples")
        from scipy.stats import norm

        z = norm.ppf(0.5 + confidence / 2)
        m = float(self.samples)
        phat = self.pr_top
        denom = 1 + z * z / m
        centre = (phat + z * z / (2 * m)) / denom
        half = z * np.sqrt(phat * (1 - phat) / m + z * z / (4 * m * m)) / denom
        return np.clip(centre - half, 0, 1), np.clip(centre + half, 0, 1)
