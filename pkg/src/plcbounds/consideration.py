"""Independent-consideration sets conditioned on having at least ``k`` items."""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from .core import as_probs
from .errors import NormalizerZero, RejectionCapExceeded

DEFAULT_ATTEMPT_CAP = 10**6


def poisson_binomial_pmf(p) -> np.ndarray:
    """Exact PMF of the number of successes among independent Bernoulli(p_i).

    Folds one probability in at a time, so the cost is O(n^2).
    """
    p = np.asarray(p, dtype=float)
    pmf = np.ones(1)
    for pi in p:
        nxt = np.zeros(pmf.size + 1)
        nxt[:-1] = pmf * (1 - pi)
        nxt[1:] += pmf * pi
        pmf = nxt
    return pmf


def normalizer_z(p, k: int) -> float:
    """Probability that an unconditioned draw considers at least ``k`` items."""
    if k <= 0:
        return 1.0
    pmf = poisson_binomial_pmf(p)
    if k >= pmf.size:
        return 0.0
    return float(min(1.0, pmf[k:].sum()))


def consideration_set_prob(C: Iterable[int], p, k: int) -> float:
    p = as_probs(p)
    members = np.zeros(p.size, dtype=bool)
    members[list(C)] = True
    if members.sum() < k:
        return 0.0
    z = normalizer_z(p, k)
    if z <= 0:
        raise NormalizerZero(f"no set of size >= {k} has positive probability")
    raw = np.prod(p[members]) * np.prod(1 - p[~members])
    return float(raw / z)


def sample_consideration_set(
    p, k: int, rng: np.random.Generator, max_attempts: int = DEFAULT_ATTEMPT_CAP
) -> frozenset[int]:
    """Draw a consideration set by independent coin flips, redrawing sets smaller than ``k``."""
    p = as_probs(p)
    if k > p.size or normalizer_z(p, k) <= 0:
        raise NormalizerZero(f"cannot draw a set of size >= {k}")
    for _ in range(max_attempts):
        mask = rng.random(p.size) < p
        if mask.sum() >= k:
            return frozenset(np.flatnonzero(mask).tolist())
    raise RejectionCapExceeded(f"no set of size >= {k} in {max_attempts} attempts")


def sample_consideration_masks(
    p,
    k: int,
    count: int,
    rng: np.random.Generator,
    max_attempts: Optional[int] = None,
) -> np.ndarray:
    """Vectorised rejection sampler returning a ``count x n`` boolean matrix.

    ``max_attempts`` caps total draws; by default each requested set gets the
    single-draw budget.
    """
    if max_attempts is None:
        max_attempts = DEFAULT_ATTEMPT_CAP * max(count, 1)
    p = np.asarray(p, dtype=float)
    if k > p.size:
        raise NormalizerZero(f"cannot draw a set of size >= {k}")
    out = np.empty((count, p.size), dtype=bool)
    filled = 0
    attempts = 0
    z = normalizer_z(p, k)
    if z <= 0:
        raise NormalizerZero(f"cannot draw a set of size >= {k}")
    while filled < count:
        need = count - filled
        batch = int(min(max(need / z * 1.1 + 16, 64), 1 << 20))
        batch = min(batch, max_attempts - attempts)
        if batch <= 0:
            raise RejectionCapExceeded(
                f"only {filled} of {count} sets accepted in {attempts} attempts"
            )
        draws = rng.random((batch, p.size)) < p
        attempts += batch
        ok = draws[draws.sum(axis=1) >= k]
        take = min(need, ok.shape[0])
        out[filled:filled + take] = ok[:take]
        filled += take
    return out
