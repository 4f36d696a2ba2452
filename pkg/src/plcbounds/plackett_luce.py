"""Plackett-Luce over known consideration sets, with maximum-likelihood fitting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy.special import logsumexp

from .core import RankingDataset, as_utilities, validate_ranking
from .errors import (
    ConsiderationSetTooSmall,
    EmptyDataset,
    ItemNeverConsidered,
    MaxIterationsExceeded,
    MissingConsiderationSet,
    PlcError,
)


@dataclass(frozen=True)
class FitConfig:
    """Rprop settings."""

    learning_rate: float = 0.05
    l2_strength: float = 1e-6
    grad_sq_tolerance: float = 1e-8
    max_iterations: int = 20000
    step_grow: float = 1.2
    step_shrink: float = 0.5
    step_min: float = 1e-16
    step_max: float = 1.0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise PlcError("learning_rate must be positive")
        if self.l2_strength < 0:
            raise PlcError("l2_strength must be non-negative")
        if not self.grad_sq_tolerance > 0:
            raise PlcError("grad_sq_tolerance must be positive")
        if self.max_iterations < 0:
            raise PlcError("max_iterations must be non-negative")


def log_pl_ranking_prob(r, C: Iterable[int], u) -> float:
    u = as_utilities(u)
    r = tuple(int(x) for x in r)
    validate_ranking(r, u.size)
    C = set(int(x) for x in C)
    if len(C) < len(r):
        raise ConsiderationSetTooSmall(f"|C|={len(C)} < k={len(r)}")
    if not set(r) <= C:
        return -np.inf
    avail = np.zeros(u.size, dtype=bool)
    avail[list(C)] = True
    total = 0.0
    for item in r:
        total += u[item] - logsumexp(u[avail])
        avail[item] = False
    return float(total)


def pl_ranking_prob(r, C: Iterable[int], u) -> float:
    """Probability of ranking ``r`` when choosing sequentially from ``C``.

    Zero when some ranked item is outside ``C``.
    """
    return float(np.exp(log_pl_ranking_prob(r, C, u)))


def pl_sample_ranking(C: Iterable[int], u, k: int, rng: np.random.Generator) -> tuple[int, ...]:
    u = as_utilities(u)
    pool = sorted(set(int(x) for x in C))
    if len(pool) < k or k < 1:
        raise ConsiderationSetTooSmall(f"|C|={len(pool)} < k={k}")
    out = []
    for _ in range(k):
        logits = u[pool]
        w = np.exp(logits - logits.max())
        pick = rng.choice(len(pool), p=w / w.sum())
        out.append(pool.pop(pick))
    return tuple(out)


def pl_sample_rankings_masked(
    masks: np.ndarray, u, k: int, rng: np.random.Generator
) -> np.ndarray:
    """Top-``k`` of Gumbel-perturbed utilities, one row per consideration mask.

    Equivalent in distribution to sequential PL choices within each mask.
    """
    u = np.asarray(u, dtype=float)
    keys = u[None, :] + rng.gumbel(size=masks.shape)
    keys = np.where(masks, keys, -np.inf)
    order = np.argsort(-keys, axis=1, kind="stable")
    return order[:, :k]


def _design(dataset: RankingDataset) -> tuple[np.ndarray, np.ndarray]:
    m = len(dataset)
    R = np.asarray(dataset.rankings, dtype=np.int64).reshape(m, dataset.k)
    M = np.zeros((m, dataset.n), dtype=bool)
    for row, c in enumerate(dataset.considered):
        if c is None:
            raise MissingConsiderationSet(row)
        M[row, list(c)] = True
    return R, M


def _nll_grad(R: np.ndarray, M: np.ndarray, u: np.ndarray, l2: float):
    m, k = R.shape
    n = u.size
    nll = float(l2 * (u @ u))
    grad = 2.0 * l2 * u
    if m == 0:
        return nll, grad
    avail = M.copy()
    rows = np.arange(m)
    for t in range(k):
        logits = np.where(avail, u, -np.inf)
        top = logits.max(axis=1)
        w = np.exp(logits - top[:, None])
        s = w.sum(axis=1)
        chosen = R[:, t]
        nll += float(np.sum(np.log(s) + top - u[chosen]))
        grad += (1.0 / s) @ w
        grad -= np.bincount(chosen, minlength=n)
        avail[rows, chosen] = False
    return nll, grad


def pl_nll_gradient(dataset: RankingDataset, u, l2: float = 0.0) -> tuple[float, np.ndarray]:
    """L2-regularised negative log-likelihood and its exact gradient."""
    u = as_utilities(u, dataset.n)
    R, M = _design(dataset)
    return _nll_grad(R, M, u, l2)


def _same(a: float, b: float) -> bool:
    return abs(a - b) <= 64 * np.finfo(float).eps * max(abs(a), abs(b), 1.0)


def pl_fit(
    dataset: RankingDataset,
    cfg: FitConfig = FitConfig(),
    init: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Maximum-likelihood utilities by Rprop with step rejection.

    A step that raises the objective is undone and all step sizes are halved,
    so the objective never increases across accepted steps. When old and new
    objective values agree to within rounding, the step is kept only if the
    directional derivative at the new point shows it did not overshoot.
    """
    if len(dataset) == 0:
        raise EmptyDataset("cannot fit an empty dataset")
    R, M = _design(dataset)
    seen = M.any(axis=0)
    if not seen.all():
        raise ItemNeverConsidered(int(np.flatnonzero(~seen)[0]))

    n = dataset.n
    u = np.zeros(n) if init is None else as_utilities(init, n).copy()
    f, g = _nll_grad(R, M, u, cfg.l2_strength)
    step = np.full(n, cfg.learning_rate)
    prev = np.zeros(n)
    for _ in range(cfg.max_iterations):
        if g @ g <= cfg.grad_sq_tolerance:
            return u
        agree = np.sign(g) * np.sign(prev)
        step = np.where(agree > 0, np.minimum(step * cfg.step_grow, cfg.step_max), step)
        step = np.where(agree < 0, np.maximum(step * cfg.step_shrink, cfg.step_min), step)
        g_eff = np.where(agree < 0, 0.0, g)
        u_new = u - np.sign(g_eff) * step
        f_new, g_new = _nll_grad(R, M, u_new, cfg.l2_strength)
        if f_new < f or (_same(f_new, f) and g_new @ (u_new - u) <= 0):
            u, f, g, prev = u_new, f_new, g_new, g_eff
        else:
            step = np.maximum(step * cfg.step_shrink, cfg.step_min)
            prev = np.zeros(n)
    raise MaxIterationsExceeded(u, float(g @ g), cfg.max_iterations)


def infer_utility_order(dataset: RankingDataset) -> np.ndarray:
    """``wins[i, j]`` counts rankings holding both items with ``i`` above ``j``."""
    n = dataset.n
    wins = np.zeros((n, n), dtype=np.int64)
    if len(dataset) == 0:
        return wins
    R = np.asarray(dataset.rankings, dtype=np.int64)
    k = R.shape[1]
    for a in range(k):
        for b in range(a + 1, k):
            np.add.at(wins, (R[:, a], R[:, b]), 1)
    return wins


def win_rates(wins: np.ndarray) -> np.ndarray:
    """Pairwise win rate; NaN where a pair never co-occurs."""
    total = wins + wins.T
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(total > 0, wins / np.where(total > 0, total, 1), np.nan)
