"""Ranking probabilities when consideration sets are random and unobserved.

The exact routines enumerate consideration sets and serve as the oracle for
the two approximations. Only subsets of the items *outside* a ranking are
enumerated, since every ranked item must have been considered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Optional

import numpy as np

from .consideration import (
    normalizer_z,
    sample_consideration_masks,
    sample_consideration_set,
)
from .core import TopLStats, as_probs, as_utilities, validate_ranking
from .errors import (
    InfeasibleC,
    NonPositiveUtility,
    NormalizerZero,
    PlcError,
    UniverseTooLargeForExact,
)
from .plackett_luce import (
    pl_ranking_prob,
    pl_sample_ranking,
    pl_sample_rankings_masked,
)

MAX_EXACT_N = 25


@dataclass(frozen=True)
class McConfig:
    epsilon: float = 0.05
    delta: float = 0.1
    seed: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.epsilon < 1 or not 0 < self.delta < 1:
            raise PlcError("epsilon and delta must lie in (0, 1)")

    @property
    def samples(self) -> int:
        return math.ceil(math.log(4 / self.delta) / (2 * self.epsilon**2))


@dataclass(frozen=True)
class PlcParams:
    u: np.ndarray
    p: np.ndarray
    k: int


def _check(r, u, p, k):
    u = as_utilities(u)
    p = as_probs(p, u.size)
    r = tuple(int(x) for x in r)
    validate_ranking(r, u.size)
    if len(r) != k:
        raise PlcError(f"ranking has length {len(r)}, expected k={k}")
    return r, u, p


def _subset_table(p_sub: np.ndarray, e_sub: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Probability weight and exp-utility sum of every subset of the given items."""
    w = np.ones(1)
    s = np.zeros(1)
    for pi, ei in zip(p_sub, e_sub):
        w = np.concatenate([w * (1 - pi), w * pi])
        s = np.concatenate([s, s + ei])
    return w, s


def _exact_unnormalized(r: tuple[int, ...], eu: np.ndarray, p: np.ndarray) -> float:
    mask = np.ones(eu.size, dtype=bool)
    mask[list(r)] = False
    w, s = _subset_table(p[mask], eu[mask])
    tails = np.cumsum(eu[list(r)][::-1])[::-1]
    pl = np.ones_like(s)
    for t, item in enumerate(r):
        pl *= eu[item] / (s + tails[t])
    return float(np.prod(p[list(r)]) * (w @ pl))


def plc_prob_exact(r, u, p, k: int, max_n: int = MAX_EXACT_N) -> float:
    """Exact PL+C probability of ``r`` by summing over consideration sets."""
    r, u, p = _check(r, u, p, k)
    n = u.size
    if n > max_n:
        raise UniverseTooLargeForExact(f"n={n} exceeds the enumeration limit {max_n}")
    if k == n:
        return pl_ranking_prob(r, range(n), u)
    z = normalizer_z(p, k)
    if z <= 0:
        raise NormalizerZero("z_{k,p} is zero")
    eu = np.exp(u - u.max())
    return _exact_unnormalized(r, eu, p) / z


def plc_ranking_distribution(u, p, k: int, max_n: int = MAX_EXACT_N) -> dict[tuple[int, ...], float]:
    """Exact probability of every length-``k`` ranking."""
    u = as_utilities(u)
    p = as_probs(p, u.size)
    n = u.size
    if n > max_n:
        raise UniverseTooLargeForExact(f"n={n} exceeds the enumeration limit {max_n}")
    if not 1 <= k <= n:
        raise PlcError(f"k={k} must lie in [1, {n}]")
    eu = np.exp(u - u.max())
    if k == n:
        return {r: pl_ranking_prob(r, range(n), u) for r in permutations(range(n))}
    z = normalizer_z(p, k)
    if z <= 0:
        raise NormalizerZero("z_{k,p} is zero")
    return {r: _exact_unnormalized(r, eu, p) / z for r in permutations(range(n), k)}


def plc_top_l_matrix(u, p, k: int, max_n: int = MAX_EXACT_N) -> TopLStats:
    """Exact top-l probabilities for every item and every cutoff 1..k."""
    n = as_utilities(u).size
    pr = np.zeros((n, k))
    for r, prob in plc_ranking_distribution(u, p, k, max_n).items():
        for pos, item in enumerate(r):
            pr[item, pos:] += prob
    return TopLStats(np.clip(pr, 0.0, 1.0), source="exact")


def plc_top_l_prob(i: int, ell: int, u, p, k: int, max_n: int = MAX_EXACT_N) -> float:
    if not 1 <= ell <= k:
        raise PlcError(f"cutoff {ell} must lie in [1, {k}]")
    return plc_top_l_matrix(u, p, k, max_n).prob(i, ell)


def sample_plc_ranking(u, p, k: int, rng: np.random.Generator) -> tuple[int, ...]:
    C = sample_consideration_set(p, k, rng)
    return pl_sample_ranking(C, u, k, rng)


def sample_plc_rankings(u, p, k: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` independent PL+C rankings as an ``m x k`` integer matrix."""
    u = as_utilities(u)
    p = as_probs(p, u.size)
    if m == 0:
        return np.zeros((0, k), dtype=np.int64)
    masks = sample_consideration_masks(p, k, m, rng)
    return pl_sample_rankings_masked(masks, u, k, rng).astype(np.int64)


def _pl_prob_masked(r: tuple[int, ...], masks: np.ndarray, eu: np.ndarray) -> np.ndarray:
    """PL probability of ``r`` under each consideration mask (rows)."""
    ok = masks[:, list(r)].all(axis=1)
    remaining = masks @ eu
    out = np.where(ok, 1.0, 0.0)
    for item in r:
        den = np.where(ok, remaining, 1.0)
        out = out * (eu[item] / den)
        remaining = remaining - eu[item]
    return out


def plc_prob_mc(r, u, p, k: int, cfg: McConfig, rng: Optional[np.random.Generator] = None) -> float:
    """Average of PL probabilities over rejection-sampled consideration sets.

    Uses ``ceil(log(4/delta) / (2 eps^2))`` accepted sets, which gives additive
    error at most ``epsilon`` with probability at least ``1 - delta``.
    """
    r, u, p = _check(r, u, p, k)
    z = normalizer_z(p, k)
    if z <= 0:
        raise NormalizerZero("z_{k,p} is zero")
    s = cfg.samples
    factor = 2 * math.log(2 / cfg.delta) / s + 2
    cap = max(int(math.ceil(factor * s / z)), s)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    masks = sample_consideration_masks(p, k, s, rng, max_attempts=cap)
    eu = np.exp(u - u.max())
    return float(_pl_prob_masked(r, masks, eu).mean())


@dataclass
class BinnedAccumulator:
    """Consideration mass and largest exp-utility sum per geometric bin.

    Array position 0 is the empty-set bin (index -1); position ``j + 1`` is bin ``j``.
    """

    mass: np.ndarray
    max_exp_utility: np.ndarray
    ratio: float
    top: int

    @classmethod
    def empty(cls, ratio: float, top: int) -> "BinnedAccumulator":
        mass = np.zeros(top + 2)
        mass[0] = 1.0
        return cls(mass, np.zeros(top + 2), ratio, top)

    def add_item(self, p_i: float, e_i: float) -> None:
        live = np.flatnonzero(self.mass > 0)
        new_mass = self.mass * (1 - p_i)
        new_max = self.max_exp_utility.copy()
        cand = self.max_exp_utility[live] + e_i
        h = np.floor(np.log(cand) / math.log1p(self.ratio)).astype(np.int64)
        # float edge cases can land one bin outside [0, top]
        slot = np.clip(h, 0, self.top) + 1
        np.add.at(new_mass, slot, self.mass[live] * p_i)
        np.maximum.at(new_max, slot, cand)
        self.mass = new_mass
        self.max_exp_utility = new_max

    def representatives(self) -> np.ndarray:
        """Exp-utility stand-in per bin: 0 for the empty set, ``(1+ratio)^j`` otherwise."""
        j = np.arange(self.top + 1)
        return np.concatenate([[0.0], np.exp(j * math.log1p(self.ratio))])


def plc_prob_binned(r, u, p, k: int, epsilon: float) -> float:
    """Deterministic estimate within a multiplicative factor ``1 + epsilon``.

    Requires strictly positive utilities. Consideration sets over the unranked
    items are grouped into geometric bins of their exp-utility sum.
    """
    r, u, p = _check(r, u, p, k)
    if not epsilon > 0:
        raise PlcError("epsilon must be positive")
    n = u.size
    if k == n:
        return pl_ranking_prob(r, range(n), u)
    bad = np.flatnonzero(~(u > 0))
    if bad.size:
        raise NonPositiveUtility(int(bad[0]))
    z = normalizer_z(p, k)
    if z <= 0:
        raise NormalizerZero("z_{k,p} is zero")

    ratio = epsilon / (2 * k * n)
    eu = np.exp(u)
    rest = np.setdiff1d(np.arange(n), r)
    top = int(math.floor(math.log(eu[rest].sum()) / math.log1p(ratio)))
    acc = BinnedAccumulator.empty(ratio, top)
    for i in rest:
        acc.add_item(p[i], eu[i])

    rep = acc.representatives()
    tails = np.cumsum(eu[list(r)][::-1])[::-1]
    terms = np.ones_like(rep)
    for t, item in enumerate(r):
        terms *= eu[item] / (rep + tails[t])
    return float(np.prod(p[list(r)]) / z * (acc.mass @ terms))


def nonidentifiability_witness(
    n: int,
    k: int,
    g1: float,
    g2: float,
    c: float,
    u_hi: float = 30.0,
    u_lo: float = -30.0,
) -> tuple[PlcParams, PlcParams]:
    """Two consideration-probability vectors with the same ranking distribution.

    The first ``k - 1`` items are always considered and carry utility ``u_hi``.
    The rest carry utility 1 and probability ``g``, except the last one, which
    gets utility ``u_lo`` and a probability tuned so that it is ranked last
    with probability exactly ``c``.
    """
    if n <= 1 or not 1 <= k < n:
        raise PlcError("need n > 1 and 1 <= k < n")
    if not (0 < g1 < 1 and 0 < g2 < 1):
        raise PlcError("g1 and g2 must lie in (0, 1)")
    if not 0 < c < 1:
        raise InfeasibleC(f"c={c} must lie in (0, 1)")

    def build(g: float) -> PlcParams:
        lam = (1 - g) ** (n - k)
        if c > lam:
            raise InfeasibleC(f"c={c} exceeds (1-g)^(n-k)={lam:.6g} for g={g}")
        b = c / (1 - c) * (1 - lam) / lam
        b = min(b, 1.0)
        u = np.array([u_hi] * (k - 1) + [1.0] * (n - k) + [u_lo])
        p = np.array([1.0] * (k - 1) + [g] * (n - k) + [b])
        return PlcParams(u, p, k)

    return build(g1), build(g2)


def total_variation(a: PlcParams, b: PlcParams) -> float:
    da = plc_ranking_distribution(a.u, a.p, a.k)
    db = plc_ranking_distribution(b.u, b.p, b.k)
    keys = set(da) | set(db)
    return 0.5 * sum(abs(da.get(r, 0.0) - db.get(r, 0.0)) for r in keys)
