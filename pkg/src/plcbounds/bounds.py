"""Bounds on unobserved consideration probabilities.

Initial absolute bounds come from an assumed minimum expected consideration-set
size ``alpha * k``. They are then tightened by pushing them along a DAG of
"flips": pairs where the higher-utility item reaches the top ``l`` less often.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import networkx as nx
import numpy as np
from scipy.special import logsumexp

from .core import TopLStats, as_utilities
from .errors import (
    AlphaNotGreaterThanOne,
    BoundDegenerate,
    CycleDetected,
    DegenerateDenominator,
    PlcError,
)


@dataclass(frozen=True)
class AlphaAssumption:
    """Assume the expected consideration-set size is at least ``alpha * k``."""

    alpha: float
    k: int

    def __post_init__(self):
        if not self.alpha > 1:
            raise AlphaNotGreaterThanOne(f"alpha={self.alpha} must exceed 1")
        if self.k < 1:
            raise PlcError("k must be at least 1")


@dataclass
class BoundState:
    lower: np.ndarray
    upper: np.ndarray
    stage: Literal["initial", "tightened"] = "initial"
    inconsistent: np.ndarray = field(default=None)

    def __post_init__(self):
        raw_lo = np.asarray(self.lower, dtype=float)
        raw_hi = np.asarray(self.upper, dtype=float)
        self.lower = np.clip(raw_lo, 0.0, 1.0)
        self.upper = np.clip(raw_hi, 0.0, 1.0)
        self.inconsistent = self.lower > self.upper
        if self.inconsistent.any():
            warnings.warn(
                f"lower bound exceeds upper bound for items "
                f"{np.flatnonzero(self.inconsistent).tolist()}; "
                "check alpha, the utilities and the statistics",
                stacklevel=2,
            )

    @property
    def consistent(self) -> bool:
        return not bool(self.inconsistent.any())


def chernoff_discard_bound(a: AlphaAssumption) -> float:
    """Upper bound on the chance an unconditioned draw considers at most k items."""
    return float((a.alpha * math.exp(1 - a.alpha)) ** a.k)


def exactly_k_mass_bound(a: AlphaAssumption) -> float:
    q = chernoff_discard_bound(a)
    if q >= 1:
        raise BoundDegenerate(f"discard bound {q} is not below 1")
    return q / (1 - q)


def initial_lower_bounds(stats: TopLStats, a: AlphaAssumption, top_k=None) -> np.ndarray:
    """``Pr(i in top k) * (1 - q)`` per item.

    ``top_k`` overrides the top-k column, e.g. with a lower confidence limit.
    """
    col = stats.pr_top[:, a.k - 1] if top_k is None else np.asarray(top_k, dtype=float)
    return col * (1 - chernoff_discard_bound(a))


def initial_upper_bounds(stats: TopLStats, u, a: AlphaAssumption, top_1=None) -> np.ndarray:
    u = as_utilities(u, stats.n)
    first = stats.pr_top[:, 0] if top_1 is None else np.asarray(top_1, dtype=float)
    share = np.exp(logsumexp(u) - u)
    return np.minimum(1.0, share * (first + a.k * exactly_k_mass_bound(a)))


def relative_gap_c(stats: TopLStats, i: int, j: int, ell: int) -> Optional[float]:
    """Ratio of top-l rates of ``i`` over ``j``; None unless it is defined and <= 1."""
    return _ratio(stats.prob(i, ell), stats.prob(j, ell))


def _ratio(pi: float, pj: float) -> Optional[float]:
    if not pj > 0:
        return None
    c = pi / pj
    return c if c <= 1 else None


def lb_transfer(b_i: float, c: float) -> float:
    """Lower bound on ``p_j`` implied by ``p_i >= b_i`` and gap ratio ``c``."""
    if b_i == 0:
        return 0.0
    den = c - c * b_i + b_i
    if den <= 0:
        raise DegenerateDenominator(f"b_i={b_i}, c={c}")
    return b_i / den


def ub_transfer(b_j: float, c: float) -> float:
    """Upper bound on ``p_i`` implied by ``p_j <= b_j`` and gap ratio ``c``."""
    den = 1 - b_j + c * b_j
    if den <= 0:
        raise DegenerateDenominator(f"b_j={b_j}, c={c}")
    return c * b_j / den


@dataclass
class FlipDag:
    """Edge ``i -> j`` means ``u_i > u_j`` yet ``j`` reaches some top ``l`` more often.

    ``edges[(i, j)]`` lists every ``(l, c)`` with a usable ratio ``c <= 1``.
    """

    n: int
    edges: dict[tuple[int, int], list[tuple[int, float]]] = field(default_factory=dict)

    def successors(self, i: int) -> list[int]:
        return sorted(j for (a, j) in self.edges if a == i)

    def predecessors(self, j: int) -> list[int]:
        return sorted(i for (i, b) in self.edges if b == j)

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def _graph(dag: FlipDag, reverse: bool = False) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(dag.n))
    g.add_edges_from((j, i) if reverse else (i, j) for i, j in dag.edges)
    return g


def topological_order(
    dag: FlipDag, key: Optional[Callable[[int], object]] = None, reverse: bool = False
) -> list[int]:
    """Topological order taking ready items smallest ``key`` first (default: index).

    With ``reverse`` the edges are flipped, so sinks come first.
    """
    try:
        return list(nx.lexicographical_topological_sort(_graph(dag, reverse), key=key))
    except nx.NetworkXUnfeasible as exc:
        raise CycleDetected("flip graph has a cycle") from exc


def build_flip_dag(u, stats: TopLStats, interval: Optional[tuple[np.ndarray, np.ndarray]] = None) -> FlipDag:
    """Collect every strict utility/top-l flip.

    With ``interval = (lo, hi)`` an edge needs ``hi[i] < lo[j]`` and its ratio is
    the conservative ``hi[i] / lo[j]``.
    """
    u = as_utilities(u, stats.n)
    if interval is None:
        lo = hi = stats.pr_top
    else:
        lo, hi = interval
    dag = FlipDag(stats.n)
    for i in range(stats.n):
        for j in range(stats.n):
            if not u[i] > u[j]:
                continue
            if not np.any(hi[i] < lo[j]):
                continue
            usable = []
            for ell in range(1, stats.k + 1):
                c = _ratio(hi[i, ell - 1], lo[j, ell - 1])
                if c is not None:
                    usable.append((ell, c))
            dag.edges[(i, j)] = usable
    topological_order(dag)
    return dag


def tighten_lower_bounds(initial, dag: FlipDag, order: Optional[list[int]] = None) -> np.ndarray:
    b = np.array(initial, dtype=float)
    if order is None:
        order = topological_order(dag)
    for i in order:
        for j in dag.successors(i):
            for _, c in dag.edges[(i, j)]:
                b[j] = max(b[j], lb_transfer(b[i], c))
    return b


def tighten_upper_bounds(initial, dag: FlipDag, order: Optional[list[int]] = None) -> np.ndarray:
    b = np.array(initial, dtype=float)
    if order is None:
        order = topological_order(dag, reverse=True)
    for j in order:
        for i in dag.predecessors(j):
            for _, c in dag.edges[(i, j)]:
                try:
                    b[i] = min(b[i], ub_transfer(b[j], c))
                except DegenerateDenominator:
                    # c = 0 with b_j = 1 carries no information
                    continue
    return b


def transitive_reduction(dag: FlipDag) -> FlipDag:
    topological_order(dag)
    reduced = nx.transitive_reduction(_graph(dag))
    return FlipDag(dag.n, {e: dag.edges[e] for e in reduced.edges})


@dataclass
class BoundsResult:
    initial: BoundState
    tightened: BoundState
    dag: FlipDag


def compute_bounds(
    stats: TopLStats,
    u,
    a: AlphaAssumption,
    conservative_ci: Optional[float] = None,
) -> BoundsResult:
    """Initial bounds, flip DAG and tightened bounds in one call.

    ``conservative_ci`` replaces every top-l rate by the end of its Wilson
    interval that weakens the bound being computed.
    """
    if stats.k < a.k:
        raise PlcError(f"statistics cover l <= {stats.k}, need l <= {a.k}")
    if stats.source == "empirical" and conservative_ci is None:
        warnings.warn("bounds from empirical statistics carry no soundness guarantee", stacklevel=2)
    if conservative_ci is not None:
        lo, hi = stats.interval(conservative_ci)
        lower0 = initial_lower_bounds(stats, a, top_k=lo[:, a.k - 1])
        upper0 = initial_upper_bounds(stats, u, a, top_1=hi[:, 0])
        dag = build_flip_dag(u, stats, interval=(lo, hi))
    else:
        lower0 = initial_lower_bounds(stats, a)
        upper0 = initial_upper_bounds(stats, u, a)
        dag = build_flip_dag(u, stats)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        initial = BoundState(lower0, upper0, "initial")
    lower = tighten_lower_bounds(initial.lower, dag)
    upper = tighten_upper_bounds(initial.upper, dag)
    return BoundsResult(initial, BoundState(lower, upper, "tightened"), dag)
