"""Brute-force oracles and random instance generators shared by the tests.

The oracles here deliberately avoid the library's own fast paths: they
enumerate every subset of the universe and every ranking directly.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest


def all_subsets(n):
    for bits in itertools.product((0, 1), repeat=n):
        yield frozenset(i for i, b in enumerate(bits) if b)


def brute_pmf(p):
    n = len(p)
    pmf = np.zeros(n + 1)
    for C in all_subsets(n):
        pmf[len(C)] += math.prod(p[i] if i in C else 1 - p[i] for i in range(n))
    return pmf


def brute_set_weight(C, p):
    return math.prod(p[i] if i in C else 1 - p[i] for i in range(len(p)))


def brute_pl(r, C, u):
    if not set(r) <= set(C):
        return 0.0
    pool = set(C)
    prob = 1.0
    for item in r:
        prob *= math.exp(u[item]) / sum(math.exp(u[j]) for j in pool)
        pool.discard(item)
    return prob


def brute_plc(r, u, p, k):
    n = len(u)
    feasible = [C for C in all_subsets(n) if len(C) >= k]
    z = sum(brute_set_weight(C, p) for C in feasible)
    return sum(brute_set_weight(C, p) / z * brute_pl(r, C, u) for C in feasible)


def brute_closure(n, edges):
    reach = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        reach[i, j] = True
    for w in range(n):
        reach |= reach[:, [w]] & reach[[w], :]
    return reach


def draw_sound_instance(rng, alpha, n_max=8, k_max=3):
    """Random (u, p, k) within the size caps whose probabilities sum to at least alpha * k."""
    while True:
        k = int(rng.integers(1, k_max + 1))
        n = int(rng.integers(2, n_max + 1))
        if alpha * k >= n - 0.05:
            continue
        p = rng.uniform(0.05, 1.0, n)
        target = alpha * k
        if p.sum() < target:
            lift = (target - p.sum()) / (n - p.sum())
            p = np.minimum(p + lift * (1 - p) + 1e-9, 1.0)
        if p.sum() >= target:
            u = rng.normal(0.0, 1.0, n)
            return u, p, k


def draw_anticorrelated_instance(rng, n, k):
    """Higher utility gets lower consideration probability, so flips appear."""
    u = np.sort(rng.normal(0.0, 1.0, n))[::-1]
    p = np.sort(rng.uniform(0.1, 1.0, n))
    return u, p


@pytest.fixture
def rng():
    return np.random.default_rng(20241018)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def _verdict(name, ok, detail):
        line = f"{name}: {'PASS' if ok else 'FAIL'} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return _verdict


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
