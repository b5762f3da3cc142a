"""Shared fixtures and independent oracles used across the suite."""

from __future__ import annotations

import itertools

import pytest

from equicycle.graph import Graph, norm_edge
from equicycle.rng import SeededRng


def brute_min_neighbourhood(g: Graph, U, budget: int):
    """Exhaustive minimum of |N_{G-F}(U)| over all F with |F| <= budget.

    Deliberately naive: enumerates every F-subset of the edges incident to
    the neighbourhood boundary. Independent of the greedy implementation.
    """
    uset = set(U)
    boundary = [
        e for e in g.edges if (e[0] in uset) != (e[1] in uset)
    ]
    best = None
    for size in range(0, min(budget, len(boundary)) + 1):
        for F in itertools.combinations(boundary, size):
            fset = set(F)
            seen = set()
            for u in uset:
                for w in g.neighbors(u):
                    if w not in uset and norm_edge(u, w) not in fset:
                        seen.add(w)
            if best is None or len(seen) < best:
                best = len(seen)
    return best


def brute_expander_verdict(g: Graph, epsilon: float, s: float, log2n):
    """Fully independent expansion check: every U, every F with |F| <= s|U|."""
    n = g.n
    cap = (2 * n) // 3
    for size in range(1, cap + 1):
        for U in itertools.combinations(range(n), size):
            budget = int(s * size)
            achieved = brute_min_neighbourhood(g, U, budget)
            if achieved < epsilon * size / log2n(n) ** 2:
                return False, U
    return True, None


def random_graph_for_tests(n, m, seed):
    rng = SeededRng(seed, "test-graph")
    all_edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = rng.subset(range(len(all_edges)), min(m, len(all_edges)))
    return Graph(n, [all_edges[i] for i in chosen])


def spread_bipartite(side, base_shifts, boosted, boost_shifts, boost_from):
    """Deterministic bipartite graph with two degree classes: base_shifts
    cyclic perfect matchings for everyone, plus boost_shifts more (taken
    from the disjoint shift range starting at boost_from) for the first
    ``boosted`` left vertices. Exact degrees, no dedupe noise."""
    from equicycle.graph import BipartiteGraph

    assert boost_from >= base_shifts and boost_from + boost_shifts <= side
    edges = []
    for s in range(base_shifts):
        for u in range(side):
            edges.append((u, side + (u + s) % side))
    for off in range(boost_shifts):
        for u in range(boosted):
            edges.append((u, side + (u + boost_from + off) % side))
    return BipartiteGraph(2 * side, edges, [0] * side + [1] * side)


def lambda18_synthetic(side, seed):
    """n = 2*side synthetic with declared window [60, 18*60]: a low-degree
    bulk plus mid and high classes, every realised degree comfortably
    inside the window so flattening steps accept."""
    from equicycle.generators import degree_profile_bipartite

    bulk = side - 300
    profile = [(bulk, 72), (100, 300), (200, 860)]
    return degree_profile_bipartite(side, profile, SeededRng(seed, "l18"))


@pytest.fixture
def rng():
    return SeededRng(12345, "tests")
