"""Brute-force ground truth for small instances.

Searches every vertex subset S (ascending size) for k pairwise
edge-disjoint Hamiltonian cycles of G[S]. Since such a family is a
2k-regular graph on S, subsets with an induced degree below 2k are pruned
immediately. "none" is only reported when the search completed within its
budgets; running out of budget is a distinct outcome.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Optional

from .graph import Graph, canonical_cycle, cycle_edges, restrict
from .verify import verify_cycles


@dataclass(frozen=True)
class SearchLimits:
    max_subset_size: Optional[int] = None
    node_budget: int = 5_000_000
    time_budget_s: Optional[float] = None

    def __post_init__(self):
        if self.node_budget <= 0:
            raise ValueError("node budget must be positive")


@dataclass
class OracleResult:
    status: str  # "found" | "none" | "budget-exceeded"
    family: Optional[tuple]  # cycles on original vertex ids
    nodes_used: int
    subsets_tried: int

    @property
    def found(self):
        return self.status == "found"


class _Budget:
    def __init__(self, limits: SearchLimits):
        self.nodes = limits.node_budget
        self.deadline = (
            time.monotonic() + limits.time_budget_s if limits.time_budget_s else None
        )
        self.used = 0

    def tick(self, cost=1):
        self.nodes -= cost
        self.used += cost
        if self.nodes <= 0:
            raise _OutOfBudget
        if self.deadline is not None and self.used % 4096 == 0:
            if time.monotonic() > self.deadline:
                raise _OutOfBudget


class _OutOfBudget(Exception):
    pass


def _hamiltonian_cycles(h: Graph, budget: _Budget):
    """All Hamiltonian cycles of h in canonical form (anchored at vertex 0,
    second vertex smaller than last kills the reflection)."""
    n = h.n
    if n < 3:
        return []
    out = []
    adj = [h.neighbors(v) for v in range(n)]
    anchor = 0
    path = [anchor]
    visited = [False] * n
    visited[anchor] = True

    def extend():
        budget.tick()
        u = path[-1]
        if len(path) == n:
            if h.has_edge(u, anchor) and path[1] < path[-1]:
                out.append(tuple(path))
            return
        for w in adj[u]:
            if not visited[w]:
                visited[w] = True
                path.append(w)
                extend()
                path.pop()
                visited[w] = False

    extend()
    return out


def _pack_disjoint(cycles, edge_sets, k, budget: _Budget):
    """Indices of k pairwise edge-disjoint cycles, ascending, or None."""
    chosen: list[int] = []

    def rec(start):
        budget.tick()
        if len(chosen) == k:
            return True
        for i in range(start, len(cycles)):
            es = edge_sets[i]
            if all(not (es & edge_sets[j]) for j in chosen):
                chosen.append(i)
                if rec(i + 1):
                    return True
                chosen.pop()
        return False

    if rec(0):
        return list(chosen)
    return None


def brute_force_cycles(g: Graph, k: int, limits: SearchLimits = SearchLimits()) -> OracleResult:
    """First (canonical order) family of k edge-disjoint same-vertex-set
    cycles, definitive "none", or budget-exceeded."""
    if k < 1:
        raise ValueError("k must be at least 1")
    budget = _Budget(limits)
    max_size = limits.max_subset_size or g.n
    subsets = 0
    try:
        for size in range(3, max_size + 1):
            for S in itertools.combinations(range(g.n), size):
                subsets += 1
                budget.tick()
                sset = set(S)
                # a k-family induces a 2k-regular graph on S
                degs_ok = True
                total = 0
                for v in S:
                    d = sum(1 for w in g.neighbors(v) if w in sset)
                    if d < 2 * k:
                        degs_ok = False
                        break
                    total += d
                if not degs_ok or total < 2 * k * size:
                    continue
                sub = restrict(g, S)
                cycles = _hamiltonian_cycles(sub.graph, budget)
                if len(cycles) < k:
                    continue
                edge_sets = [frozenset(cycle_edges(c)) for c in cycles]
                picked = _pack_disjoint(cycles, edge_sets, k, budget)
                if picked is not None:
                    family = tuple(
                        canonical_cycle(sub.to_parent(cycles[i])) for i in picked
                    )
                    report = verify_cycles(g, family, k)
                    assert report.ok, f"oracle produced an invalid family: {report.clause}"
                    return OracleResult("found", family, budget.used, subsets)
    except _OutOfBudget:
        return OracleResult("budget-exceeded", None, budget.used, subsets)
    return OracleResult("none", None, budget.used, subsets)


@dataclass
class ExtremalResult:
    status: str  # "done" | "budget-exceeded"
    max_edges: Optional[int]
    witness: Optional[Graph]
    graphs_checked: int


def _canonical_form(n, edge_set):
    """Minimum adjacency bitmask over all vertex permutations (n <= 8)."""
    best = None
    verts = list(range(n))
    for perm in itertools.permutations(verts):
        mask = 0
        for u, v in edge_set:
            a, b = perm[u], perm[v]
            if a > b:
                a, b = b, a
            mask |= 1 << (a * n + b)
        if best is None or mask < best:
            best = mask
    return best


def brute_force_extremal(n: int, k: int, limits: SearchLimits = SearchLimits()) -> ExtremalResult:
    """Maximum edge count of an n-vertex graph with no k-family, plus a witness.

    Absence of a family is monotone under edge removal, so we scan edge
    counts downward and stop at the first count admitting a witness.
    Enumeration is over canonical representatives (full permutation
    minimisation; practical for n <= 7).
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    all_edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    checked = 0
    budget = _Budget(limits)
    inner = SearchLimits(
        max_subset_size=n, node_budget=max(10_000, limits.node_budget // 200)
    )
    try:
        for m in range(len(all_edges), -1, -1):
            seen_canonical = set()
            for chosen in itertools.combinations(range(len(all_edges)), m):
                budget.tick()
                edges = [all_edges[i] for i in chosen]
                form = _canonical_form(n, edges)
                if form in seen_canonical:
                    continue
                seen_canonical.add(form)
                checked += 1
                g = Graph(n, edges)
                res = brute_force_cycles(g, k, inner)
                if res.status == "budget-exceeded":
                    raise _OutOfBudget
                if res.status == "none":
                    return ExtremalResult("done", m, g, checked)
        return ExtremalResult("done", None, None, checked)
    except _OutOfBudget:
        return ExtremalResult("budget-exceeded", None, None, checked)
