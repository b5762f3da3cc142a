"""Internally vertex-disjoint short paths through a connecting set.

The contract mirrors the D-connecting notion: terminal pairs sit outside
the connecting set V, every path routes its internal vertices through V,
lengths are capped, and the returned collection is pairwise internally
vertex-disjoint. We additionally enforce pairwise edge-disjointness: two
internally disjoint paths can only share an edge when both are the same
length-1 direct edge, so banning duplicate direct edges closes the gap
(cycle assembly downstream needs genuine edge-disjointness).

Solving is greedy shortest-path with used-vertex blocking, bounded
rip-up-and-retry on dead ends, and an exhaustive set-packing fallback for
small instances, which makes the solver complete whenever the fallback
budget suffices.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConnectionError, InvalidGraphError
from .graph import Graph, norm_edge, validate_path
from .matching import hall_violator, max_bipartite_matching


@dataclass(frozen=True)
class ConnectionRequest:
    pairs: tuple  # ((x1,y1), ...), repetition allowed
    V: tuple  # connecting set
    max_len: int
    degree_cap: Optional[float] = None  # declared D of the hypothesis; verified when given
    min_len: int = 1  # 2 keeps paths off terminal-terminal edges entirely
    forbidden_edges: tuple = ()  # edges no returned path may use

    def __post_init__(self):
        if self.max_len < 2:
            raise ConnectionError("max_len must be at least 2")
        if self.min_len not in (1, 2):
            raise ConnectionError("min_len must be 1 or 2")


@dataclass
class ConnectionSolution:
    paths: dict  # pair index -> vertex tuple
    usage: dict  # V-vertex -> pair index
    ripups: int = 0
    exhaustive: bool = False


def default_max_len(n: int) -> int:
    return max(2, math.ceil(max(1.0, math.log2(max(2, n))) ** 6))


def _shortest_through(g, x, y, available, max_len, min_len, used_direct, forbidden=frozenset()):
    """Shortest x-y path with internals in ``available``; None when absent."""
    if x == y:
        return None
    if (
        min_len <= 1
        and g.has_edge(x, y)
        and norm_edge(x, y) not in used_direct
        and norm_edge(x, y) not in forbidden
    ):
        return (x, y)
    if max_len < 2:
        return None
    parent = {}
    dist = {}
    queue = deque()
    for w in g.neighbors(x):
        if w in available and w not in dist and norm_edge(x, w) not in forbidden:
            dist[w] = 1
            parent[w] = None
            queue.append(w)
    while queue:
        u = queue.popleft()
        du = dist[u]
        if du + 1 <= max_len and g.has_edge(u, y) and norm_edge(u, y) not in forbidden:
            chain = [u]
            while parent[chain[-1]] is not None:
                chain.append(parent[chain[-1]])
            return (x, *reversed(chain), y)
        if du + 1 > max_len - 1:
            continue
        for w in g.neighbors(u):
            if w in available and w not in dist and norm_edge(u, w) not in forbidden:
                dist[w] = du + 1
                parent[w] = u
                queue.append(w)
    return None


def _enumerate_paths(g, x, y, available, max_len, min_len, used_direct, budget, forbidden=frozenset()):
    """All simple x-y paths through ``available`` within the length window.

    ``budget`` is a mutable one-element list of remaining DFS expansions;
    raises ConnectionError (budget diagnosis) when it runs dry.
    """
    out = []
    if (
        min_len <= 1
        and g.has_edge(x, y)
        and norm_edge(x, y) not in used_direct
        and norm_edge(x, y) not in forbidden
    ):
        out.append((x, y))
    stack = [(x, (x,), {x})]
    while stack:
        u, path, seen = stack.pop()
        budget[0] -= 1
        if budget[0] <= 0:
            raise ConnectionError(
                "exhaustive path enumeration budget exhausted",
                diagnosis={"kind": "budget-exhausted", "stage": "enumerate"},
            )
        for w in sorted(g.neighbors(u), reverse=True):
            if norm_edge(u, w) in forbidden:
                continue
            if w == y:
                if len(path) >= 2:  # at least one internal vertex
                    out.append(path + (y,))
                continue
            if w in available and w not in seen and len(path) < max_len:
                stack.append((w, path + (w,), seen | {w}))
    return out


def connect_pairs_disjoint(
    g: Graph,
    req: ConnectionRequest,
    ripup_budget: Optional[int] = None,
    exhaustive_cap: int = 1_000_000,
) -> ConnectionSolution:
    """Route every pair through V with the ConnectionSolution invariants.

    Raises ConnectionError with a partial solution and a diagnosis instead
    of failing silently. Complete on instances the exhaustive fallback can
    cover; best effort above that.
    """
    vset = set(req.V)
    fset = frozenset(norm_edge(*e) for e in req.forbidden_edges)
    terminals = [t for p in req.pairs for t in p]
    for t in terminals:
        if t in vset:
            raise ConnectionError(f"terminal {t} lies inside the connecting set")
        if not 0 <= t < g.n:
            raise InvalidGraphError(f"terminal {t} out of range")
    if req.degree_cap is not None:
        from collections import Counter

        multi = Counter(terminals)
        for v in sorted(vset):
            load = sum(c for t, c in multi.items() if g.has_edge(v, t))
            if load > req.degree_cap:
                raise ConnectionError(
                    f"declared degree cap {req.degree_cap} violated at vertex {v} (load {load})",
                    diagnosis={"kind": "degree-cap", "vertex": v, "load": load},
                )

    # fewest candidate first-hops first
    def scarcity(i):
        x, y = req.pairs[i]
        cx = sum(1 for w in g.neighbors(x) if w in vset)
        cy = sum(1 for w in g.neighbors(y) if w in vset)
        return (min(cx, cy), cx + cy, i)

    order = sorted(range(len(req.pairs)), key=scarcity)
    available = set(vset)
    used_direct: set = set()
    placed: dict = {}
    queue = deque(order)
    ripups = 0
    if ripup_budget is None:
        ripup_budget = 4 * len(req.pairs) + 16

    def commit(i, path):
        placed[i] = path
        if len(path) == 2:
            used_direct.add(norm_edge(*path))
        for v in path[1:-1]:
            available.discard(v)

    def uncommit(i):
        path = placed.pop(i)
        if len(path) == 2:
            used_direct.discard(norm_edge(*path))
        for v in path[1:-1]:
            available.add(v)

    solved_greedily = True
    while queue:
        i = queue.popleft()
        x, y = req.pairs[i]
        path = _shortest_through(
            g, x, y, available, req.max_len, req.min_len, used_direct, fset
        )
        if path is not None:
            commit(i, path)
            continue
        probe = _shortest_through(g, x, y, vset, req.max_len, req.min_len, set(), fset)
        if probe is None:
            raise ConnectionError(
                f"pair {i} ({x},{y}) has no path through V within length {req.max_len}",
                partial=dict(placed),
                diagnosis={"kind": "proven-infeasible", "pair": i},
            )
        if ripups >= ripup_budget:
            solved_greedily = False
            break
        blocker = None
        if probe is not None:
            for v in probe[1:-1]:
                if v not in available:
                    blocker = next(j for j, p in placed.items() if v in p[1:-1])
                    break
        if blocker is None and probe is not None and len(probe) == 2:
            # the probe is a direct edge someone else already claimed
            e = norm_edge(*probe)
            blocker = next(
                (j for j, p in placed.items() if len(p) == 2 and norm_edge(*p) == e), None
            )
        if blocker is None:
            solved_greedily = False
            break
        uncommit(blocker)
        ripups += 1
        queue.appendleft(blocker)
        queue.appendleft(i)

    if not solved_greedily or queue:
        # exhaustive set-packing over enumerated candidate paths
        budget = [exhaustive_cap]
        for j in list(placed):
            uncommit(j)
        cand = {}
        for i in order:
            x, y = req.pairs[i]
            cand[i] = _enumerate_paths(
                g, x, y, vset, req.max_len, req.min_len, set(), budget, fset
            )
            if not cand[i]:
                raise ConnectionError(
                    f"pair {i} has no candidate path at all",
                    diagnosis={"kind": "proven-infeasible", "pair": i},
                )
        search_order = sorted(cand, key=lambda i: (len(cand[i]), i))

        def backtrack(pos):
            budget[0] -= 1
            if budget[0] <= 0:
                raise ConnectionError(
                    "exhaustive search budget exhausted",
                    partial=dict(placed),
                    diagnosis={"kind": "budget-exhausted", "stage": "packing"},
                )
            if pos == len(search_order):
                return True
            i = search_order[pos]
            x, y = req.pairs[i]
            for path in cand[i]:
                if len(path) == 2 and norm_edge(*path) in used_direct:
                    continue
                if any(v not in available for v in path[1:-1]):
                    continue
                commit(i, path)
                if backtrack(pos + 1):
                    return True
                uncommit(i)
            return False

        if not backtrack(0):
            raise ConnectionError(
                "no pairwise disjoint routing exists for this instance",
                partial={},
                diagnosis={"kind": "proven-infeasible"},
            )
        solution = ConnectionSolution(dict(placed), {}, ripups, exhaustive=True)
    else:
        solution = ConnectionSolution(dict(placed), {}, ripups, exhaustive=False)

    usage = {}
    for i, path in solution.paths.items():
        for v in path[1:-1]:
            usage[v] = i
    solution.usage = usage
    _verify_solution(g, req, solution)
    return solution


def _verify_solution(g, req, sol):
    """Replay every ConnectionSolution invariant against the graph."""
    seen_internals: set = set()
    seen_edges: set = set()
    vset = set(req.V)
    for i, (x, y) in enumerate(req.pairs):
        path = sol.paths[i]
        validate_path(g, path, name=f"path {i}")
        assert path[0] == x and path[-1] == y, f"path {i} endpoints wrong"
        assert req.min_len <= len(path) - 1 <= req.max_len, f"path {i} length out of window"
        internals = set(path[1:-1])
        assert internals <= vset, f"path {i} leaves the connecting set"
        assert not (internals & seen_internals), f"path {i} reuses an internal vertex"
        seen_internals |= internals
        forbidden = frozenset(norm_edge(*e) for e in req.forbidden_edges)
        for e in zip(path, path[1:]):
            e = norm_edge(*e)
            assert e not in seen_edges, f"path {i} reuses edge {e}"
            assert e not in forbidden, f"path {i} uses a forbidden edge {e}"
            seen_edges.add(e)


# ---------------------------------------------------------------------------
# Star matching into a witness set (Hall-based)


@dataclass(frozen=True)
class StarMatchingResult:
    ok: bool
    leaf_sets: Optional[tuple]  # per terminal occurrence, sorted leaf tuples
    hall_guarantee: bool  # the sufficient degree condition held a priori
    deficient: Optional[tuple] = None  # (clone occurrences, neighbourhood) on failure


def star_matching(g: Graph, terminals, W, q: int) -> StarMatchingResult:
    """Disjoint q-leaf stars in W, one per terminal occurrence.

    Builds the q-fold clone instance and takes a maximum matching; success
    means every clone found a private leaf. On failure the Hall violator is
    returned as the deficiency certificate.
    """
    if q < 1:
        raise InvalidGraphError("q must be positive")
    wset = set(W)
    terminals = list(terminals)
    degs = [sum(1 for w in g.neighbors(t) if w in wset) for t in terminals]
    delta0 = min(degs) if degs else 0
    from collections import Counter

    multi = Counter(terminals)
    guarantee = bool(terminals) and all(
        q * sum(c for t, c in multi.items() if g.has_edge(w, t)) <= delta0 for w in wset
    )
    adj = {}
    for i, t in enumerate(terminals):
        nbrs = sorted(w for w in g.neighbors(t) if w in wset)
        for c in range(q):
            adj[(i, c)] = nbrs
    matching = max_bipartite_matching(adj)
    if len(matching) == len(adj):
        leaf_sets = []
        for i in range(len(terminals)):
            leaf_sets.append(tuple(sorted(matching[(i, c)] for c in range(q))))
        if guarantee:
            assert len(matching) == len(adj), "Hall guarantee held but matching failed"
        return StarMatchingResult(True, tuple(leaf_sets), guarantee)
    violator = hall_violator(adj, matching)
    clones, nbhd = violator
    return StarMatchingResult(False, None, guarantee, (clones, nbhd))


# ---------------------------------------------------------------------------
# One-of-many path search


def find_one_of_many_paths(g: Graph, pairs, V, per_hop: int):
    """First pair (smallest index) joinable through V within 4*l*log2(n).

    Growing radius-l balls from both ends and splicing is equivalent to a
    shortest-path scan bounded by the same length, which is what we run.
    """
    seen = [t for p in pairs for t in p]
    if len(set(seen)) != len(seen):
        raise InvalidGraphError("one-of-many pairs must use distinct vertices")
    bound = 4 * per_hop * max(1.0, math.log2(max(2, g.n)))
    vset = set(V)
    for j, (z, w) in enumerate(pairs):
        path = _shortest_through(g, z, w, vset - {z, w}, math.floor(bound), 1, set())
        if path is not None and len(path) - 1 <= bound:
            return j, path
    raise ConnectionError(
        f"no pair connectable through V within length {bound:.1f}",
        diagnosis={"kind": "proven-infeasible"},
    )
