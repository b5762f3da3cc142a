"""Fixture generators: classic small graphs and seeded random families.

These back the ``gen`` CLI command and the test suites. Everything random
is driven by a SeededRng so fixtures are reproducible byte-for-byte.
"""

from __future__ import annotations

from .errors import InvalidGraphError
from .graph import BipartiteGraph, Graph, norm_edge
from .rng import SeededRng


def complete_graph(n: int) -> Graph:
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise InvalidGraphError("cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def complete_bipartite(a: int, b: int) -> BipartiteGraph:
    edges = [(u, a + w) for u in range(a) for w in range(b)]
    return BipartiteGraph(a + b, edges, [0] * a + [1] * b)


def k44() -> BipartiteGraph:
    return complete_bipartite(4, 4)


def star_graph(leaves: int) -> Graph:
    return Graph(leaves + 1, [(0, i + 1) for i in range(leaves)])


def blowup_2(g: Graph) -> Graph:
    """2-blowup: each vertex becomes two clones, each edge a K_{2,2}."""
    edges = []
    for u, v in g.edges:
        for du in (0, 1):
            for dv in (0, 1):
                edges.append((2 * u + du, 2 * v + dv))
    return Graph(2 * g.n, edges)


def crown_bipartite(side: int, rng: SeededRng, removed_matchings: int = 1) -> BipartiteGraph:
    """Complete bipartite K_{side,side} minus random perfect matchings.

    With one removed matching this is the crown graph: (side-1)-regular,
    the densest near-regular bipartite instance we use for desk-scale
    pipeline runs.
    """
    removed = set()
    for r in range(removed_matchings):
        perm = rng.spawn(f"pm-{r}").permutation(side)
        for u in range(side):
            removed.add((u, side + perm[u]))
    edges = [
        (u, side + w)
        for u in range(side)
        for w in range(side)
        if (u, side + w) not in removed
    ]
    return BipartiteGraph(2 * side, edges, [0] * side + [1] * side)


def random_graph(n: int, m: int, rng: SeededRng) -> Graph:
    """Uniform random graph with exactly m edges."""
    all_edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if m > len(all_edges):
        raise InvalidGraphError(f"{m} edges requested, only {len(all_edges)} possible")
    chosen = rng.subset(range(len(all_edges)), m)
    return Graph(n, [all_edges[i] for i in chosen])


def random_bipartite(a: int, b: int, p: float, rng: SeededRng) -> BipartiteGraph:
    edges = []
    for u in range(a):
        keep = rng.mask(b, p)
        edges.extend((u, a + w) for w in range(b) if keep[w])
    return BipartiteGraph(a + b, edges, [0] * a + [1] * b)


def near_regular_bipartite(side: int, d: int, rng: SeededRng) -> BipartiteGraph:
    """Union of d random perfect matchings between two sides, deduplicated.

    Degrees land in [d - few, d]; exact d-regularity happens when the drawn
    permutations collide nowhere.
    """
    if d > side:
        raise InvalidGraphError("degree cannot exceed the opposite side size")
    edges = set()
    for r in range(d):
        perm = rng.spawn(f"pm-{r}").permutation(side)
        for u in range(side):
            edges.add((u, side + perm[u]))
    return BipartiteGraph(2 * side, sorted(edges), [0] * side + [1] * side)


def disjoint_union(g1: Graph, g2: Graph) -> Graph:
    edges = list(g1.edges) + [(u + g1.n, v + g1.n) for u, v in g2.edges]
    return Graph(g1.n + g2.n, edges)


def degree_profile_bipartite(side: int, profile, rng: SeededRng) -> BipartiteGraph:
    """Random bipartite graph with a planted per-vertex target-degree profile.

    ``profile`` is a list of (count, degree) pairs summing to ``side``; both
    sides get the same profile. Built by stub matching with duplicate edges
    dropped, so realised degrees sit at or slightly under the targets.
    """
    targets = []
    for count, deg in profile:
        targets.extend([deg] * count)
    if len(targets) != side:
        raise InvalidGraphError("profile does not cover the side")
    stubs_a = [u for u, t in enumerate(targets) for _ in range(t)]
    stubs_b = [side + u for u, t in enumerate(targets) for _ in range(t)]
    order = rng.spawn("stubs").permutation(len(stubs_b))
    edges = set()
    for i, j in enumerate(order):
        edges.add(norm_edge(stubs_a[i], stubs_b[j]))
    return BipartiteGraph(2 * side, sorted(edges), [0] * side + [1] * side)
