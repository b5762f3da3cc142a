"""Immutable graph representation, restriction, statistics, parity, file I/O.

Vertices are dense 0-based integers. Edges are stored normalised as
``(u, v)`` with ``u < v`` and sorted lexicographically, which makes the
canonical text form (and everything serialised from it) deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import GraphFormatError, InvalidGraphError

SIDE_A = 0
SIDE_B = 1


def norm_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class Graph:
    """Simple undirected graph. Immutable after construction."""

    __slots__ = ("n", "edges", "_adj", "_adj_sets", "_edge_set")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        self.n = int(n)
        if self.n < 0:
            raise InvalidGraphError("vertex count must be non-negative")
        seen = set()
        buckets = [[] for _ in range(self.n)]
        norm = []
        for u, v in edges:
            if u == v:
                raise InvalidGraphError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidGraphError(f"edge ({u},{v}) out of range for n={self.n}")
            e = norm_edge(u, v)
            if e in seen:
                raise InvalidGraphError(f"duplicate edge ({e[0]},{e[1]})")
            seen.add(e)
            norm.append(e)
            buckets[e[0]].append(e[1])
            buckets[e[1]].append(e[0])
        norm.sort()
        self.edges: tuple[tuple[int, int], ...] = tuple(norm)
        self._adj = tuple(tuple(sorted(b)) for b in buckets)
        self._adj_sets = None
        self._edge_set = seen

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def adj_set(self, v: int) -> set:
        if self._adj_sets is None:
            self._adj_sets = [set(a) for a in self._adj]
        return self._adj_sets[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def degrees(self) -> list[int]:
        return [len(a) for a in self._adj]

    def has_edge(self, u: int, v: int) -> bool:
        return norm_edge(u, v) in self._edge_set

    def edge_set(self) -> frozenset:
        return frozenset(self._edge_set)

    def average_degree(self) -> float:
        return 2.0 * self.m / self.n if self.n else 0.0

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and self.n == other.n
            and self.edges == other.edges
            and getattr(self, "side", None) == getattr(other, "side", None)
        )

    def __hash__(self):
        return hash((self.n, self.edges, getattr(self, "side", None)))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


class BipartiteGraph(Graph):
    """Graph plus a two-sided vertex labelling; every edge must cross sides."""

    __slots__ = ("side",)

    def __init__(self, n, edges, side: Sequence[int]):
        super().__init__(n, edges)
        side = tuple(int(s) for s in side)
        if len(side) != self.n:
            raise InvalidGraphError("side labelling length differs from vertex count")
        if any(s not in (SIDE_A, SIDE_B) for s in side):
            raise InvalidGraphError("side labels must be 0 or 1")
        for u, v in self.edges:
            if side[u] == side[v]:
                raise InvalidGraphError(f"edge ({u},{v}) joins two side-{side[u]} vertices")
        self.side = side

    @property
    def graph(self) -> Graph:
        """The underlying plain graph (fresh object, labels dropped)."""
        return Graph(self.n, self.edges)

    def part(self, s: int) -> tuple[int, ...]:
        return tuple(v for v in range(self.n) if self.side[v] == s)

    def is_balanced(self, vertices: Iterable[int]) -> bool:
        a = b = 0
        for v in vertices:
            if self.side[v] == SIDE_A:
                a += 1
            else:
                b += 1
        return a == b

    def __repr__(self):
        na = sum(1 for s in self.side if s == SIDE_A)
        return f"BipartiteGraph(n={self.n}, m={self.m}, |A|={na}, |B|={self.n - na})"


@dataclass(frozen=True)
class Subgraph:
    """Result of :func:`restrict`: the relabelled graph plus the map back.

    ``parent[i]`` is the vertex of the original graph that became vertex
    ``i`` of ``graph``.
    """

    graph: Graph
    parent: tuple[int, ...]

    def to_parent(self, vertices):
        return tuple(self.parent[v] for v in vertices)


def restrict(g: Graph, keep_vertices, drop_edges=()) -> Subgraph:
    """Induced subgraph on ``keep_vertices`` minus ``drop_edges``, relabelled.

    Idempotent for fixed arguments; the empty result is allowed. Dropping an
    edge that is absent (or outside the kept set) is a no-op.
    """
    keep = sorted(set(keep_vertices))
    for v in keep:
        if not 0 <= v < g.n:
            raise InvalidGraphError(f"kept vertex {v} out of range")
    dropped = set()
    for u, v in drop_edges:
        if not (0 <= u < g.n and 0 <= v < g.n):
            raise InvalidGraphError(f"dropped edge ({u},{v}) out of range")
        dropped.add(norm_edge(u, v))
    index = {v: i for i, v in enumerate(keep)}
    new_edges = [
        (index[u], index[v])
        for u, v in g.edges
        if u in index and v in index and (u, v) not in dropped
    ]
    if isinstance(g, BipartiteGraph):
        sub = BipartiteGraph(len(keep), new_edges, tuple(g.side[v] for v in keep))
    else:
        sub = Graph(len(keep), new_edges)
    return Subgraph(sub, tuple(keep))


def delete_edges(g: Graph, drop_edges) -> Graph:
    """Same vertex set, listed edges removed."""
    dropped = {norm_edge(u, v) for u, v in drop_edges}
    kept = [e for e in g.edges if e not in dropped]
    if isinstance(g, BipartiteGraph):
        return BipartiteGraph(g.n, kept, g.side)
    return Graph(g.n, kept)


@dataclass(frozen=True)
class DegreeStats:
    minimum: int
    maximum: int
    average: float
    ratio: float  # max/min, inf when min == 0
    histogram: dict


def degree_stats(g: Graph) -> DegreeStats:
    if g.n == 0:
        raise InvalidGraphError("degree_stats of an empty graph")
    degs = g.degrees()
    lo, hi = min(degs), max(degs)
    hist = {}
    for d in degs:
        hist[d] = hist.get(d, 0) + 1
    ratio = float("inf") if lo == 0 else hi / lo
    return DegreeStats(lo, hi, sum(degs) / len(degs), ratio, hist)


# ---------------------------------------------------------------------------
# Paths, cycles, matchings


def validate_path(g: Graph, seq: Sequence[int], name: str = "path") -> None:
    """Raise unless ``seq`` is a simple path in ``g`` (single vertex allowed)."""
    if len(seq) == 0:
        raise InvalidGraphError(f"{name} is empty")
    if len(set(seq)) != len(seq):
        raise InvalidGraphError(f"{name} repeats a vertex")
    for v in seq:
        if not 0 <= v < g.n:
            raise InvalidGraphError(f"{name} vertex {v} out of range")
    for a, b in zip(seq, seq[1:]):
        if not g.has_edge(a, b):
            raise InvalidGraphError(f"{name} uses missing edge ({a},{b})")


def validate_cycle(g: Graph, seq: Sequence[int], name: str = "cycle") -> None:
    if len(seq) < 3:
        raise InvalidGraphError(f"{name} needs at least 3 vertices")
    validate_path(g, seq, name)
    if not g.has_edge(seq[-1], seq[0]):
        raise InvalidGraphError(f"{name} missing closing edge ({seq[-1]},{seq[0]})")


def canonical_cycle(seq: Sequence[int]) -> tuple[int, ...]:
    """Rotate/reflect so the smallest vertex leads and its smaller neighbour follows."""
    seq = list(seq)
    i = seq.index(min(seq))
    rot = seq[i:] + seq[:i]
    fwd = tuple(rot)
    rev = tuple([rot[0]] + rot[1:][::-1])
    return min(fwd, rev)


def path_edges(seq: Sequence[int]) -> list[tuple[int, int]]:
    return [norm_edge(a, b) for a, b in zip(seq, seq[1:])]


def cycle_edges(seq: Sequence[int]) -> list[tuple[int, int]]:
    return path_edges(seq) + [norm_edge(seq[-1], seq[0])]


def is_matching(g: Graph, edges) -> bool:
    used = set()
    for u, v in edges:
        if not g.has_edge(u, v):
            return False
        if u in used or v in used:
            return False
        used.add(u)
        used.add(v)
    return True


# ---------------------------------------------------------------------------
# Parity of bipartite paths


@dataclass(frozen=True)
class ParityReport:
    endpoint_sides: tuple[int, int]
    internal_a: int
    internal_b: int
    case: str  # "balanced" | "extra_b" | "extra_a"
    consistent: bool


def check_path_parity(bg: BipartiteGraph, path: Sequence[int]) -> ParityReport:
    """Classify a path's internal vertices against its endpoint sides.

    For a valid bipartite path exactly one case can occur: opposite-side
    endpoints give balanced internals, two side-A endpoints give one extra
    side-B internal, and symmetrically. ``consistent`` records that the
    observed counts match the endpoint-side prediction.
    """
    if len(path) < 2:
        raise InvalidGraphError("parity needs a path with at least one edge")
    validate_path(bg, path)
    internal = path[1:-1]
    a = sum(1 for v in internal if bg.side[v] == SIDE_A)
    b = len(internal) - a
    if a == b:
        case = "balanced"
    elif b == a + 1:
        case = "extra_b"
    elif a == b + 1:
        case = "extra_a"
    else:
        case = "invalid"
    s0, s1 = bg.side[path[0]], bg.side[path[-1]]
    expected = {
        (SIDE_A, SIDE_B): "balanced",
        (SIDE_B, SIDE_A): "balanced",
        (SIDE_A, SIDE_A): "extra_b",
        (SIDE_B, SIDE_B): "extra_a",
    }[(s0, s1)]
    return ParityReport((s0, s1), a, b, case, case == expected)


# ---------------------------------------------------------------------------
# File I/O
#
# Format: line 1 "n m"; optional line 2 "bipartite s0 ... s_{n-1}"; then m
# lines "u v". The canonical writer sorts edges lexicographically.


def parse_graph(text: str):
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise GraphFormatError("missing header 'n m'", line=1)
    head = lines[0].split()
    if len(head) != 2:
        raise GraphFormatError(f"expected 'n m', got {lines[0]!r}", line=1)
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise GraphFormatError(f"non-integer header {lines[0]!r}", line=1) from None
    if n < 0 or m < 0:
        raise GraphFormatError("negative vertex or edge count", line=1)

    idx = 1
    side = None
    if idx < len(lines) and lines[idx].split()[:1] == ["bipartite"]:
        parts = lines[idx].split()[1:]
        if len(parts) != n:
            raise GraphFormatError(
                f"bipartite line lists {len(parts)} labels for {n} vertices", line=idx + 1
            )
        try:
            side = tuple(int(p) for p in parts)
        except ValueError:
            raise GraphFormatError("non-integer side label", line=idx + 1) from None
        if any(s not in (0, 1) for s in side):
            raise GraphFormatError("side labels must be 0 or 1", line=idx + 1)
        idx += 1

    edges = []
    seen = set()
    for k in range(m):
        ln = idx + k
        if ln >= len(lines) or not lines[ln].strip():
            raise GraphFormatError(f"expected {m} edges, file ends early", line=ln + 1)
        parts = lines[ln].split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected 'u v', got {lines[ln]!r}", line=ln + 1)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer endpoint in {lines[ln]!r}", line=ln + 1) from None
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}", line=ln + 1)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"vertex out of range in ({u},{v})", line=ln + 1)
        e = norm_edge(u, v)
        if e in seen:
            raise GraphFormatError(f"duplicate edge ({u},{v})", line=ln + 1)
        if side is not None and side[u] == side[v]:
            raise GraphFormatError(f"edge ({u},{v}) stays within one side", line=ln + 1)
        seen.add(e)
        edges.append(e)
    for extra in range(idx + m, len(lines)):
        if lines[extra].strip():
            raise GraphFormatError("trailing content after edge list", line=extra + 1)

    if side is not None:
        return BipartiteGraph(n, edges, side)
    return Graph(n, edges)


def load_graph(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())


def graph_to_text(g: Graph) -> str:
    out = [f"{g.n} {g.m}"]
    if isinstance(g, BipartiteGraph):
        out.append("bipartite " + " ".join(str(s) for s in g.side))
    out.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(out) + "\n"


def save_graph(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(graph_to_text(g))
