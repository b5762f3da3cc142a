"""Proper edge colouring, leftover-bounded matchings, linear-forest assembly.

Bipartite graphs admit a proper edge colouring with exactly max-degree
colours; the classes are matchings partitioning the edges, and drawing a
uniformly random class per layer pair gives matchings whose combined
leftover set is small with positive probability, so we redraw until the
declared bounds hold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import InvalidGraphError, LeftoverError
from .graph import SIDE_A, SIDE_B, BipartiteGraph, Graph, norm_edge
from .rng import SeededRng


def bipartite_edge_colouring(g: BipartiteGraph):
    """Exactly Delta colour classes partitioning E(g), each one a matching.

    Alternating-path recolouring: for edge (u,v) take colours a free at u
    and b free at v; when they differ, the a/b alternating path from v
    cannot reach u (it would close an odd walk in a bipartite graph), so
    flipping it frees a at v. Deterministic given the sorted edge order.
    """
    if g.m == 0:
        return []
    delta = max(g.degrees())
    at = [dict() for _ in range(g.n)]  # vertex -> {colour: partner}
    colour_of = {}

    def free_colour(v):
        for c in range(delta):
            if c not in at[v]:
                return c
        raise AssertionError("no free colour below Delta")

    def assign(u, v, c):
        at[u][c] = v
        at[v][c] = u
        colour_of[(u, v)] = c

    for u, v in g.edges:
        a = free_colour(u)
        b = free_colour(v)
        if a == b:
            assign(u, v, a)
            continue
        # collect the maximal a/b-alternating path starting at v
        path = []
        x, want = v, a
        while want in at[x]:
            y = at[x][want]
            path.append((x, y, want))
            x, want = y, (b if want == a else a)
        for px, py, c in path:
            del at[px][c]
            del at[py][c]
            del colour_of[norm_edge(px, py)]
        for px, py, c in path:
            swapped = b if c == a else a
            at[px][swapped] = py
            at[py][swapped] = px
            colour_of[norm_edge(px, py)] = swapped
        assign(u, v, a)

    classes = [[] for _ in range(delta)]
    for e, c in colour_of.items():
        classes[c].append(e)
    return [tuple(sorted(cls)) for cls in classes]


@dataclass(frozen=True)
class LayeredInstance:
    host: Graph
    layers: tuple  # (V_1, ..., V_t), disjoint vertex tuples
    tracked: tuple = ()  # (T_1, ..., T_k) vertex tuples
    delta: float = 0.0  # declared per-layer-pair degree window
    Delta: float = 0.0
    r: int = 0  # declared bound on |T_i \cap V_j|

    def __post_init__(self):
        seen = set()
        for layer in self.layers:
            for v in layer:
                if v in seen:
                    raise InvalidGraphError(f"layers overlap at vertex {v}")
                seen.add(v)
        for i, t in enumerate(self.tracked):
            for layer in self.layers:
                inter = len(set(t) & set(layer))
                if self.r and inter > self.r:
                    raise InvalidGraphError(
                        f"tracked set {i} meets a layer in {inter} > r = {self.r} vertices"
                    )


def layer_pair_graph(host: Graph, left, right):
    """Bipartite graph of host edges between two disjoint layers, relabelled.

    Returns (graph, to_host) where to_host maps new ids back.
    """
    verts = list(left) + list(right)
    index = {v: i for i, v in enumerate(verts)}
    lset = set(left)
    rset = set(right)
    edges = []
    for v in left:
        for w in host.neighbors(v):
            if w in rset:
                edges.append((index[v], index[w]))
    side = [0] * len(left) + [1] * len(right)
    return BipartiteGraph(len(verts), edges, side), tuple(verts)


@dataclass(frozen=True)
class LeftoverReport:
    Y: tuple
    tracked_hits: tuple  # |Y cap T_i| per tracked set
    y_bound: float
    tracked_bound: float
    attempts_used: int

    @property
    def within_bounds(self) -> bool:
        return len(self.Y) <= self.y_bound and all(
            h <= self.tracked_bound for h in self.tracked_hits
        )


def leftover_set(layers, matchings):
    """Vertices missing an incident matching, exactly as the bound defines Y."""
    t = len(layers)
    matched = [set() for _ in range(t - 1)]
    for j, m in enumerate(matchings):
        for u, v in m:
            matched[j].add(u)
            matched[j].add(v)
    y = []
    for j, layer in enumerate(layers):
        for v in layer:
            if t == 1:
                continue
            if j == 0:
                ok = v in matched[0]
            elif j == t - 1:
                ok = v in matched[t - 2]
            else:
                ok = v in matched[j - 1] and v in matched[j]
            if not ok:
                y.append(v)
    return tuple(sorted(y))


def matchings_with_leftover(
    inst: LayeredInstance,
    rng: SeededRng,
    attempts: int = 50,
    paper_mode: bool = False,
):
    """Random colour-class matchings per layer pair until the Y bounds hold.

    Returns (matchings, LeftoverReport). The redraw loop exists because a
    uniform class only succeeds with positive probability; exhausting
    ``attempts`` raises with the best draw attached.
    """
    t = len(inst.layers)
    n = inst.host.n
    logn = max(1.0, math.log2(max(2, n)))
    if paper_mode and inst.Delta > 0:
        if 1 - inst.delta / inst.Delta > logn / math.sqrt(t) + 1e-12:
            raise LeftoverError(
                f"hypothesis 1 - delta/Delta <= t^-1/2 log n fails "
                f"({1 - inst.delta / inst.Delta:.4f} > {logn / math.sqrt(t):.4f})"
            )
    total = sum(len(layer) for layer in inst.layers)
    y_bound = 10 * total * logn / math.sqrt(t) if t else 0.0
    tracked_bound = 10 * inst.r * math.sqrt(t) * logn

    colourings = []
    for j in range(t - 1):
        pair, to_host = layer_pair_graph(inst.host, inst.layers[j], inst.layers[j + 1])
        classes = bipartite_edge_colouring(pair)
        host_classes = [
            tuple(sorted(norm_edge(to_host[u], to_host[v]) for u, v in cls))
            for cls in classes
        ]
        colourings.append(host_classes)

    best = None
    for attempt in range(attempts):
        matchings = []
        for j, classes in enumerate(colourings):
            if not classes:
                matchings.append(())
                continue
            idx = rng.spawn(f"draw-{attempt}-layer-{j}").integer(0, len(classes))
            matchings.append(classes[idx])
        y = leftover_set(inst.layers, matchings)
        yset = set(y)
        hits = tuple(len(yset & set(ti)) for ti in inst.tracked)
        report = LeftoverReport(y, hits, y_bound, tracked_bound, attempt + 1)
        if report.within_bounds:
            return matchings, report
        if best is None or len(report.Y) < len(best[1].Y):
            best = (matchings, report)
    raise LeftoverError(
        f"no draw within bounds after {attempts} attempts "
        f"(best |Y| = {len(best[1].Y)} vs bound {y_bound:.1f})",
        best=best,
    )


# ---------------------------------------------------------------------------
# Forest assembly


@dataclass(frozen=True)
class ForestAssembly:
    paths: tuple  # vertex tuples, one vertex per layer, first layer to last
    virtual_pairs: tuple  # (u, v) links that are NOT host edges, u before v
    pairing: tuple  # per boundary j, the tuple of virtual pairs added there
    first_endpoints: tuple  # u_j: path j's vertex in the first layer
    last_endpoints: tuple  # v_j: path j's vertex in the last layer


def assemble_forest(bg: BipartiteGraph, layers, matchings) -> ForestAssembly:
    """Close the matching gaps with virtual pairs and read off the paths.

    Unmatched layer-j vertices are paired with unmatched layer-(j+1)
    vertices of the opposite bipartition side, lexicographically per side.
    The union of real matching edges and virtual pairs is then a linear
    forest whose every path runs from the first to the last layer.
    """
    t = len(layers)
    if len(matchings) != t - 1:
        raise InvalidGraphError("need exactly t-1 matchings for t layers")
    nxt = {}
    prv = {}
    for j, m in enumerate(matchings):
        left = set(layers[j])
        for u, v in m:
            a, b = (u, v) if u in left else (v, u)
            nxt[a] = (b, "real")
            prv[b] = (a, "real")
    virtual_all = []
    pairing = []
    for j in range(t - 1):
        out_unmatched = [v for v in layers[j] if v not in nxt]
        in_unmatched = [v for v in layers[j + 1] if v not in prv]
        here = []
        for s_out, s_in in ((SIDE_A, SIDE_B), (SIDE_B, SIDE_A)):
            outs = sorted(v for v in out_unmatched if bg.side[v] == s_out)
            ins = sorted(v for v in in_unmatched if bg.side[v] == s_in)
            if len(outs) != len(ins):
                raise InvalidGraphError(
                    f"side-count mismatch at boundary {j}: {len(outs)} vs {len(ins)} "
                    "(layers are not balanced sets of equal size)"
                )
            for u, v in zip(outs, ins):
                nxt[u] = (v, "virtual")
                prv[v] = (u, "virtual")
                here.append((u, v))
                virtual_all.append((u, v))
        pairing.append(tuple(sorted(here)))

    paths = []
    for start in sorted(layers[0]) if t else []:
        path = [start]
        while path[-1] in nxt:
            path.append(nxt[path[-1]][0])
        if len(path) != t:
            raise InvalidGraphError("forest path does not span all layers")
        paths.append(tuple(path))
    covered = {v for p in paths for v in p}
    expected = {v for layer in layers for v in layer}
    if covered != expected:
        raise InvalidGraphError("forest paths do not cover every layered vertex")
    return ForestAssembly(
        paths=tuple(paths),
        virtual_pairs=tuple(virtual_all),
        pairing=tuple(pairing),
        first_endpoints=tuple(p[0] for p in paths),
        last_endpoints=tuple(p[-1] for p in paths),
    )
