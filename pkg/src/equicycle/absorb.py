"""Absorber gadgets, absorber grids, and robustly matchable bipartite graphs.

An absorber for a pair (a, b) with endpoints y, z is a union of two y-z
paths: one whose internal vertex set is exactly the interior S, the other
with internal set exactly S plus {a, b}, neither using any edge among
{a, b, y, z}. Switching between the two paths absorbs the pair into a
longer path without disturbing anything outside the gadget, and because
every gadget edge touches its interior, gadgets with disjoint interiors
are automatically edge-disjoint.

Construction follows the two-stage zig-zag pattern: two equal-length
internally disjoint a-b paths routed through one connecting set, then the
staircase of cross connections through a second one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from .connect import ConnectionRequest, connect_pairs_disjoint
from .errors import AbsorberError, ConnectionError, InvalidGraphError, RMBGError
from .graph import (
    SIDE_A,
    SIDE_B,
    BipartiteGraph,
    Graph,
    norm_edge,
    path_edges,
    validate_path,
)
from .matching import max_bipartite_matching
from .rng import SeededRng


@dataclass(frozen=True)
class Absorber:
    pair: tuple  # (a, b)
    endpoints: tuple  # (y, z)
    interior: tuple  # S, sorted
    path_without: tuple  # y .. z, internals exactly S
    path_with: tuple  # y .. z, internals exactly S + {a, b}


def verify_absorber(g: Graph, ab: Absorber):
    """Replay every definition clause; returns (ok, violated_clause)."""
    a, b = ab.pair
    y, z = ab.endpoints
    special = {a, b, y, z}
    s = set(ab.interior)
    if len(special) != 4:
        return False, "a,b,y,z not distinct"
    if special & s:
        return False, "a,b,y,z meet the interior"
    try:
        validate_path(g, ab.path_without, "path_without")
        validate_path(g, ab.path_with, "path_with")
    except InvalidGraphError as exc:
        return False, f"invalid path: {exc}"
    for path, want, name in (
        (ab.path_without, s, "path_without internals = S"),
        (ab.path_with, s | {a, b}, "path_with internals = S+{a,b}"),
    ):
        if {path[0], path[-1]} != {y, z}:
            return False, f"{name.split()[0]} endpoints differ from (y,z)"
        if set(path[1:-1]) != want:
            return False, name
    for path in (ab.path_without, ab.path_with):
        for e in path_edges(path):
            if e[0] in special and e[1] in special:
                return False, "path uses an edge among a,b,y,z"
    if len(s) > max(1.0, math.log2(max(2, g.n))) ** 12:
        return False, "interior exceeds the size cap"
    return True, None


def _weave_with(P, u, v, t):
    """Traversal using both a and b (1 absorbed pair), per the zig-zag pattern."""
    out = list(P[1])  # y .. v1
    out += [u[0], u[1]]  # v1 -> a -> u1
    i = 2
    while i <= t - 2:
        out += list(P[i][1:])  # ends v[i]
        out += [v[i + 1]]
        if i + 1 <= t - 2:
            out += list(reversed(P[i + 1]))[1:]  # ends u[i]
            out += [u[i + 1]]
            i += 2
        else:
            break
    out += [u[t - 2]]  # b -> u[t-2]
    out += list(P[t - 1][1:])  # ends z
    return tuple(out)


def _weave_without(P, u, v, t):
    """Traversal skipping a and b."""
    out = list(P[1])  # y .. v1
    i = 1
    while True:
        out += [v[i + 1]]
        out += list(reversed(P[i + 1]))[1:]  # ends u[i]
        out += [u[i + 1]]
        if i + 2 == t - 1:
            out += list(P[t - 1][1:])  # ends z
            break
        out += list(P[i + 2][1:])  # ends v[i+2]
        i += 2
    return tuple(out)


def _pad_path(g, path, target_len, avail):
    """Lengthen a path by 2 edges at a time: replace an edge (p,q) with
    p-w1-w2-q using two unused vertices joined by an edge. Keeps parity in
    bipartite hosts. Returns the padded path or None when stuck."""
    path = list(path)
    while len(path) - 1 < target_len:
        done = False
        for idx in range(len(path) - 1):
            p, q = path[idx], path[idx + 1]
            for w1 in sorted(set(g.neighbors(p)) & avail):
                for w2 in sorted(set(g.neighbors(q)) & avail):
                    if w1 != w2 and g.has_edge(w1, w2):
                        path[idx + 1 : idx + 1] = [w1, w2]
                        avail.discard(w1)
                        avail.discard(w2)
                        done = True
                        break
                if done:
                    break
            if done:
                break
        if not done:
            return None
    return tuple(path)


def _build_cell(g, a, b, y, z, avail_u1, avail_u2, max_len, min_stage1=3):
    """One absorber: stage-1 twin a-b paths through U1, stage-2 staircase
    through U2. Consumes the availability sets in place."""
    try:
        sol1 = connect_pairs_disjoint(
            g,
            ConnectionRequest(
                pairs=((a, b), (a, b)),
                V=tuple(sorted(avail_u1)),
                max_len=max_len,
                min_len=2,
            ),
        )
    except ConnectionError as exc:
        raise AbsorberError(f"stage-1 twin paths failed for pair ({a},{b}): {exc}", "U1") from exc
    q1, q2 = sol1.paths[0], sol1.paths[1]
    if len(q1) > len(q2):
        q1, q2 = q2, q1
    scratch = set(avail_u1) - set(q1[1:-1]) - set(q2[1:-1])
    if len(q1) - 1 < min_stage1:
        q1 = _pad_path(g, q1, min_stage1, scratch)
    if q1 is not None and len(q1) < len(q2):
        q1 = _pad_path(g, q1, len(q2) - 1, scratch)
    if q1 is None:
        raise AbsorberError(
            f"could not equalise stage-1 path lengths for pair ({a},{b})", "U1"
        )
    if len(q2) - 1 < min_stage1:
        q2 = _pad_path(g, q2, max(min_stage1, len(q1) - 1), scratch)
        if q2 is None:
            raise AbsorberError(f"could not pad stage-1 twin for pair ({a},{b})", "U1")
    if len(q1) != len(q2):
        q2 = _pad_path(g, q2, len(q1) - 1, scratch) if len(q2) < len(q1) else q2
        q1 = _pad_path(g, q1, len(q2) - 1, scratch) if q1 and len(q1) < len(q2) else q1
        if q1 is None or q2 is None or len(q1) != len(q2):
            raise AbsorberError(f"stage-1 lengths would not equalise for ({a},{b})", "U1")

    u, v = list(q1), list(q2)
    t = len(u)
    assert t >= 4 and t % 2 == 0, "twin a-b paths must have even vertex count >= 4"
    avail_u1 -= set(u[1:-1]) | set(v[1:-1])

    zig = [(y, v[1])]
    zig += [(u[i - 1], v[i]) for i in range(2, t - 1)]
    zig += [(u[t - 2], z)]
    try:
        sol2 = connect_pairs_disjoint(
            g,
            ConnectionRequest(
                pairs=tuple(zig),
                V=tuple(sorted(avail_u2)),
                max_len=max_len,
                min_len=1,
            ),
        )
    except ConnectionError as exc:
        raise AbsorberError(
            f"stage-2 staircase failed for pair ({a},{b}) endpoints ({y},{z}): {exc}", "U2"
        ) from exc
    P = {i + 1: sol2.paths[i] for i in range(len(zig))}
    for path in P.values():
        avail_u2 -= set(path[1:-1])
    return u, v, P, t


def _cell_to_absorber(g, a, b, y, z, u, v, P, t):
    interior = set()
    for path in P.values():
        interior.update(path)
    interior.update(u[1:-1])
    interior.update(v[1:-1])
    interior -= {a, b, y, z}
    ab = Absorber(
        pair=(a, b),
        endpoints=(y, z),
        interior=tuple(sorted(interior)),
        path_without=_weave_without(P, u, v, t),
        path_with=_weave_with(P, u, v, t),
    )
    ok, clause = verify_absorber(g, ab)
    if not ok:
        raise AbsorberError(f"built absorber fails its own check: {clause}", "assemble")
    return ab


@dataclass(frozen=True)
class AbsorberGrid:
    cells: tuple  # cells[i][j]: absorber row i, column j
    K: tuple  # (a_j, b_j) pairs
    X: tuple  # x_1 .. x_{s+1}
    U_abs: tuple  # union of interiors, sorted
    caps_achieved: dict

    @property
    def k(self):
        return len(self.cells)

    @property
    def s(self):
        return len(self.K)

    def column_interior_size(self, j):
        return len(self.cells[0][j].interior)


def build_absorber_chain(
    g: BipartiteGraph,
    K,
    X,
    U1,
    U2,
    k: int,
    max_len: Optional[int] = None,
    caps: Optional[tuple] = None,
    equalize_columns: bool = True,
) -> AbsorberGrid:
    """k absorbers per pair of K, endpoints walking along X, interiors
    pairwise disjoint inside U1 + U2.

    ``caps`` optionally declares the hypothesis bounds (cap on a U1 vertex's
    degree into the pair vertices' reservoir, cap on a U2 vertex's degree
    into U1 + X); achieved maxima are recorded either way. With
    ``equalize_columns`` every column's k interiors are padded to one size,
    which keeps downstream per-cycle set sizes independent of the random
    assignment.
    """
    K = [tuple(p) for p in K]
    X = list(X)
    if len(X) != len(K) + 1:
        raise AbsorberError(f"|X| = {len(X)} must equal |K|+1 = {len(K) + 1}", "pre")
    u1 = set(U1)
    u2 = set(U2)
    if u1 & u2:
        raise AbsorberError("U1 and U2 must be disjoint", "pre")
    reservoir = {t for p in K for t in p}
    for a, b in K:
        if g.side[a] != SIDE_A or g.side[b] != SIDE_B:
            raise AbsorberError(f"pair ({a},{b}) must pair a side-A with a side-B vertex", "pre")
    for t in reservoir | set(X):
        if t in u1 or t in u2:
            raise AbsorberError(f"terminal {t} lies inside U1/U2", "pre")

    cap_u1 = max(
        (sum(1 for w in g.neighbors(v) if w in reservoir) for v in u1), default=0
    )
    u1x = u1 | set(X)
    cap_u2 = max(
        (sum(1 for w in g.neighbors(v) if w in u1x) for v in u2), default=0
    )
    achieved = {"u1_into_reservoir": cap_u1, "u2_into_u1_and_x": cap_u2}
    if caps is not None:
        c1, c2 = caps
        if cap_u1 > c1:
            raise AbsorberError(f"U1 degree cap violated: {cap_u1} > {c1}", "pre")
        if cap_u2 > c2:
            raise AbsorberError(f"U2 degree cap violated: {cap_u2} > {c2}", "pre")
    if max_len is None:
        max_len = max(4, math.ceil(max(1.0, math.log2(max(2, g.n))) ** 6))

    raw = [[None] * len(K) for _ in range(k)]
    for j, (a, b) in enumerate(K):
        y, z = X[j], X[j + 1]
        for i in range(k):
            raw[i][j] = _build_cell(g, a, b, y, z, u1, u2, max_len)

    cells = [[None] * len(K) for _ in range(k)]
    for j, (a, b) in enumerate(K):
        y, z = X[j], X[j + 1]
        if equalize_columns and k > 1:
            sizes = []
            for i in range(k):
                u, v, P, t = raw[i][j]
                sizes.append(len(set(u[1:-1]) | set(v[1:-1]) | {
                    w for p in P.values() for w in p[1:-1]
                }))
            target = max(sizes)
            for i in range(k):
                u, v, P, t = raw[i][j]
                size = sizes[i]
                while size < target:
                    idx = max(P, key=lambda q: len(P[q]))
                    padded = _pad_path(g, P[idx], len(P[idx]) - 1 + 2, u2)
                    if padded is None:
                        raise AbsorberError(
                            f"column {j} interior padding ran out of room", "U2"
                        )
                    P[idx] = padded
                    size += 2
        for i in range(k):
            u, v, P, t = raw[i][j]
            cells[i][j] = _cell_to_absorber(g, a, b, y, z, u, v, P, t)

    interiors = [ab.interior for row in cells for ab in row]
    seen = set()
    for s in interiors:
        if seen & set(s):
            raise AbsorberError("grid interiors are not pairwise disjoint", "assemble")
        seen |= set(s)
    u_abs = tuple(sorted(seen))
    if equalize_columns and k > 1:
        for j in range(len(K)):
            sizes = {len(cells[i][j].interior) for i in range(k)}
            assert len(sizes) == 1, "column interiors must end equal-sized"
    return AbsorberGrid(
        cells=tuple(tuple(row) for row in cells),
        K=tuple(K),
        X=tuple(X),
        U_abs=u_abs,
        caps_achieved=achieved,
    )


# ---------------------------------------------------------------------------
# Robustly matchable bipartite graphs


@dataclass(frozen=True)
class RMBG:
    """Pair-graph whose perfect matchings survive removing any admissible
    balanced chunk of the removable part (A1, B1)."""

    n: int
    edges: tuple
    a1: tuple
    b1: tuple
    a2: tuple
    b2: tuple
    m: int
    max_degree: int
    verify_mode: str

    @property
    def left(self):
        return tuple(sorted(self.a1 + self.a2))

    @property
    def right(self):
        return tuple(sorted(self.b1 + self.b2))

    def adjacency(self):
        adj = {v: [] for v in self.left}
        for u, v in self.edges:
            a, b = (u, v) if u in set(self.left) else (v, u)
            adj[a].append(b)
        return adj

    def has_pm_after_removing(self, removed_a1, removed_b1) -> bool:
        ra = set(removed_a1)
        rb = set(removed_b1)
        if not (ra <= set(self.a1) and rb <= set(self.b1)):
            raise RMBGError("removed vertices must come from A1/B1")
        if len(ra) != len(rb):
            return False
        keep_left = [v for v in self.left if v not in ra]
        keep_right = {v for v in self.right if v not in rb}
        adj = {
            u: [w for w in nbrs if w in keep_right]
            for u, nbrs in self.adjacency().items()
            if u in set(keep_left)
        }
        return len(max_bipartite_matching(adj)) == len(keep_left)

    def matching_after_removing(self, removed_a1, removed_b1):
        ra, rb = set(removed_a1), set(removed_b1)
        keep_left = [v for v in self.left if v not in ra]
        keep_right = {v for v in self.right if v not in rb}
        adj = {
            u: [w for w in nbrs if w in keep_right]
            for u, nbrs in self.adjacency().items()
            if u in set(keep_left)
        }
        matched = max_bipartite_matching(adj)
        if len(matched) != len(keep_left) or len(keep_left) != len(keep_right):
            return None
        return tuple(sorted((u, w) for u, w in matched.items()))


def _random_saturating_matchings(x_ids, yz_ids, count, rng):
    edges = set()
    for r in range(count):
        targets = rng.spawn(f"m-{r}").permutation(len(yz_ids))
        for i, x in enumerate(x_ids):
            edges.add((x, yz_ids[targets[i]]))
    return edges


def _verify_core(x_ids, yz_ids, z_ids, m, edges, mode, trials, rng, cap=4000):
    """Core property: for every Z' of size m, X saturates into Y + Z'."""
    adj_full = {x: [] for x in x_ids}
    for u, v in edges:
        adj_full[u].append(v)
    z_set = set(z_ids)
    y_part = [v for v in yz_ids if v not in z_set]

    def ok_for(z_prime):
        keep = set(y_part) | set(z_prime)
        adj = {x: [w for w in adj_full[x] if w in keep] for x in x_ids}
        return len(max_bipartite_matching(adj)) == len(x_ids)

    if mode == "exact" and math.comb(len(z_ids), m) <= cap:
        return all(ok_for(zp) for zp in combinations(z_ids, m)), "exact"
    for t in range(trials):
        zp = rng.spawn(f"zp-{t}").subset(z_ids, m)
        if not ok_for(zp):
            return False, "sampled"
    return True, "sampled"


def build_rmbg(
    m: int,
    rng: SeededRng,
    verify: str = "exact",
    matchings: int = 60,
    trials: int = 200,
    max_retries: int = 12,
    exhaustive_cap: int = 4000,
) -> RMBG:
    """Randomised construction + verification of the combined pair-graph.

    Two verified core graphs (X of size 3m against Y+Z of sizes 2m+2m) are
    combined disjointly with a perfect matching between the two Z parts,
    plus one parity edge when needed so the edge count is odd. Sizes come
    out as |A1| = |B1| = 2m and |A2| = |B2| = 5m with maximum degree at
    most 102. The cited source only proves existence for large m; here any
    m is accepted iff verification passes, and the mode is recorded.
    """
    if m < 1:
        raise RMBGError("m must be positive")
    if matchings > 100:
        raise RMBGError("more than 100 saturating matchings would break the degree cap")

    copies = []
    for c in range(2):
        built = False
        for attempt in range(max_retries):
            stream = rng.spawn(f"copy-{c}-try-{attempt}")
            x_ids = tuple(range(3 * m))
            yz_ids = tuple(range(3 * m, 7 * m))
            z_ids = yz_ids[2 * m :]
            edges = _random_saturating_matchings(x_ids, yz_ids, matchings, stream)
            degs = {}
            for u, v in edges:
                degs[u] = degs.get(u, 0) + 1
                degs[v] = degs.get(v, 0) + 1
            if max(degs.values()) > 100:
                continue
            ok, mode = _verify_core(
                x_ids, yz_ids, z_ids, m, edges, verify, trials, stream, exhaustive_cap
            )
            if ok:
                copies.append((x_ids, yz_ids, z_ids, frozenset(edges), mode))
                built = True
                break
        if not built:
            raise RMBGError(
                f"core graph {c} failed verification on {max_retries} draws "
                f"(m={m}, matchings={matchings}); try more matchings"
            )

    # Combine: left class A1+A2, right class B1+B2.
    # Copy 1 contributes Z1 -> A1, Y1 -> A2, X1 -> B2.
    # Copy 2 contributes Z2 -> B1, X2 -> A2, Y2 -> B2.
    x1, yz1, z1, e1, mode1 = copies[0]
    x2, yz2, z2, e2, mode2 = copies[1]
    y1 = yz1[: 2 * m]
    y2 = yz2[: 2 * m]

    label = {}
    next_id = [0]

    def fresh(tag, ids):
        out = []
        for i in ids:
            label[(tag, i)] = next_id[0]
            out.append(next_id[0])
            next_id[0] += 1
        return tuple(out)

    a1 = fresh(1, z1)
    a2 = fresh(1, y1) + fresh(2, x2)
    b1 = fresh(2, z2)
    b2 = fresh(2, y2) + fresh(1, x1)

    edges = set()
    for u, v in e1:
        edges.add(norm_edge(label[(1, u)], label[(1, v)]))
    for u, v in e2:
        edges.add(norm_edge(label[(2, u)], label[(2, v)]))
    for i in range(2 * m):
        edges.add(norm_edge(a1[i], b1[i]))

    if len(edges) % 2 == 0:
        deg = {}
        for u, v in edges:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        left_all = sorted(a1 + a2, key=lambda v: (deg.get(v, 0), v))
        right_all = sorted(b1 + b2, key=lambda v: (deg.get(v, 0), v))
        added = False
        for u in left_all:
            for v in right_all:
                if norm_edge(u, v) not in edges:
                    edges.add(norm_edge(u, v))
                    added = True
                    break
            if added:
                break
        if not added:
            raise RMBGError("no room for a parity edge")

    deg = {}
    for u, v in edges:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    max_deg = max(deg.values())
    if max_deg > 102:
        raise RMBGError(f"combined degree {max_deg} exceeds 102")

    rmbg = RMBG(
        n=next_id[0],
        edges=tuple(sorted(edges)),
        a1=a1,
        b1=b1,
        a2=tuple(sorted(a2)),
        b2=tuple(sorted(b2)),
        m=m,
        max_degree=max_deg,
        verify_mode=f"{mode1}/{mode2}",
    )

    # Combined-level verification of the survival property.
    if verify == "exact" and sum(
        math.comb(2 * m, j) ** 2 for j in range(m, 2 * m + 1)
    ) <= exhaustive_cap:
        for j in range(0, m + 1):
            # removing j <= m per side must leave a perfect matching
            for ra in combinations(a1, j):
                for rb in combinations(b1, j):
                    if not rmbg.has_pm_after_removing(ra, rb):
                        raise RMBGError(
                            f"combined graph not robust: removing {ra}/{rb} kills the matching"
                        )
    else:
        check = rng.spawn("combined-check")
        for t in range(trials):
            j = check.spawn(f"size-{t}").integer(0, m + 1)
            ra = check.spawn(f"ra-{t}").subset(a1, j)
            rb = check.spawn(f"rb-{t}").subset(b1, j)
            if not rmbg.has_pm_after_removing(ra, rb):
                raise RMBGError(f"combined graph not robust on sampled removal {ra}/{rb}")
    return rmbg


# ---------------------------------------------------------------------------
# Random assignment of grid rows to cycles and absorbing-path assembly


@dataclass(frozen=True)
class AbsorberAssignment:
    sigmas: tuple  # per column j, a permutation of range(k)
    per_cycle_interiors: tuple  # U_abs^i, sorted tuples


def assign_and_absorb(
    grid: AbsorberGrid, k: int, rng: SeededRng, per_cycle_pairs, sigmas=None
):
    """Draw one independent uniform permutation per column, then build each
    cycle's absorbing path by switching exactly the pairs it must absorb.

    ``per_cycle_pairs[i]`` lists the pairs of K the i-th path absorbs; it
    must be a matching (vertex-disjoint pairs) inside K. Callers that
    already fixed the column permutations (the pipeline does, since the
    per-cycle vertex sets depend on them) pass ``sigmas`` instead of
    drawing. Returns the assignment plus the k paths, verified for the
    absorption identity and pairwise edge-disjointness.
    """
    if k != grid.k:
        raise AbsorberError(f"grid has {grid.k} rows, requested k={k}", "assign")
    kset = set(grid.K)
    for i, pairs in enumerate(per_cycle_pairs):
        used = set()
        for p in pairs:
            if tuple(p) not in kset:
                raise AbsorberError(f"cycle {i} absorbs unknown pair {p}", "assign")
            if used & set(p):
                raise AbsorberError(f"cycle {i} pair list is not a matching", "assign")
            used |= set(p)

    if sigmas is None:
        sigmas = tuple(
            rng.spawn(f"sigma-{j}").permutation(k) for j in range(grid.s)
        )
    else:
        sigmas = tuple(tuple(sg) for sg in sigmas)
        if len(sigmas) != grid.s or any(sorted(sg) != list(range(k)) for sg in sigmas):
            raise AbsorberError("provided sigmas are not per-column k-permutations", "assign")
    paths = []
    interiors = []
    for i in range(k):
        absorb_here = {tuple(p) for p in per_cycle_pairs[i]}
        segments = []
        interior = set()
        for j in range(grid.s):
            cell = grid.cells[sigmas[j][i]][j]
            interior |= set(cell.interior)
            seg = cell.path_with if grid.K[j] in absorb_here else cell.path_without
            segments.append(seg)
        full = list(segments[0])
        for seg in segments[1:]:
            assert full[-1] == seg[0], "consecutive absorbers must share an endpoint"
            full.extend(seg[1:])
        path = tuple(full)
        expected = interior | set(grid.X) | {t for p in absorb_here for t in p}
        if set(path) != expected:
            raise AbsorberError(
                f"absorption identity failed for cycle {i}: "
                f"{len(set(path))} vertices vs {len(expected)} expected",
                "absorb",
            )
        paths.append(path)
        interiors.append(tuple(sorted(interior)))

    edge_sets = [set(path_edges(p)) for p in paths]
    for i in range(k):
        for j in range(i + 1, k):
            if edge_sets[i] & edge_sets[j]:
                raise AbsorberError(
                    f"absorbing paths {i} and {j} share an edge", "absorb"
                )
    return AbsorberAssignment(sigmas, tuple(interiors)), tuple(paths)
