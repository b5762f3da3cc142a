"""End-to-end search for k edge-disjoint cycles on a common vertex set.

Stage order: extract a bipartite almost-regular expander; flatten degrees
and draw the reservoir/connector/absorber sets with verified counting
properties; build the robustly matchable pair graph and embed it on the
reservoir; construct the absorber grid; randomly assign absorber rows to
cycles; draw per-cycle layered matchings avoiding absorber and earlier
matching edges; stitch the linear forests into long paths through the
first reservoir half; close each path with its absorbing path, switching
exactly the pairs the robust matching dictates; verify the family.

Every finite claim a stage relies on (sizes, balancedness, degree windows,
disjointness, path lengths, usage caps) is re-checked by code after the
producing stage. A failure returns a structured report naming the stage,
the violated bound, and the seeds, so reruns reproduce it byte-for-byte.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass, field, asdict
from typing import Optional

from . import absorb as absorb_mod
from .absorb import AbsorberGrid, assign_and_absorb, build_absorber_chain, build_rmbg
from .connect import ConnectionRequest, connect_pairs_disjoint, default_max_len
from .errors import (
    AbsorberError,
    ConnectionError,
    EquicycleError,
    ExtractionError,
    InvalidGraphError,
    LeftoverError,
    PipelineError,
    RMBGError,
    RegularisationError,
    SamplingError,
)
from .expander import extract_expander
from .forest import (
    LayeredInstance,
    assemble_forest,
    leftover_set,
    matchings_with_leftover,
)
from .graph import (
    SIDE_A,
    SIDE_B,
    BipartiteGraph,
    Graph,
    norm_edge,
    path_edges,
    validate_path,
)
from .regularize import RegularisationConfig, regularize
from .rng import SeededRng
from .sampling import BalancedPartition, PRandom, sample
from .verify import verify_cycles

__all__ = [
    "PipelineConfig",
    "PipelinePlan",
    "CycleFamily",
    "FailureReport",
    "select_sets",
    "run_pipeline",
    "verify_cycles",
    "bundled_scenario",
]


@dataclass(frozen=True)
class PipelineConfig:
    k: int = 2
    mode: str = "desk"  # "desk" | "paper"
    seed: int = 0
    epsilon: float = 2**-5
    n_exact: int = 18
    # balanced half-sizes; |R1| = 2*2*rmbg_m, |R2| = 2*5*rmbg_m by the pair-graph shape
    rmbg_m: int = 3
    rmbg_matchings: int = 4
    m3: int = 40  # endpoint-pool half size (X is truncated to |K|+1)
    m4: int = 280  # U1 half size
    m5: int = 150  # U2 half size
    t_layers: object = "width:4"  # "max", "width:N" (N per side per layer), or explicit t
    connector_replication: int = 1  # the source uses 5; desk graphs rarely collide
    max_len: Optional[int] = None
    connector_max_len: int = 8  # length cap for reservoir connectors
    absorber_max_len: int = 12  # length cap inside absorber gadgets
    reg_epsilon: float = 0.01
    reg_max_steps: int = 50
    tracked_fraction: float = 1.0
    paper_C: float = 100.0
    select_c0: float = 1.0  # desk-mode stand-in for the selection constant
    select_topup_boost: float = 3.0  # desk-mode oversampling of the top-up pools
    stage_retries: int = 4
    select_retries: int = 8
    matching_attempts: int = 30
    exhaustive_cap: int = 300_000
    expander_budget: int = 120
    connecting_suite_queries: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise InvalidGraphError("k must be at least 1")
        if self.mode not in ("desk", "paper"):
            raise InvalidGraphError(f"unknown mode {self.mode!r}")

    def to_dict(self):
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class PipelinePlan:
    expander: BipartiteGraph  # G', working coordinate system
    expander_parent: tuple  # G' ids -> input ids
    s_expander: float
    regular_edges: frozenset  # edge set of the flattened subgraph H, in G' ids
    d_regular_fit: Optional[float]  # the (A4) window centre
    r1: tuple
    r2: tuple
    x_pool: tuple
    u1: tuple
    u2: tuple
    caps: dict
    log: list = field(default_factory=list)


@dataclass
class CycleFamily:
    cycles: tuple  # vertex tuples in INPUT ids
    common_vertices: tuple
    k: int
    provenance: dict  # per-cycle segments, expander ids, plus the parent map

    def to_dict(self):
        return {
            "k": self.k,
            "cycles": [list(c) for c in self.cycles],
            "common_vertices": list(self.common_vertices),
            "provenance": self.provenance,
        }


@dataclass
class FailureReport:
    stage: str
    reason: str
    seed: int
    config_hash: str
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "stage": self.stage,
            "reason": self.reason,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "details": self.details,
        }


@dataclass
class PipelineResult:
    family: Optional[CycleFamily]
    failure: Optional[FailureReport]
    certificates: list

    @property
    def ok(self):
        return self.family is not None


def _fit_window(degrees, spread_coeff):
    """Centre d* with every degree in [d* - c*d*^(2/3), d* + c*d*^(2/3)], or None."""
    if not degrees:
        return None
    lo, hi = min(degrees), max(degrees)
    if lo == hi:
        return float(lo)
    candidates = [lo + (hi - lo) * i / 255 for i in range(256)]
    for d in candidates:
        if d <= 0:
            continue
        slack = spread_coeff * d ** (2 / 3)
        if d - slack <= lo and hi <= d + slack:
            return float(d)
    return None


def _balanced_counts(side, vertices):
    a = sum(1 for v in vertices if side[v] == SIDE_A)
    return a, len(vertices) - a


def select_sets(g: BipartiteGraph, cfg: PipelineConfig, rng: SeededRng) -> PipelinePlan:
    """Flatten degrees, then draw the five disjoint balanced working sets.

    Vertices are placed in candidate sets R_i / top-up pools T_i with the
    two-stage probabilities, then each S_i is topped up to its exact
    balanced target size. Counting properties (sizes, balance, the
    regularity window on U1+U2, degree caps into every set) are verified by
    direct count; failures redraw on fresh streams.
    """
    degs = g.degrees()
    d_min, d_max = min(degs), max(degs)
    if d_min == 0:
        raise RegularisationError("expander has an isolated vertex")
    lam = max(1.0, d_max / d_min)
    reg_cfg = RegularisationConfig(
        lam=lam,
        epsilon_floor=cfg.reg_epsilon if cfg.mode == "desk" else None,
        max_steps=cfg.reg_max_steps,
        mode=cfg.mode,
        C=cfg.paper_C,
    )
    tracked = (
        tuple(range(g.n))
        if cfg.tracked_fraction >= 1.0
        else sample(range(g.n), PRandom(cfg.tracked_fraction), rng.spawn("tracked"))
    )
    reg = regularize(g, reg_cfg, tracked, rng.spawn("regularize"))
    h = reg.subgraph.graph
    h_parent = reg.subgraph.parent
    h_edges = frozenset(
        norm_edge(h_parent[u], h_parent[v]) for u, v in h.edges
    )
    n_prime = h.n
    d_prime = reg.d_prime
    logn = max(1.0, math.log2(max(2, g.n)))
    c0 = cfg.paper_C if cfg.mode == "paper" else cfg.select_c0
    boost = 1.0 if cfg.mode == "paper" else cfg.select_topup_boost

    m1 = 2 * cfg.rmbg_m
    m2 = 5 * cfg.rmbg_m
    targets = [m1, m2, cfg.m3, cfg.m4, cfg.m5]
    h_vertices_orig = list(h_parent)
    side = g.side

    def two_stage_draw(stream):
        probs = []
        for m_i in targets:
            p_r = 2 * m_i / n_prime - 4 * c0 * m_i * logn / (d_prime * n_prime) - m_i ** 0.6 / n_prime
            p_t = boost * (10 * c0 * m_i * logn / (d_prime * n_prime) + 2 * m_i ** 0.6 / n_prime)
            p_r = max(0.0, p_r)
            probs.append((p_r, p_t))
        total = sum(p_r + p_t for p_r, p_t in probs)
        if total > 1.0:
            probs = [(p_r / total, p_t / total) for p_r, p_t in probs]
        draws = stream.uniforms(len(h_vertices_orig))
        r_sets = [[] for _ in targets]
        t_sets = [[] for _ in targets]
        for idx, v in enumerate(h_vertices_orig):
            x = draws[idx]
            acc = 0.0
            for i, (p_r, p_t) in enumerate(probs):
                if x < acc + p_r:
                    r_sets[i].append(v)
                    break
                acc += p_r
                if x < acc + p_t:
                    t_sets[i].append(v)
                    break
                acc += p_t
        sets = []
        for i, m_i in enumerate(targets):
            chosen = []
            for s_label in (SIDE_A, SIDE_B):
                r_side = [v for v in r_sets[i] if side[v] == s_label]
                t_side = [v for v in t_sets[i] if side[v] == s_label]
                if len(r_side) > m_i or len(r_side) + len(t_side) < m_i:
                    return None, f"set {i} side counts infeasible"
                chosen.extend(r_side)
                chosen.extend(t_side[: m_i - len(r_side)])
            sets.append(tuple(sorted(chosen)))
        return sets, None

    def slice_draw(stream):
        # uniform disjoint balanced sets by slicing one shuffle per side;
        # desk fallback for instances where the targets nearly fill V(H)
        by_side = {
            s_label: stream.spawn(f"slice-{s_label}").shuffled(
                [v for v in h_vertices_orig if side[v] == s_label]
            )
            for s_label in (SIDE_A, SIDE_B)
        }
        if any(len(vs) < sum(targets) for vs in by_side.values()):
            return None, "targets exceed a side of V(H)"
        sets = []
        offset = 0
        for m_i in targets:
            chosen = (
                by_side[SIDE_A][offset : offset + m_i]
                + by_side[SIDE_B][offset : offset + m_i]
            )
            sets.append(tuple(sorted(chosen)))
            offset += m_i
        return sets, None

    last_error = None
    for attempt in range(cfg.select_retries):
        stream = rng.spawn(f"select-{attempt}")
        used_fallback = False
        sets, err = two_stage_draw(stream)
        if sets is None and cfg.mode == "desk":
            sets, err = slice_draw(stream.spawn("fallback"))
            used_fallback = True
        if sets is None:
            last_error = f"{err} on attempt {attempt}"
            continue

        r1, r2, x_pool, u1, u2 = sets
        union = u1 + u2
        fit = _fit_window([sum(1 for w in g.neighbors(v) if w in set(union)) for v in union], 2.0)
        h_adj_cache = {}
        uset = set(union)
        fit_h = _fit_window(
            [
                sum(1 for w in g.neighbors(v) if w in uset and norm_edge(v, w) in h_edges)
                for v in union
            ],
            2.0,
        )
        if fit_h is None:
            last_error = f"(A4) regularity window failed on attempt {attempt}"
            continue

        caps = {}
        names = ["R1", "R2", "X", "U1", "U2"]
        degree_cap_ok = True
        d_avg = g.average_degree()
        for name, s_i, m_i in zip(names, sets, targets):
            s_set = set(s_i)
            worst = max(len(g.adj_set(v) & s_set) for v in range(g.n))
            bound = c0 * d_avg * m_i / g.n
            caps[name] = {"max_degree_into": worst, "bound": bound, "size": len(s_i)}
            if cfg.mode == "paper" and worst > bound:
                degree_cap_ok = False
        if not degree_cap_ok:
            last_error = "(A5) degree caps failed"
            continue

        plan = PipelinePlan(
            expander=g,
            expander_parent=tuple(range(g.n)),
            s_expander=0.0,
            regular_edges=h_edges,
            d_regular_fit=fit_h,
            r1=r1,
            r2=r2,
            x_pool=x_pool,
            u1=u1,
            u2=u2,
            caps=caps,
            log=[{"select_attempt": attempt, "slice_fallback": used_fallback,
                  "regularize_steps": reg.executed_steps,
                  "regularize_vacuous": reg.vacuous, "d_prime": d_prime}],
        )
        return plan
    raise SamplingError(f"set selection failed after {cfg.select_retries} attempts: {last_error}")


def _truncate_x(x_pool, side, s):
    """Alternating x_1 in A, x_2 in B, ... of length s+1 (s odd)."""
    need = (s + 1) // 2
    a_pool = sorted(v for v in x_pool if side[v] == SIDE_A)
    b_pool = sorted(v for v in x_pool if side[v] == SIDE_B)
    if len(a_pool) < need or len(b_pool) < need:
        raise SamplingError(
            f"endpoint pool too small: need {need} per side, have {len(a_pool)}/{len(b_pool)}"
        )
    out = []
    for j in range(need):
        out.append(a_pool[j])
        out.append(b_pool[j])
    return tuple(out[: s + 1])


def _embed_rmbg(rmbg, r1, r2, side):
    """Map the abstract pair graph onto the reservoir; returns (K, vertex_map)."""
    r1a = sorted(v for v in r1 if side[v] == SIDE_A)
    r1b = sorted(v for v in r1 if side[v] == SIDE_B)
    r2a = sorted(v for v in r2 if side[v] == SIDE_A)
    r2b = sorted(v for v in r2 if side[v] == SIDE_B)
    if len(r1a) != len(rmbg.a1) or len(r2a) != len(rmbg.a2):
        raise RMBGError(
            f"reservoir sides ({len(r1a)},{len(r2a)}) do not fit the pair graph "
            f"({len(rmbg.a1)},{len(rmbg.a2)})"
        )
    vmap = {}
    for ids, reals in ((rmbg.a1, r1a), (rmbg.b1, r1b), (rmbg.a2, r2a), (rmbg.b2, r2b)):
        for abstract, real in zip(ids, reals):
            vmap[abstract] = real
    left = set(rmbg.left)
    K = []
    for u, v in rmbg.edges:
        lu, rv = (u, v) if u in left else (v, u)
        K.append((vmap[lu], vmap[rv]))
    K.sort()
    counts = Counter(t for p in K for t in p)
    if counts and max(counts.values()) > 102:
        raise RMBGError("a reservoir vertex appears in more than 102 pairs")
    return tuple(K), vmap


def _enumeration_order(paths, side, x1_side):
    """Order forest paths to maximise opposite-side stitch endpoints.

    An opposite-side stitch pair can ride a direct edge (no reservoir
    internals) while a same-side pair always needs one internal, so the
    chain wants each path to start on the side opposite the previous end,
    the first path to start opposite the first anchor and the last to end
    on the last anchor's own side.
    """
    remaining = {}
    for idx, p in enumerate(paths):
        remaining.setdefault((side[p[0]], side[p[-1]]), []).append(idx)
    for lst in remaining.values():
        lst.reverse()  # pop() takes the lexicographically first path

    def opp(s):
        return SIDE_B if s == SIDE_A else SIDE_A

    def take(want_start):
        # preferred end: the one whose opposite side still has starters left
        keeps = remaining.get((want_start, opp(want_start)), [])
        flips = remaining.get((want_start, want_start), [])
        other_pool = sum(
            len(remaining.get((opp(want_start), e), [])) for e in (SIDE_A, SIDE_B)
        )
        if keeps and (not flips or other_pool == 0):
            return keeps.pop(), want_start
        if flips:
            return flips.pop(), opp(want_start)
        if keeps:
            return keeps.pop(), want_start
        return None, None

    order = []
    want = opp(x1_side)
    total = len(paths)
    while len(order) < total:
        idx, want_after = take(want)
        if idx is None:
            # same-side stitch unavoidable: continue from whatever remains
            for key in sorted(remaining):
                if remaining[key]:
                    idx = remaining[key].pop()
                    want_after = opp(key[1])
                    break
        order.append(idx)
        want = want_after
    return [paths[i] for i in order]


def run_pipeline(g: Graph, cfg: PipelineConfig) -> PipelineResult:
    certs: list = []
    rng = SeededRng(cfg.seed, "pipeline")

    def fail(stage, reason, **details):
        report = FailureReport(stage, reason, cfg.seed, cfg.config_hash(), details)
        certs.append({"stage": stage, "status": "failed", "reason": reason})
        return PipelineResult(None, report, certs)

    # ---- stage: expander extraction -------------------------------------
    try:
        gexp, s_exp, trace = extract_expander(
            g,
            cfg.epsilon,
            n_exact=cfg.n_exact,
            heuristic_budget=cfg.expander_budget,
            rng=rng.spawn("extract"),
        )
    except (ExtractionError, InvalidGraphError) as exc:
        return fail("extract-expander", str(exc))
    exp_parent = getattr(trace, "parent", tuple(range(gexp.n)))
    certs.append(
        {
            "stage": "extract-expander",
            "status": "ok",
            "n": gexp.n,
            "m": gexp.m,
            "s": s_exp,
            "trace": trace.to_dict(),
        }
    )

    # ---- stage: set selection -------------------------------------------
    try:
        plan = select_sets(gexp, cfg, rng.spawn("select"))
    except (RegularisationError, SamplingError) as exc:
        return fail("select-sets", str(exc))
    plan.s_expander = s_exp
    plan.expander_parent = exp_parent
    side = gexp.side
    for name, s_i in (("R1", plan.r1), ("R2", plan.r2), ("X", plan.x_pool),
                      ("U1", plan.u1), ("U2", plan.u2)):
        a, b = _balanced_counts(side, s_i)
        if a != b:
            return fail("select-sets", f"(A1) {name} unbalanced: {a} vs {b}")
    all_sets = plan.r1 + plan.r2 + plan.x_pool + plan.u1 + plan.u2
    if len(set(all_sets)) != len(all_sets):
        return fail("select-sets", "working sets are not pairwise disjoint")
    certs.append({"stage": "select-sets", "status": "ok", "caps": plan.caps,
                  "d_fit": plan.d_regular_fit, "log": plan.log})

    # ---- stage: RMBG ------------------------------------------------------
    try:
        rmbg = build_rmbg(
            cfg.rmbg_m,
            rng.spawn("rmbg"),
            verify="exact",
            matchings=cfg.rmbg_matchings,
        )
        K, vmap = _embed_rmbg(rmbg, plan.r1, plan.r2, side)
    except RMBGError as exc:
        return fail("rmbg", str(exc))
    s = len(K)
    if s % 2 == 0:
        return fail("rmbg", f"pair count {s} is even")
    try:
        X = _truncate_x(plan.x_pool, side, s)
    except SamplingError as exc:
        return fail("rmbg", str(exc))
    certs.append({"stage": "rmbg", "status": "ok", "pairs": s,
                  "max_degree": rmbg.max_degree, "verify": rmbg.verify_mode})

    # ---- stage: absorber grid ---------------------------------------------
    max_len = cfg.max_len if cfg.max_len is not None else min(
        default_max_len(gexp.n), max(8, gexp.n // 4)
    )
    try:
        grid = build_absorber_chain(
            gexp, K, X, plan.u1, plan.u2, cfg.k,
            max_len=min(max_len, cfg.absorber_max_len), equalize_columns=True
        )
    except AbsorberError as exc:
        return fail("absorber-grid", f"[{exc.stage}] {exc}")
    a_cnt, b_cnt = _balanced_counts(side, grid.U_abs)
    if a_cnt != b_cnt:
        return fail("absorber-grid", f"U_abs unbalanced: {a_cnt} vs {b_cnt}")
    absorber_edges = set()
    for row in grid.cells:
        for cell in row:
            absorber_edges.update(path_edges(cell.path_without))
            absorber_edges.update(path_edges(cell.path_with))
    certs.append(
        {
            "stage": "absorber-grid",
            "status": "ok",
            "cells": cfg.k * s,
            "u_abs": len(grid.U_abs),
            "caps_achieved": grid.caps_achieved,
            "column_sizes": [grid.column_interior_size(j) for j in range(s)],
        }
    )

    # ---- randomised back half with stage-local retries ---------------------
    h_adj = {}
    for u, v in plan.regular_edges:
        h_adj.setdefault(u, set()).add(v)
        h_adj.setdefault(v, set()).add(u)
    u_unused = sorted(set(plan.u1 + plan.u2) - set(grid.U_abs))
    last_reason = "no attempts executed"
    for attempt in range(cfg.stage_retries):
        outcome = _assemble_cycles(
            g, gexp, plan, cfg, grid, K, X, rmbg, vmap, absorber_edges,
            h_adj, u_unused, max_len, rng.spawn(f"assemble-{attempt}"), certs,
        )
        if isinstance(outcome, PipelineResult):
            return outcome
        last_reason, stage = outcome
        certs.append({"stage": stage, "status": "retry", "attempt": attempt,
                      "reason": last_reason})
    return fail("assemble", f"all {cfg.stage_retries} attempts failed; last: {last_reason}")


def _assemble_cycles(
    g, gexp, plan, cfg, grid, K, X, rmbg, vmap, absorber_edges,
    h_adj, u_unused, max_len, rng, certs,
):
    """One randomised attempt at stages sigma/W/partition/matchings/
    connectors/absorption. Returns a PipelineResult on success or failure
    of a deterministic invariant; returns (reason, stage) to request a
    retry with fresh streams."""
    side = gexp.side
    k = cfg.k
    s = len(K)

    def fail(stage, reason, **details):
        report = FailureReport(stage, reason, cfg.seed, cfg.config_hash(), details)
        certs.append({"stage": stage, "status": "failed", "reason": reason})
        return PipelineResult(None, report, certs)

    # sigma: one uniform permutation per column
    sigmas = tuple(rng.spawn(f"sigma-{j}").permutation(k) for j in range(s))
    per_cycle_interior = []
    for i in range(k):
        interior = set()
        for j in range(s):
            interior |= set(grid.cells[sigmas[j][i]][j].interior)
        per_cycle_interior.append(interior)

    # layer geometry: fixed width (vertices per side per layer) or explicit t
    if cfg.t_layers == "max":
        layer_width, explicit_t = 1, None
    elif isinstance(cfg.t_layers, str) and cfg.t_layers.startswith("width:"):
        layer_width, explicit_t = int(cfg.t_layers.split(":", 1)[1]), None
    else:
        layer_width, explicit_t = None, int(cfg.t_layers)

    # W: balanced random subset of the unused absorber pool, trimmed so the
    # per-cycle side count divides into the requested layer shape
    ua = sorted(v for v in u_unused if side[v] == SIDE_A)
    ub = sorted(v for v in u_unused if side[v] == SIDE_B)
    if len(ua) != len(ub):
        return ("U_unused unbalanced", "draw-W")
    w_side = math.floor((1 - 1 / k) * len(ua))
    abs_share = (len(grid.U_abs) - len(per_cycle_interior[0])) // 2 if k > 1 else 0
    if k > 1:
        divisor = layer_width if layer_width is not None else explicit_t
        w_side -= (w_side + abs_share) % divisor
        if w_side < 0:
            return (f"cannot align W to layer divisor {divisor}", "draw-W")
    w_a = rng.spawn("W-A").subset(ua, w_side)
    w_b = rng.spawn("W-B").subset(ub, w_side)
    W = tuple(sorted(w_a + w_b))

    v_cycle = []
    for i in range(k):
        vi = tuple(sorted(set(W) | (set(grid.U_abs) - per_cycle_interior[i])))
        a_cnt, b_cnt = _balanced_counts(side, vi)
        if a_cnt != b_cnt:
            return (f"V^{i} unbalanced ({a_cnt} vs {b_cnt})", "define-Vi")
        v_cycle.append(vi)
    if k > 1 and len({len(vi) for vi in v_cycle}) != 1:
        return ("per-cycle set sizes differ despite column equalisation", "define-Vi")

    # (D): regularity of the flattened graph inside each V^i
    d_fit = plan.d_regular_fit
    d_dd = (1 - 1 / k) * d_fit if d_fit else None
    for i in range(k):
        vset = set(v_cycle[i])
        degs = [len(h_adj.get(v, set()) & vset) for v in v_cycle[i]]
        fit = _fit_window(degs, 3.0)
        if fit is None:
            if cfg.mode == "paper":
                return fail("per-cycle-regularity", f"(D) window failed for cycle {i}")
            certs.append({"stage": "per-cycle-regularity", "status": "recorded",
                          "cycle": i, "window_fit": None,
                          "min": min(degs) if degs else 0,
                          "max": max(degs) if degs else 0})

    # layered partition per cycle
    if k == 1:
        layers_per_cycle = [()]
    else:
        layers_per_cycle = []
        for i in range(k):
            m_side = sum(1 for v in v_cycle[i] if side[v] == SIDE_A)
            t = m_side // layer_width if layer_width is not None else explicit_t
            if t < 1 or m_side % t != 0:
                return (f"t={t} does not divide the side count {m_side}", "partition")
            part = sample(
                v_cycle[i],
                BalancedPartition(t),
                rng.spawn(f"partition-{i}"),
                sides=side,
            )
            if part.excluded:
                return (f"partition excluded {len(part.excluded)} vertices", "partition")
            layers_per_cycle.append(part.parts)

    # per-cycle matchings, edge-disjoint from absorbers and earlier matchings
    forbidden = set(absorber_edges)
    matchings_per_cycle = []
    leftovers = []
    logn = max(1.0, math.log2(max(2, gexp.n)))
    for i in range(k):
        layers = layers_per_cycle[i]
        if not layers:
            matchings_per_cycle.append([])
            leftovers.append(())
            continue
        verts = [v for layer in layers for v in layer]
        index = {v: pos for pos, v in enumerate(verts)}
        mini_edges = []
        for j in range(len(layers) - 1):
            right = set(layers[j + 1])
            for v in layers[j]:
                for w in h_adj.get(v, ()):  # flattened-graph edges only
                    if w in right and norm_edge(v, w) not in forbidden:
                        mini_edges.append((index[v], index[w]))
        mini_side = [0] * len(verts)
        for j, layer in enumerate(layers):
            for v in layer:
                mini_side[index[v]] = j % 2
        mini = BipartiteGraph(len(verts), mini_edges, mini_side)
        mini_layers = tuple(
            tuple(index[v] for v in layer) for layer in layers
        )
        inst = LayeredInstance(host=mini, layers=mini_layers)
        try:
            mini_matchings, report = matchings_with_leftover(
                inst, rng.spawn(f"matchings-{i}"), attempts=cfg.matching_attempts
            )
        except LeftoverError as exc:
            return (f"cycle {i} matchings: {exc}", "matchings")
        host_matchings = [
            tuple(sorted(norm_edge(verts[u], verts[v]) for u, v in mj))
            for mj in mini_matchings
        ]
        matchings_per_cycle.append(host_matchings)
        y_host = tuple(sorted(verts[v] for v in report.Y))
        leftovers.append(y_host)
        for mj in host_matchings:
            forbidden.update(mj)
        # (G2)-style leftover caps, recorded (vacuous at desk scale)
        hits = Counter()
        for y in y_host:
            for w in gexp.neighbors(y):
                hits[w] += 1
        worst = max(hits.values()) if hits else 0
        bound = 250 * gexp.average_degree() ** 0.9 * logn
        certs.append({"stage": "matchings", "status": "ok", "cycle": i,
                      "leftover": len(y_host), "max_leftover_degree": worst,
                      "leftover_degree_bound": bound, "attempts": report.attempts_used})
        if cfg.mode == "paper" and worst > bound:
            return fail("matchings", f"(G2) leftover degree cap violated for cycle {i}")

    # forests, enumeration, and the stitching pair lists
    stitch_pairs = []  # per cycle: ordered (u, v) pairs to connect through R1
    forest_paths = []  # per cycle: ordered forest paths (with virtual links)
    virtual_by_cycle = []
    for i in range(k):
        if not layers_per_cycle[i]:
            forest_paths.append([])
            virtual_by_cycle.append(set())
            stitch_pairs.append([(X[0], X[-1])])
            continue
        try:
            assembly = assemble_forest(gexp, layers_per_cycle[i], matchings_per_cycle[i])
        except InvalidGraphError as exc:
            return (f"cycle {i} forest: {exc}", "forest")
        y_check = leftover_set(layers_per_cycle[i], matchings_per_cycle[i])
        if y_check != leftovers[i]:
            return fail("forest", f"cycle {i}: leftover recomputation mismatch")
        ordered = _enumeration_order(list(assembly.paths), side, side[X[0]])
        forest_paths.append(ordered)
        virtual_by_cycle.append(set(assembly.virtual_pairs))
        pairs = [(ordered[0][0], X[0])]
        for j in range(len(ordered) - 1):
            pairs.append((ordered[j + 1][0], ordered[j][-1]))
        pairs.append((ordered[-1][-1], X[-1]))
        pairs.extend(assembly.virtual_pairs)
        stitch_pairs.append(pairs)

    # one global connection call through R1 (replicated per the discard rule);
    # direct-edge connectors are admissible because the discard set also
    # covers every matching edge, which is what a length-1 path could clash with
    blocked_edges = set(absorber_edges) | forbidden
    rep = max(1, cfg.connector_replication)
    flat_pairs = []
    owner = []  # (cycle, pair index within cycle, replica)
    for i in range(k):
        for p_idx, (u, v) in enumerate(stitch_pairs[i]):
            for r in range(rep):
                flat_pairs.append((u, v))
                owner.append((i, p_idx, r))
    try:
        sol = connect_pairs_disjoint(
            gexp,
            ConnectionRequest(
                pairs=tuple(flat_pairs),
                V=plan.r1,
                max_len=min(max_len, cfg.connector_max_len),
                min_len=1,
                forbidden_edges=tuple(sorted(blocked_edges)),
            ),
            exhaustive_cap=cfg.exhaustive_cap,
        )
    except ConnectionError as exc:
        return (f"connectors: {exc}", "connectors")

    # discard rule: a replica is discarded iff it shares an edge with any
    # absorber (or, for the length-1 paths we additionally allow, with any
    # matching already drawn)
    chosen = {}
    for flat_idx, (i, p_idx, r) in enumerate(owner):
        if (i, p_idx) in chosen:
            continue
        path = sol.paths[flat_idx]
        if not any(e in blocked_edges for e in path_edges(path)):
            chosen[(i, p_idx)] = path
    missing = [key for i in range(k) for key in
               ((i, p) for p in range(len(stitch_pairs[i]))) if key not in chosen]
    if missing:
        return (f"{len(missing)} connector pairs lost all {rep} replicas to "
                f"absorber/matching collisions", "connectors")

    # (H2): per-cycle reservoir usage must stay balanced and below half
    r1_used = []
    m1 = len(plan.r1) // 2
    for i in range(k):
        used = set()
        for p_idx in range(len(stitch_pairs[i])):
            used.update(chosen[(i, p_idx)][1:-1])
        a_cnt, b_cnt = _balanced_counts(side, used)
        if a_cnt != b_cnt:
            return (f"R1 usage of cycle {i} unbalanced ({a_cnt} vs {b_cnt})", "connectors")
        if len(used) > m1:
            return (f"cycle {i} used {len(used)} > m1 = {m1} reservoir vertices",
                    "connectors")
        r1_used.append(tuple(sorted(used)))
    certs.append({"stage": "connectors", "status": "ok",
                  "paths": len(chosen), "ripups": sol.ripups,
                  "r1_used": [len(u) for u in r1_used]})

    # P^i: x_1 .. x_{s+1} with internal set V^i + R1^i
    long_paths = []
    for i in range(k):
        connector_of = {}
        for p_idx, (u, v) in enumerate(stitch_pairs[i]):
            connector_of[(u, v)] = chosen[(i, p_idx)]

        def seg(u, v):
            path = connector_of.get((u, v)) or connector_of[(v, u)]
            return path if path[0] == u else tuple(reversed(path))

        chain = [X[0]]
        if not forest_paths[i]:
            chain.extend(seg(X[0], X[-1])[1:])
        else:
            first = forest_paths[i][0]
            chain.extend(seg(X[0], first[0])[1:])
            for f_idx, fpath in enumerate(forest_paths[i]):
                for a, b in zip(fpath, fpath[1:]):
                    if (a, b) in virtual_by_cycle[i]:
                        chain.extend(seg(a, b)[1:])
                    else:
                        chain.append(b)
                if f_idx + 1 < len(forest_paths[i]):
                    nxt = forest_paths[i][f_idx + 1]
                    chain.extend(seg(fpath[-1], nxt[0])[1:])
            chain.extend(seg(forest_paths[i][-1][-1], X[-1])[1:])
        try:
            validate_path(gexp, chain, name=f"P^{i}")
        except InvalidGraphError as exc:
            return fail("long-paths", f"cycle {i}: {exc}")
        expected_internal = set(v_cycle[i]) | set(r1_used[i])
        if set(chain[1:-1]) != expected_internal:
            return fail(
                "long-paths",
                f"cycle {i}: internal set differs from V^i + R1^i by "
                f"{sorted(set(chain[1:-1]) ^ expected_internal)[:8]}",
            )
        long_paths.append(tuple(chain))

    # K^i from the robust matching after removing this cycle's reservoir usage
    inverse = {real: abstract for abstract, real in vmap.items()}
    per_cycle_pairs = []
    for i in range(k):
        removed_a1 = [inverse[v] for v in r1_used[i] if side[v] == SIDE_A]
        removed_b1 = [inverse[v] for v in r1_used[i] if side[v] == SIDE_B]
        matched = rmbg.matching_after_removing(removed_a1, removed_b1)
        if matched is None:
            return fail("robust-matching",
                        f"(B) failed: no perfect matching after removing cycle {i}'s usage")
        per_cycle_pairs.append(tuple((vmap[u], vmap[v]) for u, v in matched))

    try:
        assignment, pstars = assign_and_absorb(
            grid, k, rng.spawn("unused"), per_cycle_pairs, sigmas=sigmas
        )
    except AbsorberError as exc:
        return fail("absorb", str(exc))

    # final cycles
    family_exp = []
    for i in range(k):
        pstar = pstars[i]
        if pstar[0] != X[0]:
            pstar = tuple(reversed(pstar))
        cyc = list(long_paths[i]) + list(reversed(pstar))[1:-1]
        family_exp.append(tuple(cyc))
    report = verify_cycles(gexp, family_exp, k)
    if not report.ok:
        return fail("verify", f"{report.clause}: {report.detail}")

    parent = plan.expander_parent
    family = tuple(tuple(parent[v] for v in c) for c in family_exp)
    final = verify_cycles(g, family, k)
    if not final.ok:
        return fail("verify", f"input-coordinate replay failed: {final.clause}")
    common = tuple(sorted(family[0]))
    certs.append({"stage": "verify", "status": "ok",
                  "cycle_length": len(common), "k": k})
    provenance = {
        "expander_parent": list(parent),
        "sigmas": [list(sg) for sg in sigmas],
        "per_cycle": [
            {
                "r1_used": list(r1_used[i]),
                "absorbed_pairs": [list(p) for p in per_cycle_pairs[i]],
                "matchings": [[list(e) for e in mj] for mj in matchings_per_cycle[i]],
                "long_path": list(long_paths[i]),
                "absorbing_path": list(pstars[i]),
            }
            for i in range(k)
        ],
        "X": list(X),
        "W_size": len(W),
    }
    fam = CycleFamily(family, common, k, provenance)
    return PipelineResult(fam, None, certs)


def bundled_scenario():
    """The frozen desk-mode end-to-end scenario (graph spec, config)."""
    return {
        "graph": {"kind": "crown", "side": 1000, "seed": 20250809, "removed_matchings": 1},
        "config": PipelineConfig(
            k=2,
            mode="desk",
            seed=31,
            rmbg_m=3,
            rmbg_matchings=4,
            m3=40,
            m4=280,
            m5=150,
            t_layers="max",
            connector_replication=1,
        ),
    }
