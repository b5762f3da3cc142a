"""Degree flattening: the one-step process and its iteration.

Given a graph whose degrees sit in [d, (1+gamma)d], one step deletes
edges within the high-degree class with probability 2e-e^2, edges between
the classes with probability e, and low-degree vertices with probability
e. High degrees then shrink faster than low ones, so the spread ratio
contracts by (1-e/2) per accepted step while the floor only drops by
(1-5e/4). A step is accepted exactly when every surviving degree lands in
[d', (1-e/2)(1+gamma)d'] with d' = (1-5e/4)d; rejected draws are retried
on fresh streams.

The loop runs until the spread reaches 1+10e (below that the one-step
hypothesis gamma >= 10e fails) or a step cap. All bulk randomness is
vectorised; graphs are converted to edge arrays once per run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import RegularisationError
from .graph import Graph, Subgraph
from .rng import SeededRng


@dataclass(frozen=True)
class RegularisationConfig:
    lam: float  # declared input ratio bound: degrees within [d, lam*d]
    epsilon_floor: Optional[float] = None  # per-step epsilon; None -> paper formula
    max_steps: int = 100
    mode: str = "desk"  # "desk" | "paper"
    d_floor: Optional[float] = None  # nominal degree floor; None -> min degree
    C: float = 100.0  # paper-mode constant of the iterated lemma
    step_retries: int = 20

    def __post_init__(self):
        if self.lam < 1:
            raise RegularisationError("lambda must be at least 1")
        if self.epsilon_floor is not None and not 0 <= self.epsilon_floor <= 0.01:
            raise RegularisationError("per-step epsilon must lie in [0, 1/100]")
        if self.mode not in ("desk", "paper"):
            raise RegularisationError(f"unknown mode {self.mode!r}")


def classify_degrees(g: Graph, d: float, gamma: float):
    """Split V(g) into U_L = {deg <= (1+gamma/2)d} and U_H = rest.

    Raises when any degree falls outside the declared [d, (1+gamma)d]
    window. The threshold itself belongs to U_L.
    """
    threshold = (1 + gamma / 2) * d
    upper = (1 + gamma) * d
    u_low, u_high = [], []
    for v in range(g.n):
        deg = g.degree(v)
        if deg < d - 1e-9 or deg > upper + 1e-9:
            raise RegularisationError(
                f"vertex {v} has degree {deg} outside [{d}, {upper}]"
            )
        (u_low if deg <= threshold else u_high).append(v)
    return tuple(u_low), tuple(u_high)


def _attempt(edges: np.ndarray, alive: np.ndarray, d, gamma, epsilon, rng: SeededRng):
    """One randomised deletion round on edge/vertex arrays (original ids)."""
    n = alive.shape[0]
    deg = np.bincount(edges.ravel(), minlength=n) if edges.size else np.zeros(n, dtype=np.int64)
    high = alive & (deg > (1 + gamma / 2) * d + 1e-9)
    low = alive & ~high

    if edges.size:
        hu = high[edges[:, 0]]
        hv = high[edges[:, 1]]
        both_high = hu & hv
        one_high = hu ^ hv
        r = rng.uniforms(edges.shape[0])
        p_hh = 2 * epsilon - epsilon * epsilon
        killed_edge = (both_high & (r < p_hh)) | (one_high & (r < epsilon))
    else:
        killed_edge = np.zeros(0, dtype=bool)

    killed_vertex = low & (rng.uniforms(n) < epsilon)
    new_alive = alive & ~killed_vertex
    if edges.size:
        keep = ~killed_edge & new_alive[edges[:, 0]] & new_alive[edges[:, 1]]
        new_edges = edges[keep]
    else:
        new_edges = edges

    new_deg = (
        np.bincount(new_edges.ravel(), minlength=n) if new_edges.size else np.zeros(n, dtype=np.int64)
    )
    d_next = (1 - 1.25 * epsilon) * d
    upper = (1 - epsilon / 2) * (1 + gamma) * d_next
    degs = new_deg[new_alive]
    accepted = (
        degs.size > 0 and float(degs.min()) >= d_next - 1e-9 and float(degs.max()) <= upper + 1e-9
    )
    detail = {
        "u_low": int(low.sum()),
        "u_high": int(high.sum()),
        "edges_deleted": int(killed_edge.sum()) if edges.size else 0,
        "vertices_deleted": int(killed_vertex.sum()),
        "window": [d_next, upper],
        "min_degree": float(degs.min()) if degs.size else 0.0,
        "max_degree": float(degs.max()) if degs.size else 0.0,
    }
    return new_edges, new_alive, accepted, d_next, detail


@dataclass(frozen=True)
class StepResult:
    subgraph: Subgraph
    accepted: bool
    new_d: float
    attempts: int
    detail: dict


def regularize_step(
    g: Graph,
    d: float,
    gamma: float,
    epsilon: float,
    rng: SeededRng,
    retries: int = 20,
    raise_on_reject: bool = True,
) -> StepResult:
    """One accepted flattening step (retrying rejected draws on fresh streams)."""
    if epsilon > 0.01 + 1e-12 or epsilon < 0:
        raise RegularisationError("epsilon must lie in [0, 1/100]")
    classify_degrees(g, d, gamma)  # validates the declared window
    edges = np.array(g.edges, dtype=np.int64).reshape(-1, 2)
    alive = np.ones(g.n, dtype=bool)
    last = None
    for attempt in range(max(1, retries)):
        stream = rng.spawn(f"attempt-{attempt}")
        new_edges, new_alive, accepted, d_next, detail = _attempt(
            edges, alive, d, gamma, epsilon, stream
        )
        last = (new_edges, new_alive, accepted, d_next, detail)
        if accepted:
            break
    new_edges, new_alive, accepted, d_next, detail = last
    if not accepted and raise_on_reject:
        raise RegularisationError(
            f"step rejected on all {retries} draws (window {detail['window']}, "
            f"achieved [{detail['min_degree']}, {detail['max_degree']}])"
        )
    kept = [v for v in range(g.n) if new_alive[v]]
    index = {v: i for i, v in enumerate(kept)}
    edge_list = [(index[int(u)], index[int(v)]) for u, v in new_edges.tolist()]
    if hasattr(g, "side"):
        h = type(g)(len(kept), edge_list, tuple(g.side[v] for v in kept))
    else:
        h = Graph(len(kept), edge_list)
    return StepResult(Subgraph(h, tuple(kept)), accepted, d_next, attempt + 1, detail)


@dataclass
class RegularisationResult:
    subgraph: Subgraph  # final graph plus map to original vertex ids
    d_prime: float
    survivors: tuple[int, ...]  # tracked vertices still present, original ids
    log: list = field(default_factory=list)
    vacuous: bool = False
    executed_steps: int = 0
    final_spread: float = 0.0


def regularize(
    g: Graph,
    cfg: RegularisationConfig,
    tracked,
    rng: SeededRng,
) -> RegularisationResult:
    """Iterate flattening steps until the spread reaches 1+10e or the cap.

    Paper mode uses the source epsilon 1e4 * lam^5 * log(n) / d, asserts the
    final floor d' >= d/C and spread <= 1e5 * lam^5 * log n, and returns the
    input unchanged (flagged vacuous) when d < C log n. Desk mode uses the
    configured epsilon and records everything without asserting asymptotics.
    """
    if g.n == 0:
        raise RegularisationError("empty graph")
    degs = g.degrees()
    d = float(cfg.d_floor) if cfg.d_floor is not None else float(min(degs))
    lam = cfg.lam
    if min(degs) < d - 1e-9 or max(degs) > lam * d + 1e-9:
        raise RegularisationError(
            f"degrees [{min(degs)}, {max(degs)}] not within declared [d, lam*d] = "
            f"[{d}, {lam * d}]"
        )
    logn = max(1.0, math.log2(g.n))

    if cfg.mode == "paper":
        epsilon = 1e4 * lam**5 * logn / d
        if d < cfg.C * logn or epsilon > 0.01:
            return RegularisationResult(
                subgraph=Subgraph(g, tuple(range(g.n))),
                d_prime=d,
                survivors=tuple(sorted(set(tracked))),
                log=[{"event": "vacuous-regime", "d": d, "epsilon": epsilon}],
                vacuous=True,
            )
    else:
        epsilon = cfg.epsilon_floor if cfg.epsilon_floor is not None else 0.01

    edges = np.array(g.edges, dtype=np.int64).reshape(-1, 2)
    alive = np.ones(g.n, dtype=bool)
    gamma = lam - 1.0
    log: list = []
    steps = 0
    while gamma > 10 * epsilon + 1e-12 and steps < cfg.max_steps and epsilon > 0:
        accepted = False
        detail = None
        for attempt in range(cfg.step_retries):
            stream = rng.spawn(f"step-{steps}-try-{attempt}")
            new_edges, new_alive, accepted, d_next, detail = _attempt(
                edges, alive, d, gamma, epsilon, stream
            )
            if accepted:
                break
        if not accepted:
            raise RegularisationError(
                f"step {steps} rejected on all {cfg.step_retries} draws", log
            )
        edges, alive = new_edges, new_alive
        d = d_next
        gamma = (1 - epsilon / 2) * (1 + gamma) - 1
        steps += 1
        entry = {"step": steps, "epsilon": epsilon, "attempts": attempt + 1}
        entry.update(detail)
        entry["gamma_after"] = gamma
        log.append(entry)

    kept = [v for v in range(g.n) if alive[v]]
    index = {v: i for i, v in enumerate(kept)}
    edge_list = [(index[int(u)], index[int(v)]) for u, v in edges.tolist()]
    if hasattr(g, "side"):
        h = type(g)(len(kept), edge_list, tuple(g.side[v] for v in kept))
    else:
        h = Graph(len(kept), edge_list)
    final_degs = h.degrees() or [0]
    spread = max(final_degs) - min(final_degs)

    if cfg.mode == "paper":
        if d < float(cfg.d_floor or min(g.degrees())) / cfg.C - 1e-9:
            raise RegularisationError(f"paper-mode floor assertion failed: d'={d}", log)
        if spread > 1e5 * lam**5 * logn:
            raise RegularisationError(
                f"paper-mode spread assertion failed: {spread}", log
            )

    tracked_set = set(tracked)
    survivors = tuple(v for v in kept if v in tracked_set)
    return RegularisationResult(
        subgraph=Subgraph(h, tuple(kept)),
        d_prime=d,
        survivors=survivors,
        log=log,
        vacuous=False,
        executed_steps=steps,
        final_spread=float(spread),
    )
