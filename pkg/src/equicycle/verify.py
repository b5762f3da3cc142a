"""Absolute verifier for families of edge-disjoint cycles on one vertex set.

Deliberately independent of every producing stage: only graph-core replay
is used, no parameters, no tolerance. Both the pipeline and the
brute-force oracle funnel their outputs through this check.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import Graph, cycle_edges, validate_cycle
from .errors import InvalidGraphError


@dataclass(frozen=True)
class CycleFamilyReport:
    ok: bool
    clause: str  # "" when ok
    detail: str = ""


def verify_cycles(g: Graph, cycles, k: int) -> CycleFamilyReport:
    """Check: exactly k cycles, each valid in g, all on one vertex set,
    pairwise edge-disjoint. Returns the first violated clause."""
    cycles = [tuple(c) for c in cycles]
    if len(cycles) != k:
        return CycleFamilyReport(False, "count", f"{len(cycles)} cycles, expected {k}")
    for i, c in enumerate(cycles):
        try:
            validate_cycle(g, c, name=f"cycle {i}")
        except InvalidGraphError as exc:
            return CycleFamilyReport(False, "validity", str(exc))
    base = set(cycles[0])
    for i, c in enumerate(cycles[1:], start=1):
        if set(c) != base:
            return CycleFamilyReport(
                False,
                "vertex-set",
                f"cycle {i} differs from cycle 0 by "
                f"{sorted(set(c) ^ base)[:8]}",
            )
    edge_sets = [frozenset(cycle_edges(c)) for c in cycles]
    for i in range(len(cycles)):
        for j in range(i + 1, len(cycles)):
            shared = edge_sets[i] & edge_sets[j]
            if shared:
                return CycleFamilyReport(
                    False, "edge-disjoint", f"cycles {i},{j} share {sorted(shared)[:4]}"
                )
    return CycleFamilyReport(True, "")
