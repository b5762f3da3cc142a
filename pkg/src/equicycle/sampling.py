"""Seeded vertex sampling: p-random sets, fixed-size sets, balanced draws.

Balanced modes follow the flooring rule: requested balanced sizes are
floored per side and any leftover vertex is excluded, never silently
added, so "balanced" stays literally true for every returned set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import SamplingError
from .graph import SIDE_A, SIDE_B
from .rng import SeededRng


@dataclass(frozen=True)
class PRandom:
    p: float


@dataclass(frozen=True)
class UniformOfSize:
    k: int


@dataclass(frozen=True)
class BalancedSubset:
    k: int  # total size, split evenly between the sides


@dataclass(frozen=True)
class BalancedPartition:
    t: int


@dataclass(frozen=True)
class PartitionResult:
    parts: tuple[tuple[int, ...], ...]
    excluded: tuple[int, ...]


def _split_sides(universe, sides):
    if sides is None:
        raise SamplingError("balanced sampling needs a side labelling")
    a = [v for v in universe if sides[v] == SIDE_A]
    b = [v for v in universe if sides[v] == SIDE_B]
    return a, b


def sample(universe: Sequence[int], spec, rng: SeededRng, sides: Optional[Sequence[int]] = None):
    """Draw from ``universe`` according to ``spec`` using the given stream.

    Returns a sorted vertex tuple, or a :class:`PartitionResult` for
    :class:`BalancedPartition`. Identical (seed, label, spec) always gives
    identical output.
    """
    universe = sorted(set(universe))

    if isinstance(spec, PRandom):
        if not 0.0 <= spec.p <= 1.0:
            raise SamplingError(f"probability {spec.p} outside [0,1]")
        keep = rng.mask(len(universe), spec.p)
        return tuple(v for v, k in zip(universe, keep) if k)

    if isinstance(spec, UniformOfSize):
        if not 0 <= spec.k <= len(universe):
            raise SamplingError(f"cannot draw {spec.k} of {len(universe)} vertices")
        return rng.subset(universe, spec.k)

    if isinstance(spec, BalancedSubset):
        if spec.k % 2 != 0:
            raise SamplingError(f"balanced subset size {spec.k} is odd")
        half = spec.k // 2
        a, b = _split_sides(universe, sides)
        if half > len(a) or half > len(b):
            raise SamplingError(
                f"side exhausted: need {half} per side, have {len(a)} and {len(b)}"
            )
        return tuple(sorted(rng.subset(a, half) + rng.subset(b, half)))

    if isinstance(spec, BalancedPartition):
        if spec.t < 1:
            raise SamplingError("partition needs at least one part")
        a, b = _split_sides(universe, sides)
        per_side = min(len(a), len(b)) // spec.t
        a_perm = rng.shuffled(a)
        b_perm = rng.shuffled(b)
        parts = []
        for i in range(spec.t):
            chunk = (
                a_perm[i * per_side : (i + 1) * per_side]
                + b_perm[i * per_side : (i + 1) * per_side]
            )
            parts.append(tuple(sorted(chunk)))
        used = set()
        for p in parts:
            used.update(p)
        excluded = tuple(v for v in universe if v not in used)
        return PartitionResult(tuple(parts), excluded)

    raise SamplingError(f"unknown sampling spec {spec!r}")
