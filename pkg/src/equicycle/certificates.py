"""Deterministic JSON artifacts.

Every command writes its verdicts, traces, plans and families through
this module: keys sorted, no timestamps, newline-terminated, so identical
runs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_fallback) + "\n"


def _fallback(obj):
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_json(path, payload) -> str:
    """Write canonical JSON; returns the content hash for logging."""
    text = canonical_json(payload)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def load_vertex_set(path) -> tuple:
    """Whitespace-separated vertex ids, any line structure."""
    text = Path(path).read_text(encoding="utf-8")
    return tuple(sorted({int(tok) for tok in text.split()}))


def load_pairs(path) -> tuple:
    """One 'u v' pair per line; blank lines and #-comments skipped."""
    pairs = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        u, v = line.split()
        pairs.append((int(u), int(v)))
    return tuple(pairs)
