"""Maximum bipartite matching (Hopcroft-Karp) with Hall-violator extraction.

Works on an explicit left-adjacency mapping so callers can match clones,
grid cells or filtered vertex sets without building Graph objects. Left
keys are processed in sorted order, which keeps results deterministic.
"""

from __future__ import annotations

from collections import deque

INF = float("inf")


def max_bipartite_matching(adj: dict) -> dict:
    """Maximum matching for ``{left: iterable_of_right}``; returns left->right."""
    lefts = sorted(adj)
    neigh = {u: sorted(set(adj[u])) for u in lefts}
    match_l: dict = {}
    match_r: dict = {}

    def bfs():
        dist = {}
        q = deque()
        for u in lefts:
            if u not in match_l:
                dist[u] = 0
                q.append(u)
        found = False
        while q:
            u = q.popleft()
            for w in neigh[u]:
                nxt = match_r.get(w)
                if nxt is None:
                    found = True
                elif nxt not in dist:
                    dist[nxt] = dist[u] + 1
                    q.append(nxt)
        return dist, found

    def dfs(u, dist):
        for w in neigh[u]:
            nxt = match_r.get(w)
            if nxt is None or (dist.get(nxt) == dist[u] + 1 and dfs(nxt, dist)):
                match_l[u] = w
                match_r[w] = u
                return True
        dist[u] = INF
        return False

    while True:
        dist, found = bfs()
        if not found:
            break
        for u in lefts:
            if u not in match_l:
                dfs(u, dist)
    return match_l


def hall_violator(adj: dict, matching: dict):
    """Deficient left set when the matching misses some left vertex.

    Alternating-reachability from any unmatched left vertex yields a set S
    with |N(S)| < |S| (Koenig). Returns (S, N(S)) or None when the matching
    saturates the left side.
    """
    unmatched = [u for u in sorted(adj) if u not in matching]
    if not unmatched:
        return None
    match_r = {w: u for u, w in matching.items()}
    seen_l = set(unmatched)
    seen_r = set()
    queue = deque(unmatched)
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w in seen_r:
                continue
            seen_r.add(w)
            owner = match_r.get(w)
            if owner is not None and owner not in seen_l:
                seen_l.add(owner)
                queue.append(owner)
    return tuple(sorted(seen_l)), tuple(sorted(seen_r))


def perfect_matching_exists(adj: dict, right_size: int) -> bool:
    """True when both sides are saturated (requires |left| == right_size)."""
    if len(adj) != right_size:
        return False
    return len(max_bipartite_matching(adj)) == len(adj)
