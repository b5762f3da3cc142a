import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_expander_verdict, brute_min_neighbourhood, random_graph_for_tests
from equicycle.errors import ExpanderModeError, InvalidGraphError
from equicycle.expander import (
    ExpanderParams,
    check_expander,
    check_reachable,
    decompose_into_expanders,
    extract_expander,
    find_well_expanding_subset,
    almost_regular_subgraph,
    log2n,
    min_neighbourhood_under_deletion,
    reach_ball,
    replay_witness,
)
from equicycle.generators import (
    complete_graph,
    crown_bipartite,
    cycle_graph,
    disjoint_union,
    k44,
    near_regular_bipartite,
    path_graph,
    star_graph,
)
from equicycle.graph import Graph, degree_stats
from equicycle.rng import SeededRng


def test_min_neigh_star_center():
    g = star_graph(3)
    size, fstar = min_neighbourhood_under_deletion(g, [0], 2)
    assert size == 1 and len(fstar) == 2


def test_min_neigh_k44_single_vertex():
    size, _ = min_neighbourhood_under_deletion(k44(), [0], 3)
    assert size == 1  # each neighbour costs exactly one edge


@given(st.integers(0, 500))
@settings(max_examples=60, deadline=None)
def test_min_neigh_matches_exhaustive(seed):
    rng = SeededRng(seed, "minneigh")
    n = rng.integer(4, 11)
    m = rng.integer(3, min(14, n * (n - 1) // 2) + 1)
    g = random_graph_for_tests(n, m, seed)
    size_u = rng.integer(1, n)
    U = rng.subset(range(n), size_u)
    budget = rng.integer(0, 5)
    got, fstar = min_neighbourhood_under_deletion(g, U, budget)
    assert len(fstar) <= budget or got == 0
    assert got == brute_min_neighbourhood(g, U, budget)


def test_two_triangles_refuted_by_component():
    g = disjoint_union(complete_graph(3), complete_graph(3))
    v = check_expander(g, ExpanderParams(0.5, 0.0), "exact")
    assert not v.is_expander
    assert replay_witness(g, ExpanderParams(0.5, 0.0), v.witness)


def test_k3_verdict_frozen():
    # computed with the exhaustive oracle: deleting both edges at the
    # third vertex of any pair beats the threshold, so K3 is refuted
    g = complete_graph(3)
    params = ExpanderParams(0.99, 1.0)
    v = check_expander(g, params, "exact")
    ok, witness_u = brute_expander_verdict(g, 0.99, 1.0, log2n)
    assert v.is_expander == ok == False
    assert v.witness.U == witness_u == (0, 1)


def test_k44_verdict_frozen():
    v = check_expander(k44(), ExpanderParams(2**-5, 1.0), "exact")
    assert v.is_expander and v.method == "exact" and v.sound


def test_exact_gate():
    with pytest.raises(ExpanderModeError):
        check_expander(complete_graph(20), ExpanderParams(0.5, 1.0), "exact")


def test_heuristic_witness_is_sound():
    g = disjoint_union(complete_graph(4), complete_graph(4))
    v = check_expander(g, ExpanderParams(0.5, 0.0), "heuristic", rng=SeededRng(0, "h"))
    assert not v.is_expander and v.sound
    assert replay_witness(g, ExpanderParams(0.5, 0.0), v.witness)


def test_almost_regular_on_regular_graph_is_whole_graph():
    g = k44()
    sub = almost_regular_subgraph(g)
    assert sub.graph.n == 8 and sub.graph.m == 16


def test_almost_regular_star_falls_back_to_edge():
    g = star_graph(99)
    sub = almost_regular_subgraph(g)
    stats = degree_stats(sub.graph)
    assert stats.ratio <= 6
    # desk check of the density clause: a single edge beats d/(100 log n)
    bound = g.average_degree() / (100 * math.log2(g.n))
    assert sub.graph.average_degree() >= bound


@given(st.integers(0, 300))
@settings(max_examples=40, deadline=None)
def test_almost_regular_postcondition(seed):
    rng = SeededRng(seed, "ar")
    n = rng.integer(5, 30)
    m = rng.integer(4, min(60, n * (n - 1) // 2) + 1)
    g = random_graph_for_tests(n, m, seed + 1)
    if g.m == 0:
        return
    sub = almost_regular_subgraph(g)
    assert degree_stats(sub.graph).ratio <= 6


def test_extract_fast_path_returns_input_unchanged():
    g = near_regular_bipartite(20, 6, SeededRng(3, "g"))
    out, s, trace = extract_expander(g, 0.03125, rng=SeededRng(4, "x"))
    assert trace.fast_path and not trace.steps
    assert out == g
    assert s >= out.average_degree() / log2n(out.n) ** 2 - 1e-12


def test_extract_trace_invariants_on_blocks_fixture():
    # two dense blocks joined by one edge force the shrink loop
    a = k44()
    b = k44()
    edges = list(a.edges) + [(u + 8, v + 8) for u, v in b.edges] + [(0, 12)]
    g = Graph(16, edges)
    out, s, trace = extract_expander(g, 0.05, rng=SeededRng(9, "x"))
    stats = degree_stats(out)
    assert stats.ratio <= 18
    for step in trace.steps:
        lam = 3.0 / log2n(step.n_before) ** 2
        if step.stage == "drop-low-degree":
            assert step.d_after >= step.d_before - 1e-9
        if step.stage == "shrink-to-Y":
            assert step.n_after < 0.75 * step.n_before
            assert step.d_after >= (1 - lam) * step.d_before - 1e-9
        if step.stage == "shrink-to-X":
            assert step.d_after >= step.d_before - 1e-9
    # small outputs carry an exact certificate
    if out.n <= 18:
        assert trace.verdict.method == "exact"


def test_decompose_partitions_edges():
    g = k44()
    rng = SeededRng(5, "d")
    parts, _ = decompose_into_expanders(g, 3, ExpanderParams(0.5, 1.0), rng)
    assert sum(p.m for p in parts) == g.m
    union = set()
    for p in parts:
        assert not (union & set(p.edges))
        union |= set(p.edges)
    assert union == set(g.edges)
    single, _ = decompose_into_expanders(g, 1, ExpanderParams(0.5, 1.0), rng)
    assert single[0].edges == g.edges


def test_decompose_verify_records_verdicts():
    g = crown_bipartite(9, SeededRng(1, "c"))  # n = 18, exact gate
    parts, verdicts = decompose_into_expanders(
        g, 2, ExpanderParams(0.5, 1.0), SeededRng(2, "d"), verify=True
    )
    assert len(verdicts) == 2 and all(v is not None for v in verdicts)


def test_reach_ball_basics():
    g = cycle_graph(6)
    assert reach_ball(g, [0], range(6), 2) == (0, 1, 2, 4, 5)
    assert reach_ball(g, [0], [], 3) == ()
    p = path_graph(4)
    assert reach_ball(p, [0], [2, 3], 3) == ()  # vertex 1 outside V blocks


@given(st.integers(0, 200))
@settings(max_examples=40, deadline=None)
def test_reach_ball_monotone(seed):
    rng = SeededRng(seed, "ball")
    n = rng.integer(4, 12)
    g = random_graph_for_tests(n, rng.integer(3, 2 * n), seed)
    U = rng.subset(range(n), rng.integer(1, 3))
    V = rng.subset(range(n), rng.integer(1, n))
    r = rng.integer(0, 4)
    small = set(reach_ball(g, U, V, r))
    big = set(reach_ball(g, U, V, r + 1))
    assert small <= big
    if g.m:
        blocked = (g.edges[0],)
        assert set(reach_ball(g, U, V, r, blocked)) <= small


def test_check_reachable_connected_whole_graph():
    g = complete_graph(6)
    v = check_reachable(g, range(6), 0.0, "exact", n_exact=18)
    assert v.reachable


def test_check_reachable_disconnected_witness():
    g = disjoint_union(complete_graph(3), complete_graph(5))
    # V split so neither component holds more than half
    v = check_reachable(g, [0, 1, 3, 4], 0.0, "exact", n_exact=18)
    assert not v.reachable and v.witness is not None


@given(st.integers(0, 60))
@settings(max_examples=12, deadline=None)
def test_check_reachable_matches_bruteforce(seed):
    import itertools

    rng = SeededRng(seed, "reach")
    n = rng.integer(4, 7)
    g = random_graph_for_tests(n, rng.integer(3, 10), seed)
    V = rng.subset(range(n), rng.integer(1, n + 1))
    lam = 0.5
    got = check_reachable(g, V, lam, "exact", n_exact=10)
    radius = min(n, math.ceil(log2n(n) ** 4))
    expect = True
    for size in range(1, n + 1):
        for U in itertools.combinations(range(n), size):
            budget = math.floor(lam * size)
            for fsz in range(0, budget + 1):
                for F in itertools.combinations(g.edges, fsz):
                    if len(reach_ball(g, U, V, radius, F)) <= len(V) / 2:
                        expect = False
    assert got.reachable == expect


def test_well_expanding_star_center():
    g = star_graph(5)
    assert find_well_expanding_subset(g, [0], 3.0) == (0,)
    iso = Graph(3, [])
    assert find_well_expanding_subset(iso, [0, 1], 1.0) == ()


@given(st.integers(0, 200))
@settings(max_examples=40, deadline=None)
def test_well_expanding_postcondition(seed):
    rng = SeededRng(seed, "wx")
    n = rng.integer(4, 14)
    g = random_graph_for_tests(n, rng.integer(3, 2 * n), seed)
    U = rng.subset(range(n), rng.integer(1, n))
    lam = 1 + rng.random() * 2
    out = find_well_expanding_subset(g, U, lam)
    if out:
        nbhd = set()
        for v in out:
            nbhd.update(w for w in g.neighbors(v) if w not in set(out))
        assert len(nbhd) >= lam * len(out)
