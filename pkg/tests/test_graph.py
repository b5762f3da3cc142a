import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equicycle.errors import GraphFormatError, InvalidGraphError
from equicycle.generators import (
    complete_bipartite,
    complete_graph,
    cycle_graph,
    k44,
    path_graph,
    star_graph,
)
from equicycle.graph import (
    BipartiteGraph,
    Graph,
    check_path_parity,
    degree_stats,
    graph_to_text,
    parse_graph,
    restrict,
)


def test_load_triangle():
    g = parse_graph("3 3\n0 1\n1 2\n0 2")
    assert g.n == 3 and g.edges == ((0, 1), (0, 2), (1, 2))


def test_load_k44_bipartite():
    lines = ["8 16", "bipartite 0 0 0 0 1 1 1 1"]
    lines += [f"{u} {v}" for u in range(4) for v in range(4, 8)]
    g = parse_graph("\n".join(lines))
    assert isinstance(g, BipartiteGraph)
    assert g == k44()


def test_self_loop_rejected_with_line_number():
    with pytest.raises(GraphFormatError) as exc:
        parse_graph("2 1\n0 0")
    assert exc.value.line == 2


@pytest.mark.parametrize(
    "text,line",
    [
        ("2 1\n0 5", 2),  # out of range
        ("3 2\n0 1\n0 1", 3),  # duplicate
        ("2 x\n0 1", 1),  # bad header
        ("4 1\nbipartite 0 0 1 1\n0 1", 3),  # edge within side A
        ("3 2\n0 1", 3),  # truncated edge list
    ],
)
def test_format_errors_carry_line(text, line):
    with pytest.raises(GraphFormatError) as exc:
        parse_graph(text)
    assert exc.value.line == line


def test_roundtrip_is_identity_on_canonical_form():
    g = k44()
    assert parse_graph(graph_to_text(g)) == g
    g2 = complete_graph(5)
    assert parse_graph(graph_to_text(g2)) == g2


def test_restrict_triangle_drop_edge():
    g = complete_graph(3)
    sub = restrict(g, [0, 1, 2], [(0, 1)])
    # path 0-2-1 survives
    assert sub.graph.m == 2
    assert sub.graph.degree(2) == 2


def test_restrict_one_side_of_k44_is_empty():
    g = k44()
    sub = restrict(g, [0, 1, 2, 3])
    assert sub.graph.n == 4 and sub.graph.m == 0
    assert isinstance(sub.graph, BipartiteGraph)


def test_restrict_c6_prefix_is_path():
    g = cycle_graph(6)
    sub = restrict(g, [0, 1, 2, 3])
    assert sub.graph.edges == ((0, 1), (1, 2), (2, 3))


def test_restrict_idempotent_and_edge_partition():
    g = complete_graph(6)
    keep = [0, 2, 3, 5]
    s1 = restrict(g, keep)
    s2 = restrict(s1.graph, range(s1.graph.n))
    assert s1.graph == s2.graph
    inside = s1.graph.m
    outside = restrict(g, [1, 4]).graph.m
    crossing = g.m - inside - outside
    assert inside + crossing + outside == g.m


def test_degree_stats_regular_and_star():
    s = degree_stats(k44())
    assert (s.minimum, s.maximum, s.average, s.ratio) == (4, 4, 4.0, 1.0)
    s = degree_stats(star_graph(3))
    assert (s.minimum, s.maximum, s.average) == (1, 3, 1.5)
    iso = degree_stats(Graph(2, []))
    assert iso.ratio == float("inf")


def test_degree_stats_c5_plus_chord():
    g = Graph(5, list(cycle_graph(5).edges) + [(0, 2)])
    s = degree_stats(g)
    # counted by hand: two vertices gain the chord
    assert (s.minimum, s.maximum, s.average) == (2, 3, 2.4)
    assert s.histogram == {2: 3, 3: 2}


def test_degree_stats_empty_graph_rejected():
    with pytest.raises(InvalidGraphError):
        degree_stats(Graph(0, []))


def test_parity_cases():
    bg = complete_bipartite(3, 3)
    # opposite-side endpoints: balanced internals
    rep = check_path_parity(bg, (0, 3, 1, 4))
    assert rep.case == "balanced" and rep.consistent
    # same-side A endpoints: one extra B internal
    rep = check_path_parity(bg, (0, 3, 1))
    assert rep.case == "extra_b" and rep.consistent
    rep = check_path_parity(bg, (3, 0, 4))
    assert rep.case == "extra_a" and rep.consistent


def test_parity_rejects_invalid_path():
    bg = complete_bipartite(2, 2)
    with pytest.raises(InvalidGraphError):
        check_path_parity(bg, (0, 1))  # A-A is not an edge


@given(st.integers(3, 9), st.integers(0, 2**30))
@settings(max_examples=40, deadline=None)
def test_parity_trichotomy_on_random_paths(n, seed):
    # every valid bipartite path lands in exactly one (O) case, the one its
    # endpoint sides predict
    from equicycle.rng import SeededRng

    bg = complete_bipartite(n, n)
    rng = SeededRng(seed, "paths")
    length = rng.integer(1, 2 * n - 1)
    a_side = list(range(n))
    b_side = list(range(n, 2 * n))
    start_a = rng.bernoulli(0.5)
    path = []
    used = set()
    side = start_a
    for _ in range(length + 1):
        pool = [v for v in (a_side if side else b_side) if v not in used]
        if not pool:
            return
        v = pool[rng.integer(0, len(pool))]
        path.append(v)
        used.add(v)
        side = not side
    rep = check_path_parity(bg, tuple(path))
    assert rep.consistent


def test_serialisation_sorts_edges():
    g = Graph(4, [(3, 2), (1, 0)])
    assert graph_to_text(g) == "4 2\n0 1\n2 3\n"
