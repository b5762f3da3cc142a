import numpy as np
import pytest

from conftest import lambda18_synthetic, spread_bipartite
from equicycle.errors import RegularisationError
from equicycle.generators import complete_bipartite, k44
from equicycle.graph import BipartiteGraph, Graph
from equicycle.regularize import (
    RegularisationConfig,
    classify_degrees,
    regularize,
    regularize_step,
)
from equicycle.rng import SeededRng


def _k66_with_two_heavy():
    # all degrees 5 except two vertices of degree 6
    base = complete_bipartite(6, 6)
    removed = {(i, 6 + i) for i in range(6)}
    edges = [e for e in base.edges if e not in removed] + [(0, 6)]
    return BipartiteGraph(12, edges, base.side)


def test_classify_regular_graph_has_no_high_class():
    low, high = classify_degrees(k44(), 4.0, 0.5)
    assert high == () and len(low) == 8


def test_classify_threshold_vertex_goes_low():
    g = _k66_with_two_heavy()
    # threshold (1+gamma/2)d = 5 exactly; the ten degree-5 vertices sit on it
    low, high = classify_degrees(g, 4.0, 0.5)
    assert set(high) == {0, 6}
    assert len(low) == 10


def test_classify_rejects_out_of_window_degree():
    with pytest.raises(RegularisationError):
        classify_degrees(k44(), 5.0, 0.5)  # degree 4 below the floor
    with pytest.raises(RegularisationError):
        classify_degrees(k44(), 3.0, 0.2)  # degree 4 above (1+gamma)d = 3.6


def test_step_epsilon_zero_is_identity():
    g = _k66_with_two_heavy()
    res = regularize_step(g, 4.0, 0.5, 0.0, SeededRng(1, "s"))
    assert res.accepted and res.new_d == 4.0
    assert res.subgraph.graph == g


def test_step_regular_input_only_vertex_deletions():
    # 50-regular input declared inside [46, 1.2*46]: the high class is
    # empty, so cases (i) and (ii) are vacuous and the only randomness is
    # vertex deletion; survivors keep every edge to surviving neighbours
    g = complete_bipartite(50, 50)
    res = regularize_step(g, 46.0, 0.2, 0.01, SeededRng(2, "s"), retries=50)
    assert res.accepted
    assert res.detail["u_high"] == 0
    h = res.subgraph.graph
    survivors = set(res.subgraph.parent)
    expect = [(u, v) for u, v in g.edges if u in survivors and v in survivors]
    assert h.m == len(expect)
    assert res.detail["vertices_deleted"] + h.n == g.n


def test_step_conditional_survival_rates():
    # Monte-Carlo check of the two per-class edge-survival rates: a
    # low-class vertex keeps an incident edge with probability 1-e, a
    # high-class vertex with (1-e)^2. 200 seeded draws, 3 standard errors.
    side = 1000
    g = spread_bipartite(side, 210, 500, 25, boost_from=400)
    degs = g.degrees()
    d, top = min(degs), max(degs)
    gamma = 0.2
    assert top <= (1 + gamma) * d
    eps = 0.01
    threshold = (1 + gamma / 2) * d
    low = [v for v in range(g.n) if g.degree(v) <= threshold]
    high = [v for v in range(g.n) if g.degree(v) > threshold]
    assert len(high) >= 300 and len(low) >= 900

    low_rates = []
    high_rates = []
    for seed in range(200):
        res = regularize_step(
            g, float(d), gamma, eps, SeededRng(seed, "mc"),
            retries=1, raise_on_reject=False,
        )
        h = res.subgraph.graph
        back = {orig: new for new, orig in enumerate(res.subgraph.parent)}
        surv = set(res.subgraph.parent)
        lo_kept = lo_tot = hi_kept = hi_tot = 0
        for v in low:
            if v in surv:
                lo_tot += g.degree(v)
                lo_kept += h.degree(back[v])
        for v in high:
            hi_tot += g.degree(v)
            hi_kept += h.degree(back[v]) if v in surv else 0
        low_rates.append(lo_kept / lo_tot)
        high_rates.append(hi_kept / hi_tot)

    lo_mean = float(np.mean(low_rates))
    hi_mean = float(np.mean(high_rates))
    lo_se = float(np.std(low_rates) / np.sqrt(len(low_rates)))
    hi_se = float(np.std(high_rates) / np.sqrt(len(high_rates)))
    assert abs(lo_mean - (1 - eps)) <= 3 * max(lo_se, 1e-6)
    assert abs(hi_mean - (1 - eps) ** 2) <= 3 * max(hi_se, 1e-6)


def test_regularize_already_regular_stops_immediately():
    g = complete_bipartite(6, 6)
    cfg = RegularisationConfig(lam=1.0, epsilon_floor=0.01, max_steps=10)
    res = regularize(g, cfg, range(g.n), SeededRng(1, "r"))
    assert res.executed_steps == 0
    assert res.subgraph.graph == g
    assert res.survivors == tuple(range(g.n))


def test_regularize_paper_mode_vacuous_regime():
    g = complete_bipartite(6, 6)
    cfg = RegularisationConfig(lam=1.5, mode="paper", C=100.0)
    res = regularize(g, cfg, range(g.n), SeededRng(1, "r"))
    assert res.vacuous
    assert res.subgraph.graph == g  # input returned unchanged, flagged


def test_regularize_window_and_shrinking_spread():
    g = lambda18_synthetic(1200, seed=5)
    degs = g.degrees()
    assert min(degs) >= 60 and max(degs) <= 18 * 60
    cfg = RegularisationConfig(
        lam=18.0, epsilon_floor=0.01, max_steps=8, d_floor=60.0
    )
    res = regularize(g, cfg, range(g.n), SeededRng(3, "run"))
    assert res.executed_steps == 8
    for entry in res.log:
        lo, hi = entry["window"]
        assert entry["min_degree"] >= lo - 1e-9
        assert entry["max_degree"] <= hi + 1e-9
    in_spread = max(degs) - min(degs)
    assert res.final_spread < in_spread
    # survival never beats the per-step keep probability by much, never
    # collapses: the proof's (1-e)^k floor
    frac = len(res.survivors) / g.n
    assert frac >= (1 - 0.01) ** res.executed_steps - 0.02


def test_regularize_spread_ratio_non_increasing():
    g = lambda18_synthetic(1200, seed=9)
    cfg = RegularisationConfig(lam=18.0, epsilon_floor=0.01, max_steps=6, d_floor=60.0)
    res = regularize(g, cfg, range(g.n), SeededRng(4, "run"))
    gammas = [entry["gamma_after"] for entry in res.log]
    assert all(g2 < g1 for g1, g2 in zip(gammas, gammas[1:]))


def test_regularize_rejects_degrees_outside_declared_window():
    g = k44()
    cfg = RegularisationConfig(lam=1.0, epsilon_floor=0.01, d_floor=5.0)
    with pytest.raises(RegularisationError):
        regularize(g, cfg, range(g.n), SeededRng(0, "x"))
