"""Command-line entry point.

Exit codes: 0 success, 1 verified negative (a sound witness or a
completed "none"), 2 budget exhausted or stage failure, 64 usage error.
Artifacts are canonical JSON (no timestamps), so identical invocations
on identical files produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .absorb import build_rmbg, verify_absorber, Absorber
from .certificates import load_pairs, load_vertex_set, read_json, write_json
from .connect import ConnectionRequest, connect_pairs_disjoint, default_max_len
from .errors import ConnectionError, EquicycleError
from .expander import (
    ExpanderParams,
    check_expander,
    decompose_into_expanders,
    extract_expander,
)
from .forest import bipartite_edge_colouring
from .generators import (
    blowup_2,
    complete_bipartite,
    complete_graph,
    crown_bipartite,
    cycle_graph,
    near_regular_bipartite,
    random_bipartite,
    random_graph,
)
from .graph import BipartiteGraph, graph_to_text, load_graph, save_graph
from .oracle import SearchLimits, brute_force_cycles, brute_force_extremal
from .pipeline import PipelineConfig, run_pipeline
from .regularize import RegularisationConfig, regularize
from .rng import SeededRng
from .verify import verify_cycles

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_BUDGET = 2
EXIT_USAGE = 64


def _log_run(args, seed, extra=""):
    blob = json.dumps({k: str(v) for k, v in sorted(vars(args).items())}, sort_keys=True)
    cfg_hash = hashlib.sha256(blob.encode()).hexdigest()[:12]
    print(
        f"equicycle {__version__} | seed={seed} | config={cfg_hash} {extra}".rstrip(),
        file=sys.stderr,
    )


def _out_path(args, name):
    out = Path(args.out) if args.out else Path(".")
    return out / name


def cmd_gen(args):
    rng = SeededRng(args.seed, "gen")
    kind = args.kind
    if kind == "k44":
        g = complete_bipartite(4, 4)
    elif kind == "complete":
        g = complete_graph(args.n)
    elif kind == "cycle":
        g = cycle_graph(args.n)
    elif kind == "blowup-cycle":
        g = blowup_2(cycle_graph(args.n))
    elif kind == "complete-bipartite":
        g = complete_bipartite(args.n, args.n)
    elif kind == "crown":
        g = crown_bipartite(args.side, rng, args.removed)
    elif kind == "near-regular-bipartite":
        g = near_regular_bipartite(args.side, args.d, rng)
    elif kind == "random-bipartite":
        g = random_bipartite(args.side, args.side, args.p, rng)
    elif kind == "random":
        g = random_graph(args.n, args.m, rng)
    else:
        print(f"unknown kind {kind}", file=sys.stderr)
        return EXIT_USAGE
    save_graph(g, args.graph_out)
    print(f"wrote {args.graph_out}: n={g.n} m={g.m}")
    return EXIT_OK


def cmd_check_expander(args):
    g = load_graph(args.graph)
    params = ExpanderParams(args.epsilon, args.s)
    rng = SeededRng(args.seed, "check-expander")
    verdict = check_expander(
        g, params, args.mode, n_exact=args.n_exact, budget=args.budget, rng=rng
    )
    if args.out:
        write_json(_out_path(args, "expander-verdict.json"), verdict.to_dict())
    print(json.dumps(verdict.to_dict(), sort_keys=True))
    if verdict.is_expander:
        return EXIT_OK
    return EXIT_NEGATIVE


def cmd_extract_expander(args):
    g = load_graph(args.graph)
    rng = SeededRng(args.seed, "extract")
    gp, s, trace = extract_expander(
        g, args.epsilon, n_exact=args.n_exact, heuristic_budget=args.budget, rng=rng
    )
    write_json(_out_path(args, "extraction-trace.json"), trace.to_dict())
    save_graph(gp, _out_path(args, "expander.g"))
    print(f"extracted n={gp.n} m={gp.m} s={s:.4f} steps={len(trace.steps)}")
    return EXIT_OK


def cmd_regularize(args):
    g = load_graph(args.graph)
    cfg = RegularisationConfig(
        lam=args.lam,
        epsilon_floor=args.epsilon,
        max_steps=args.max_steps,
        mode=args.mode,
        d_floor=args.d_floor,
    )
    rng = SeededRng(args.seed, "regularize")
    res = regularize(g, cfg, tuple(range(g.n)), rng)
    write_json(
        _out_path(args, "regularisation.json"),
        {
            "d_prime": res.d_prime,
            "vacuous": res.vacuous,
            "steps": res.executed_steps,
            "final_spread": res.final_spread,
            "survivors": len(res.survivors),
            "log": res.log,
        },
    )
    save_graph(res.subgraph.graph, _out_path(args, "regularized.g"))
    print(
        f"steps={res.executed_steps} d'={res.d_prime:.2f} "
        f"spread={res.final_spread:.1f} vacuous={res.vacuous}"
    )
    return EXIT_OK


def cmd_decompose(args):
    g = load_graph(args.graph)
    params = ExpanderParams(args.epsilon, args.s)
    rng = SeededRng(args.seed, "decompose")
    parts, verdicts = decompose_into_expanders(
        g, args.k, params, rng, verify=args.verify, n_exact=args.n_exact
    )
    for i, part in enumerate(parts):
        save_graph(part, _out_path(args, f"part-{i}.g"))
    write_json(
        _out_path(args, "decomposition.json"),
        {
            "k": args.k,
            "part_edges": [p.m for p in parts],
            "verdicts": [v.to_dict() if v else None for v in verdicts],
        },
    )
    print(f"decomposed into {args.k} parts: {[p.m for p in parts]}")
    return EXIT_OK


def cmd_connect(args):
    g = load_graph(args.graph)
    pairs = load_pairs(args.pairs)
    vset = load_vertex_set(args.set)
    max_len = args.max_len or default_max_len(g.n)
    req = ConnectionRequest(pairs=pairs, V=vset, max_len=max_len)
    try:
        sol = connect_pairs_disjoint(g, req)
    except ConnectionError as exc:
        payload = {
            "solved": False,
            "error": str(exc),
            "diagnosis": exc.diagnosis,
            "partial": {str(i): list(p) for i, p in exc.partial.items()},
        }
        if args.out:
            write_json(_out_path(args, "connection.json"), payload)
        print(json.dumps(payload, sort_keys=True, default=str))
        kind = (exc.diagnosis or {}).get("kind", "")
        return EXIT_NEGATIVE if kind == "proven-infeasible" else EXIT_BUDGET
    payload = {"solved": True, "paths": {str(i): list(p) for i, p in sol.paths.items()}}
    if args.out:
        write_json(_out_path(args, "connection.json"), payload)
    print(json.dumps(payload, sort_keys=True))
    return EXIT_OK


def cmd_rmbg(args):
    rng = SeededRng(args.seed, "rmbg")
    rm = build_rmbg(args.m, rng, verify=args.verify, matchings=args.matchings)
    payload = {
        "n": rm.n,
        "m": rm.m,
        "edges": [list(e) for e in rm.edges],
        "a1": list(rm.a1),
        "b1": list(rm.b1),
        "a2": list(rm.a2),
        "b2": list(rm.b2),
        "max_degree": rm.max_degree,
        "odd_edges": len(rm.edges) % 2 == 1,
        "verify_mode": rm.verify_mode,
    }
    if args.out:
        write_json(_out_path(args, "rmbg.json"), payload)
    print(
        f"rmbg m={rm.m}: |A1|={len(rm.a1)} |A2|={len(rm.a2)} "
        f"edges={len(rm.edges)} maxdeg={rm.max_degree}"
    )
    return EXIT_OK


def cmd_absorbers(args):
    g = load_graph(args.graph)
    if args.action == "verify":
        data = read_json(args.absorber)
        ab = Absorber(
            pair=tuple(data["pair"]),
            endpoints=tuple(data["endpoints"]),
            interior=tuple(data["interior"]),
            path_without=tuple(data["path_without"]),
            path_with=tuple(data["path_with"]),
        )
        ok, clause = verify_absorber(g, ab)
        print(json.dumps({"ok": ok, "clause": clause}))
        return EXIT_OK if ok else EXIT_NEGATIVE
    print("absorbers build requires the pipeline; use `equicycle run`", file=sys.stderr)
    return EXIT_USAGE


def cmd_forest(args):
    g = load_graph(args.graph)
    if not isinstance(g, BipartiteGraph):
        print("edge colouring needs a bipartite graph file", file=sys.stderr)
        return EXIT_USAGE
    classes = bipartite_edge_colouring(g)
    payload = {"colours": len(classes), "classes": [[list(e) for e in c] for c in classes]}
    if args.out:
        write_json(_out_path(args, "colouring.json"), payload)
    print(f"coloured {g.m} edges with {len(classes)} colours")
    return EXIT_OK


def cmd_run(args):
    g = load_graph(args.graph)
    overrides = {}
    if args.config:
        overrides = read_json(args.config)
    cfg = PipelineConfig(k=args.k, mode=args.mode, seed=args.seed, **overrides)
    _log_run(args, args.seed, f"| pipeline-config={cfg.config_hash()}")
    res = run_pipeline(g, cfg)
    out = Path(args.out) if args.out else Path(".")
    write_json(out / "certificates.json", {"stages": res.certificates})
    if res.ok:
        write_json(out / "cycle-family.json", res.family.to_dict())
        report = verify_cycles(g, res.family.cycles, cfg.k)
        print(f"found {cfg.k} cycles on {len(res.family.common_vertices)} vertices; "
              f"verified={report.ok}")
        return EXIT_OK if report.ok else EXIT_BUDGET
    write_json(out / "failure-report.json", res.failure.to_dict())
    print(f"pipeline failed at {res.failure.stage}: {res.failure.reason}")
    return EXIT_BUDGET


def cmd_verify(args):
    g = load_graph(args.graph)
    data = read_json(args.family)
    cycles = [tuple(c) for c in data["cycles"]]
    report = verify_cycles(g, cycles, args.k)
    print(json.dumps({"ok": report.ok, "clause": report.clause, "detail": report.detail}))
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def cmd_oracle(args):
    limits = SearchLimits(node_budget=args.node_budget)
    if args.action == "cycles":
        g = load_graph(args.graph)
        res = brute_force_cycles(g, args.k, limits)
        payload = {
            "status": res.status,
            "family": [list(c) for c in res.family] if res.family else None,
            "nodes": res.nodes_used,
        }
        if args.out:
            write_json(_out_path(args, "oracle-cycles.json"), payload)
        print(json.dumps(payload, sort_keys=True))
        return {
            "found": EXIT_OK,
            "none": EXIT_NEGATIVE,
            "budget-exceeded": EXIT_BUDGET,
        }[res.status]
    res = brute_force_extremal(args.n, args.k, limits)
    payload = {
        "status": res.status,
        "max_edges": res.max_edges,
        "witness": graph_to_text(res.witness) if res.witness else None,
        "graphs_checked": res.graphs_checked,
    }
    if args.out:
        write_json(_out_path(args, "oracle-extremal.json"), payload)
    print(json.dumps(payload, sort_keys=True))
    return EXIT_OK if res.status == "done" else EXIT_BUDGET


def build_parser():
    p = argparse.ArgumentParser(prog="equicycle", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        sp = sub.add_parser(name, **kwargs)
        sp.set_defaults(fn=fn)
        sp.add_argument("--out", default=None, help="artifact directory")
        sp.add_argument("--seed", type=int, default=0)
        return sp

    sp = add("gen", cmd_gen, help="generate bundled fixtures")
    sp.add_argument("--kind", required=True,
                    choices=["k44", "complete", "cycle", "blowup-cycle",
                             "complete-bipartite", "crown", "near-regular-bipartite",
                             "random-bipartite", "random"])
    sp.add_argument("--graph-out", required=True)
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--m", type=int, default=12)
    sp.add_argument("--side", type=int, default=100)
    sp.add_argument("--d", type=int, default=8)
    sp.add_argument("--p", type=float, default=0.5)
    sp.add_argument("--removed", type=int, default=1)

    sp = add("check-expander", cmd_check_expander)
    sp.add_argument("--graph", required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--mode", choices=["exact", "heuristic"], default="exact")
    sp.add_argument("--n-exact", type=int, default=18)
    sp.add_argument("--budget", type=int, default=400)

    sp = add("extract-expander", cmd_extract_expander)
    sp.add_argument("--graph", required=True)
    sp.add_argument("--epsilon", type=float, default=2**-5)
    sp.add_argument("--n-exact", type=int, default=18)
    sp.add_argument("--budget", type=int, default=300)

    sp = add("regularize", cmd_regularize)
    sp.add_argument("--graph", required=True)
    sp.add_argument("--lam", type=float, required=True)
    sp.add_argument("--epsilon", type=float, default=0.01)
    sp.add_argument("--max-steps", type=int, default=50)
    sp.add_argument("--mode", choices=["desk", "paper"], default="desk")
    sp.add_argument("--d-floor", type=float, default=None)

    sp = add("decompose", cmd_decompose)
    sp.add_argument("--graph", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--epsilon", type=float, default=0.5)
    sp.add_argument("--s", type=float, default=1.0)
    sp.add_argument("--verify", action="store_true")
    sp.add_argument("--n-exact", type=int, default=18)

    sp = add("connect", cmd_connect)
    sp.add_argument("--graph", required=True)
    sp.add_argument("--pairs", required=True, help="file of 'u v' lines")
    sp.add_argument("--set", required=True, help="file of connecting-set vertices")
    sp.add_argument("--max-len", type=int, default=None)

    sp = add("rmbg", cmd_rmbg)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--verify", choices=["exact", "sampled"], default="exact")
    sp.add_argument("--matchings", type=int, default=60)

    sp = add("absorbers", cmd_absorbers)
    sp.add_argument("action", choices=["build", "verify"])
    sp.add_argument("--graph", required=True)
    sp.add_argument("--absorber", help="absorber JSON for verify")

    sp = add("forest", cmd_forest)
    sp.add_argument("--graph", required=True)

    sp = add("run", cmd_run)
    sp.add_argument("--graph", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--mode", choices=["desk", "paper"], default="desk")
    sp.add_argument("--config", help="JSON file of PipelineConfig overrides")

    sp = add("verify", cmd_verify)
    sp.add_argument("--graph", required=True)
    sp.add_argument("--family", required=True)
    sp.add_argument("--k", type=int, required=True)

    sp = add("oracle", cmd_oracle)
    sp.add_argument("action", choices=["cycles", "extremal"])
    sp.add_argument("--graph")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--node-budget", type=int, default=5_000_000)

    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except EquicycleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
