"""Command-line entry point: ``ssexpand <command> ...``.

Exit status: 0 when every requested assertion passes, 1 on parse / input /
budget errors, 2 when an assertion fails. ``--json PATH`` on every command
writes the structured report; reports are byte-identical for identical
configuration and seed unless ``--timing`` is given.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
import time

import numpy as np

from . import clh as clh_mod
from . import graphs, robustness, stabilizer, zoo
from .io import (ParseError, load_code, load_graph, load_instance, load_witness, save_code, save_graph,
                 save_instance, save_witness)
from .pauli import PauliError, from_terms, parse_pauli
from .reports import BudgetError, budgets, build_report, derive_seed, jsonable, write_report

EXIT_OK, EXIT_INPUT, EXIT_ASSERT = 0, 1, 2


class InputError(ValueError):
    pass


def _graph_arg(args) -> graphs.BipartiteGraph:
    if getattr(args, "code", None):
        return graphs.from_code(load_code(args.code))
    if getattr(args, "graph", None):
        return load_graph(args.graph)
    raise InputError("one of --code or --graph is required")


# ---------------------------------------------------------------------------
# commands; each returns (config, result, assertions, seed, summary-text)

def cmd_validate(args, B):
    data_err = None
    try:
        code = load_code(args.code)
        rep = stabilizer.check_generators(code.generators, code.k)
    except stabilizer.CodeValidationError as exc:
        rep, data_err = exc.report, exc
    result = rep.as_dict()
    if rep.ok:
        noc = stabilizer.check_nocommute_per_qudit(code)
        result.update(n=code.n, m=code.m, d=code.d, nocommute_per_qudit=noc.ok)
    text = "valid" if data_err is None else f"invalid: {rep.message}"
    return {"code": args.code}, result, {"valid": rep.ok}, None, text


def cmd_expansion(args, B):
    G = _graph_arg(args)
    rep = graphs.expansion_error(G, args.k, args.mode, args.trials, args.seed, B["exact_budget"], args.workers)
    cfg = {"code": args.code, "graph": args.graph, "k": args.k, "mode": args.mode, "trials": args.trials}
    summary = json.dumps({"eps": str(rep.eps), "witness": list(rep.witness)})
    return cfg, rep.as_dict(), {}, args.seed if args.mode == "sampled" else None, summary


def cmd_independent_sets(args, B):
    G = _graph_arg(args)
    cfg = {"code": args.code, "graph": args.graph, "kind": args.kind, "k": args.k, "target": args.target}
    if args.kind == "L":
        U = graphs.greedy_L_independent(G, args.target)
        ok = graphs.is_L_independent(G, U)
        return cfg, {"chosen": list(U), "size": len(U)}, {"pairwise_disjoint": ok}, None, f"{list(U)}"
    rep = graphs.greedy_k_independent(G, args.k, args.target)
    k = G.k if args.k is None else args.k
    res = {"chosen": list(rep.chosen), "size": len(rep.chosen), "fraction": str(rep.fraction),
           "proof_bound": rep.proof_bound, "eta": rep.eta}
    asserts = {"pairwise_disjoint": graphs.is_t_independent(G, rep.chosen, k),
               "fraction_ge_proof_bound": rep.meets_proof_bound}
    return cfg, res, asserts, None, f"{list(rep.chosen)}"


def cmd_distance(args, B):
    code = load_code(args.code)
    cap = args.cap if args.cap is not None else B["weight_cap"]
    res = stabilizer.distance(code, cap, args.method)
    out = {"distance": res.distance, "lower_bound": res.lower_bound, "text": res.text(), "cap": cap,
           "witness": None if res.witness is None else str(res.witness), "method": res.method}
    return {"code": args.code, "cap": cap, "method": args.method}, out, {}, None, res.text()


def cmd_robustness(args, B):
    code = load_code(args.code)
    G = graphs.from_code(code)
    cap = B["weight_cap"]
    cfg = {"code": args.code, "construction": args.construction, "U_size": args.U_size, "U": args.U,
           "trials": args.trials, "independence_level": args.independence_level, "weight_cap": cap}
    if args.U:
        U = tuple(int(x) for x in args.U.split(","))
    elif args.construction == "random":
        level = code.k if args.independence_level is None else args.independence_level
        U = graphs._greedy_disjoint(G, level)[: args.U_size]
    else:
        U = graphs.greedy_L_independent(G)[: args.U_size]
    if len(U) < args.U_size:
        raise InputError(f"only {len(U)} independent generators available, --U-size {args.U_size} requested")
    if args.construction == "expander":
        res = robustness.expander_adversarial_error(code, U, weight_cap=cap)
        return cfg, res.as_dict(), res.assertions, None, json.dumps(jsonable(res.measurement.as_dict()))
    if args.construction == "alphabet":
        res = robustness.alphabet_error(code, U, weight_cap=cap)
        return cfg, res.as_dict(), res.assertions, None, json.dumps(jsonable(res.measurement.as_dict()))
    seed = derive_seed(args.seed, "robustness/random")
    res = robustness.monte_carlo_indexp(code, U, args.trials, seed, cap, args.independence_level,
                                        workers=args.workers)
    return cfg, res.as_dict(), res.assertions, args.seed, f"mean penalty {res.mean_penalty:.6f} +/- {res.half_width:.6f}"


def _onion_errors(code, u, args):
    supp = code.supports[u]
    system = code.system
    if args.error:
        yield parse_pauli(args.error, system)
        return
    d = code.d
    for i in range(1, len(supp) + 1):
        for sub in itertools.combinations(supp, i):
            for zs in itertools.product(range(1, d), repeat=i):
                yield from_terms(system, [(q, 0, z) for q, z in zip(sub, zs)])
    rng = np.random.default_rng(derive_seed(args.seed, "onion/random"))
    for _ in range(args.random):
        i = int(rng.integers(1, len(supp) + 1))
        sub = sorted(rng.choice(supp, size=i, replace=False).tolist())
        pairs = [divmod(int(p), d) for p in rng.integers(1, d * d, size=i)]
        yield from_terms(system, [(q, x, z) for q, (x, z) in zip(sub, pairs)])


def cmd_onion(args, B):
    code = load_code(args.code)
    cfg = {"code": args.code, "u": args.u, "error": args.error, "random": args.random}
    rows, bad = [], []
    for E in _onion_errors(code, args.u, args):
        r = robustness.onion_min_restricted_weight(code, args.u, E, B["weight_cap"], budget=B["enum_budget"])
        rows.append({"error": str(E), **r.as_dict()})
        if not r.ok:
            bad.append(str(E))
    res = {"checked": len(rows), "violations": bad, "rows": rows}
    return cfg, res, {"onion_bound": not bad}, args.seed, f"{len(rows)} errors checked, {len(bad)} violations"


def cmd_profile(args, B):
    code = load_code(args.code)
    cap = args.cap
    prof = robustness.robustness_profile(code, cap, budget=B["enum_budget"])
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(prof.csv())
    return {"code": args.code, "cap": cap}, prof.as_dict(), {}, None, prof.csv().rstrip()


def cmd_clh_approx(args, B):
    inst = load_instance(args.input)
    rep = clh_mod.validate_clh(inst)
    if not rep.ok:
        raise InputError(f"instance fails validation: {rep.as_dict()}")
    idx = [int(x) for x in args.prover_indices.split(",")] if args.prover_indices else None
    res = clh_mod.approximate_ground(inst, args.strategy, idx, derive_seed(args.seed, "clh/approx"),
                                     args.eigen_index, workers=args.workers)
    if args.out:
        save_witness(res.witness, args.out)
    cfg = {"input": args.input, "strategy": args.strategy, "prover_indices": args.prover_indices,
           "eigen_index": args.eigen_index}
    out = {"energy": res.energy, "good_energy": res.good_energy, "n_bad": len(res.witness.bad),
           "bad": list(res.witness.bad), "iterations": len(res.records), "terms": len(inst.terms),
           "eps": str(res.eps), "bad_bound": res.bad_bound, "k": res.k, "D_R": res.D_R,
           "final_digest": res.witness.final_digest}
    return cfg, out, res.assertions, args.seed, f"energy {res.energy:.10f}, |L_bad| = {len(res.witness.bad)}"


def cmd_clh_verify(args, B):
    inst = load_instance(args.input)
    w = load_witness(args.witness)
    rep = clh_mod.verify_witness(inst, w)
    cfg = {"input": args.input, "witness": args.witness}
    text = f"verified energy {rep.energy}" if rep.ok else "verification failed: " + "; ".join(rep.failures)
    return cfg, rep.as_dict(), {"witness_valid": rep.ok}, None, text


def cmd_zoo(args, B):
    kind = args.zoo
    if kind == "toric":
        t = zoo.toric_code(args.L)
        if args.out:
            save_code(t.code, args.out)
        return {"zoo": kind, "L": args.L}, {"n": t.code.n, "m": t.code.m, "k": t.code.k, "D_R": t.code.D_R}, {}, None, \
            f"toric L={args.L}: n={t.code.n}, m={t.code.m}"
    if kind == "random-css":
        code = zoo.random_css_instance(args.n, args.k, args.D_R, derive_seed(args.seed, "zoo/random-css"),
                                       args.n_z, args.n_x, args.min_distance)
        if args.out:
            save_code(code, args.out)
        return ({"zoo": kind, "n": args.n, "k": args.k, "D_R": args.D_R, "n_z": args.n_z, "n_x": args.n_x,
                 "min_distance": args.min_distance}, {"n": code.n, "m": code.m, "k": code.k, "D_R": code.D_R}, {},
                args.seed, f"random CSS code: n={code.n}, m={code.m}")
    if kind == "random-graph":
        G = graphs.random_bipartite_graph(args.m, args.n, args.left_degree, derive_seed(args.seed, "zoo/random-graph"))
        if args.out:
            save_graph(G, args.out)
        return ({"zoo": kind, "m": args.m, "n": args.n, "left_degree": args.left_degree},
                {"m": G.m, "n": G.n, "D_R": G.D_R}, {}, args.seed, f"graph m={G.m}, n={G.n}, D_R={G.D_R}")
    if kind == "projector":
        code = load_code(args.code)
        inst = zoo.as_projector_clh(code)
        if args.out:
            save_instance(inst, args.out)
        rep = clh_mod.validate_clh(inst)
        return {"zoo": kind, "code": args.code}, rep.as_dict(), {"valid_clh": rep.ok}, None, \
            f"{len(inst.terms)} projector terms"
    if kind == "classical":
        G = load_graph(args.graph)
        code = zoo.classical_parity_code(G)
        cfg = {"zoo": kind, "graph": args.graph, "max_weight": args.max_weight, "check": args.check}
        if not args.check:
            return cfg, {"m": G.m, "n": G.n, "D_R": G.D_R}, {}, None, f"classical code m={G.m}, n={G.n}"
        rep = zoo.classical_robustness_check(code, args.max_weight)
        asserts = {"violations_ge_1_minus_3eps": rep.counterexample is None, "distance_argument": rep.distance_ok}
        return cfg, rep.as_dict(), asserts, None, f"eps={rep.eps}, min ratio={rep.min_ratio}"
    raise InputError(f"unknown zoo kind {kind!r}")


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ssexpand", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", help="write the structured report to this path")
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--workers", type=int, default=1, help="worker threads; results do not depend on it")
    common.add_argument("--timing", action="store_true", help="record wall-clock time and workers in the report")
    common.add_argument("--quiet", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="validate a stabilizer code file")
    s.add_argument("--code", required=True)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("expansion", parents=[common], help="small-set expansion error")
    s.add_argument("--code")
    s.add_argument("--graph")
    s.add_argument("--k", type=int)
    s.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    s.add_argument("--trials", type=int, default=10_000)
    s.set_defaults(func=cmd_expansion)

    s = sub.add_parser("independent-sets", parents=[common], help="greedy L- or k-independent sets")
    s.add_argument("--code")
    s.add_argument("--graph")
    s.add_argument("--kind", choices=["L", "k"], default="L")
    s.add_argument("--k", type=int)
    s.add_argument("--target", type=int, default=0)
    s.set_defaults(func=cmd_independent_sets)

    s = sub.add_parser("distance", parents=[common], help="code distance by iterative deepening")
    s.add_argument("--code", required=True)
    s.add_argument("--cap", type=int)
    s.add_argument("--method", choices=["dfs", "enumerate", "cosets"], default="dfs")
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("robustness", parents=[common], help="error constructions and Lemma indexp Monte Carlo")
    s.add_argument("--code", required=True)
    s.add_argument("--construction", choices=["expander", "alphabet", "random"], required=True)
    s.add_argument("--U-size", dest="U_size", type=int, default=1)
    s.add_argument("--U", help="explicit comma-separated generator indices")
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--independence-level", type=int, help="t for Gamma^(t)-disjointness of U (default k)")
    s.add_argument("--out", help="alias of --json")
    s.set_defaults(func=cmd_robustness)

    s = sub.add_parser("onion", parents=[common], help="onion-fact check on one generator's support")
    s.add_argument("--code", required=True)
    s.add_argument("--u", type=int, required=True)
    s.add_argument("--error", help="Pauli text; default: all Z patterns plus --random mixed ones")
    s.add_argument("--random", type=int, default=0)
    s.set_defaults(func=cmd_onion)

    s = sub.add_parser("profile", parents=[common], help="exhaustive robustness profile (CSV)")
    s.add_argument("--code", required=True)
    s.add_argument("--cap", type=int, default=2)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("clh", help="commuting local Hamiltonians")
    csub = s.add_subparsers(dest="clh_command", required=True)
    a = csub.add_parser("approx", parents=[common], help="run the Theorem 1 loop (prover)")
    a.add_argument("--in", dest="input", required=True)
    a.add_argument("--strategy", choices=["exhaustive-block-search", "prover-indices"], default="exhaustive-block-search")
    a.add_argument("--prover-indices")
    a.add_argument("--eigen-index", type=int, default=0)
    a.add_argument("--out", help="witness output path")
    a.set_defaults(func=cmd_clh_approx)
    v = csub.add_parser("verify", parents=[common], help="replay and check a witness (verifier)")
    v.add_argument("--in", dest="input", required=True)
    v.add_argument("--witness", required=True)
    v.set_defaults(func=cmd_clh_verify)

    s = sub.add_parser("zoo", help="build test subjects")
    zsub = s.add_subparsers(dest="zoo", required=True)
    z = zsub.add_parser("toric", parents=[common])
    z.add_argument("--L", type=int, required=True)
    z.add_argument("--out")
    z = zsub.add_parser("classical", parents=[common])
    z.add_argument("--graph", required=True)
    z.add_argument("--check", action="store_true")
    z.add_argument("--max-weight", type=int, default=3)
    z = zsub.add_parser("random-css", parents=[common])
    z.add_argument("--n", type=int, required=True)
    z.add_argument("--k", type=int, required=True)
    z.add_argument("--D-R", dest="D_R", type=int, default=4)
    z.add_argument("--n-z", dest="n_z", type=int)
    z.add_argument("--n-x", dest="n_x", type=int)
    z.add_argument("--min-distance", type=int)
    z.add_argument("--out")
    z = zsub.add_parser("random-graph", parents=[common])
    z.add_argument("--m", type=int, required=True)
    z.add_argument("--n", type=int, required=True)
    z.add_argument("--left-degree", type=int, required=True)
    z.add_argument("--out")
    z = zsub.add_parser("projector", parents=[common])
    z.add_argument("--code", required=True)
    z.add_argument("--out")
    for zp in zsub.choices.values():
        zp.set_defaults(func=cmd_zoo)
    return p


def _command_name(args) -> str:
    if args.command == "clh":
        return f"clh {args.clh_command}"
    if args.command == "zoo":
        return f"zoo {args.zoo}"
    return args.command


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    name = _command_name(args)
    t0 = time.perf_counter()
    try:
        B = budgets()
        config, result, assertions, seed, text = args.func(args, B)
    except (ParseError, InputError, BudgetError, PauliError, stabilizer.BudgetExceeded, stabilizer.CapExceeded,
            stabilizer.CodeValidationError, graphs.GraphError, graphs.IndependentSetError, zoo.ZooError,
            clh_mod.ClhError, clh_mod.WitnessError, robustness.RobustnessError, FileNotFoundError) as exc:
        print(f"ssexpand {name}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    config = {"command": name, **config, "budgets": B}
    timing = {"recorded": True, "wall_clock_s": time.perf_counter() - t0, "workers": args.workers} if args.timing else None
    report = build_report(name, config, result, assertions, seed, timing)
    out = args.json
    if name == "robustness" and not out:
        out = args.out
    if out:
        write_report(report, out)
    if not args.quiet:
        print(text)
        for f in report["failures"]:
            print(f"ASSERTION FAILED: {f}", file=sys.stderr)
    return EXIT_OK if report["ok"] else EXIT_ASSERT


if __name__ == "__main__":
    sys.exit(main())
