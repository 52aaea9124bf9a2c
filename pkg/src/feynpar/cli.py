"""Command-line interface.

Every command writes a single JSON document to stdout (CSV extracts via
--emit-plot-data) and diagnostics to stderr. Exit codes: 0 success,
2 validation/parse error, 3 numeric tolerance failure, 4 precondition
violation (e.g. divergent configuration without --allow-divergent).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import corpus
from .graphs import DivergencePredicate, FeynmanGraph, MalformedGraph
from .graph_poly import (
    MomentumData,
    case_table_affine,
    case_table_sliced,
    generic_condition,
    psi_polynomial,
    second_symanzik,
    v_function,
)
from .integrals import (
    DivergentConfiguration,
    FitUnstable,
    asymptotic_fit,
    dimreg_series,
    feynman_U,
    gelfand_leray_J,
    iterated_log_integral,
    leray_I_epsilon,
    log_zeta_coeffs,
    mellin_transform,
    projective_identity_residual,
)
from .poly import MultiPoly
from .points import count_points, count_points_naive
from .quadrature import IntegrateOpts, SublevelOpts, ToleranceNotReached
from .series import LaurentSeries
from .slicing import LinearSlice, make_slice, milnor_report, feynman_subspace_dim
from .hopf import (
    Character,
    birkhoff_bphz,
    connection_data,
    graph_hopf_algebra,
)


def _hash_file(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()[:16]


def _load_graph(arg):
    """Graph from a JSON file path or a builtin corpus name."""
    if arg in corpus.DESCRIPTIONS:
        return corpus.get(arg), f"builtin:{arg}"
    with open(arg) as fh:
        desc = json.load(fh)
    return FeynmanGraph.validate(desc), _hash_file(arg)


def _momentum(args, g):
    mass2 = Fraction(args.mass2) if getattr(args, "mass2", None) else Fraction(0)
    if getattr(args, "gram", None):
        with open(args.gram) as fh:
            data = json.load(fh)
        return MomentumData.from_gram(data["labels"], data["gram"], mass2)
    p2 = Fraction(args.p2) if getattr(args, "p2", None) else None
    return MomentumData.two_leg(p2, mass2)


class GoldenMismatch(RuntimeError):
    pass


def _emit(doc, args):
    doc.setdefault("inputs", {})
    if getattr(args, "seed", None) is not None:
        doc["inputs"]["seed"] = args.seed
    payload = json.dumps(doc, indent=2, default=str) + "\n"
    sys.stdout.write(payload)
    golden = getattr(args, "golden", None)
    if golden:
        if os.path.exists(golden):
            with open(golden) as fh:
                if fh.read() != payload:
                    raise GoldenMismatch(f"output drifted from golden file {golden}")
        else:
            with open(golden, "w") as fh:
                fh.write(payload)
            print(f"golden file written: {golden}", file=sys.stderr)


def _default_seed(args):
    if args.seed is None:
        args.seed = int(os.environ.get("FEYNPAR_SEED", "0"))
    return args.seed


def cmd_poly(args):
    g, digest = _load_graph(args.graph)
    mom = _momentum(args, g)
    psi = psi_polynomial(g, "det")
    p = second_symanzik(g, mom, "cutsets")
    p_eff, _ = v_function(g, mom)
    names = [f"t{i+1}" for i in range(g.n_edges)]
    if p.arity > g.n_edges:
        names_p = names + ["p2"]
    else:
        names_p = names
    holds, cert = generic_condition(g, mom)
    doc = {
        "inputs": {"graph": digest, "mode": mom.mode},
        "name": g.name,
        "loops": g.loop_number(),
        "edges": g.n_edges,
        "psi": {"pretty": psi.pretty(names), "serialized": psi.serialize()},
        "P": {"pretty": p.pretty(names_p), "serialized": p.serialize()},
        "P_eff": p_eff.pretty(names_p if p_eff.arity > g.n_edges else names),
        "one_pi": g.is_one_pi(),
        "generic_condition": {"holds": holds, "certificate": cert},
    }
    _emit(doc, args)
    return 0


def cmd_check(args):
    from .slicing import verify_deletion_contraction

    targets = []
    for spec in args.names or corpus.CORPUS_NAMES:
        if os.path.isdir(spec):
            for fname in sorted(os.listdir(spec)):
                if fname.endswith(".json"):
                    with open(os.path.join(spec, fname)) as fh:
                        targets.append(FeynmanGraph.validate(json.load(fh)))
        elif spec in corpus.DESCRIPTIONS:
            targets.append(corpus.get(spec))
        else:
            with open(spec) as fh:
                targets.append(FeynmanGraph.validate(json.load(fh)))
    failures = []
    report = {}
    for g in targets:
        name = g.name
        checks = {}
        psi_d = psi_polynomial(g, "det")
        psi_t = psi_polynomial(g, "trees")
        checks["psi_det_equals_trees"] = psi_d == psi_t
        homog, deg, per_var = psi_t.homogeneity()
        checks["psi_homogeneous"] = homog
        checks["psi_degree_is_loops"] = deg == g.loop_number()
        checks["psi_multilinear"] = all(v <= 1 for v in per_var)
        checks["deletion_contraction"] = all(
            verify_deletion_contraction(g).values()
        )
        euler = sum(
            (MultiPoly.variable(g.n_edges, i) * psi_t.partial(i)
             for i in range(g.n_edges)),
            MultiPoly(g.n_edges),
        )
        checks["euler_identity"] = euler == psi_t.scale(g.loop_number())
        eps = g.incidence_matrix()
        eta = g.circuit_matrix()
        checks["incidence_times_circuit_zero"] = all(
            sum(eps[v][e] * eta[e][k] for e in range(g.n_edges)) == 0
            for v in range(len(g.vertices))
            for k in range(g.loop_number())
        )
        from .graphs import matrix_tree_count

        checks["matrix_tree_count"] = len(g.spanning_trees()) == matrix_tree_count(g)
        mom = MomentumData.two_leg()
        try:
            checks["second_symanzik_routes_agree"] = second_symanzik(
                g, mom, "cutsets"
            ) == second_symanzik(g, mom, "trees")
        except Exception as exc:  # no valid two-leg configuration
            checks["second_symanzik_routes_agree"] = f"skipped ({exc})"
        report[name] = checks
        failures.extend(
            f"{name}:{k}" for k, v in checks.items() if v is False
        )
    doc = {
        "inputs": {"names": [g.name for g in targets]},
        "checks": report,
        "failures": failures,
    }
    _emit(doc, args)
    return 0 if not failures else 3


def _load_character(hopf, names, path, log_mu=0.0):
    from .hopf import mu_prefactored_character

    with open(path) as fh:
        spec = json.load(fh)
    gen_values = {}
    for gname, entry in spec["generators"].items():
        key = names.get(gname, gname)
        coeffs = {int(k): Fraction(v) for k, v in entry["coeffs"].items()}
        gen_values[key] = LaurentSeries(coeffs)
    missing = [k for k in hopf.generators if k not in gen_values]
    for k in missing:
        gen_values[k] = LaurentSeries({-1: 1})  # default simple pole
    rule = spec.get("mu_exponent_rule", "loops")
    if log_mu:
        exponent = (
            (lambda k: hopf.generators[k].loops)
            if rule == "loops"
            else (lambda k: hopf.generators[k].grade)
        )
        return (
            mu_prefactored_character(hopf, gen_values, exponent, Fraction(log_mu)),
            rule,
        )
    return Character(hopf, gen_values), rule


def _build_hopf(args):
    graphs = []
    digests = []
    for spec in args.graphs:
        g, digest = _load_graph(spec)
        graphs.append(g)
        digests.append(digest)
    rule = DivergencePredicate(args.dimension, graphs[0].theory_power)
    hopf, names = graph_hopf_algebra(graphs, rule)
    return hopf, names, digests


def cmd_hopf(args):
    hopf, names, digests = _build_hopf(args)
    doc = {"inputs": {"graphs": digests, "dimension": args.dimension}}
    if args.action == "coproduct":
        out = {}
        for name, key in names.items():
            terms = []
            for coeff, left, right in hopf.generators[key].reduced_coproduct:
                terms.append({
                    "coeff": str(coeff),
                    "left": [[hopf.generators[k].display, p] for k, p in left],
                    "right": [[hopf.generators[k].display, p] for k, p in right],
                })
            out[name] = {"grade": hopf.generators[key].grade, "reduced_terms": terms}
        doc["coproduct"] = out
    elif args.action == "antipode":
        out = {}
        for name, key in names.items():
            element = hopf.antipode_gen(key)
            out[name] = [
                {"coeff": str(c), "monomial": [[hopf.generators[k].display, p] for k, p in m]}
                for m, c in sorted(element.items())
            ]
        doc["antipode"] = out
    else:  # birkhoff
        phi, _ = _load_character(hopf, names, args.character)
        minus, plus = birkhoff_bphz(phi)
        doc["birkhoff"] = {
            hopf.generators[k].display: {
                "phi": repr(phi.gen_values[k]),
                "phi_minus": repr(minus.gen_values[k]),
                "phi_plus": repr(plus.gen_values[k]),
            }
            for k in hopf.keys_by_grade()
        }
    _emit(doc, args)
    return 0


def cmd_renorm(args):
    hopf, names, digests = _build_hopf(args)
    phi, _ = _load_character(hopf, names, args.character,
                             getattr(args, "log_mu", 0.0))
    minus, plus = birkhoff_bphz(phi)
    doc = {"inputs": {"graphs": digests}, "renormalized": {}}
    for key in hopf.keys_by_grade():
        val = plus.gen_values[key]
        doc["renormalized"][hopf.generators[key].display] = {
            "value_at_zero": str(val.eval_at_zero()),
            "counterterm": repr(minus.gen_values[key]),
        }
    _emit(doc, args)
    return 0


def cmd_connection(args):
    hopf, names, digests = _build_hopf(args)
    phi, _ = _load_character(hopf, names, args.character)
    a, b, residual = connection_data(phi)
    doc = {
        "inputs": {"graphs": digests},
        "a": {hopf.generators[k].display: repr(v) for k, v in a.gen_values.items()},
        "b": {hopf.generators[k].display: repr(v) for k, v in b.gen_values.items()},
        "flatness_residual": str(residual),
    }
    _emit(doc, args)
    return 0 if residual == 0 else 3


def cmd_slice(args):
    _default_seed(args)
    s = make_slice(args.n, args.k, args.seed)
    _emit({"slice": s.serialize()}, args)
    return 0


def _slice_from_args(args, ambient):
    _default_seed(args)
    if getattr(args, "slice", None):
        with open(args.slice) as fh:
            data = json.load(fh)
        return LinearSlice.from_normals(
            [[Fraction(x) for x in row] for row in data["normals"]],
            data["ambient"],
            data.get("seed"),
        )
    return make_slice(ambient, args.k, args.seed)


def cmd_milnor(args):
    g, digest = _load_graph(args.graph)
    s = _slice_from_args(args, g.n_edges)
    rep = milnor_report(g, s)
    _emit({"inputs": {"graph": digest}, "milnor": rep.to_json()}, args)
    return 0


def cmd_feynman_subspace(args):
    g, digest = _load_graph(args.graph)
    s = _slice_from_args(args, g.n_edges)
    res = feynman_subspace_dim(g, s, args.dims)
    doc = {"inputs": {"graph": digest}, "slice": s.serialize(), "subspace": {}}
    for d, r in res.items():
        doc["subspace"][str(d)] = {
            "dimension": r["rank"],
            "milnor_number": r["quotient_dim"],
            "certificates": [list(c) for c in r["tree_combos"]],
        }
    _emit(doc, args)
    return 0


def cmd_case_table(args):
    table = case_table_sliced if args.sliced else case_table_affine
    res = table(args.n, args.dimension, args.loops)
    _emit({"case_table": res.__dict__ | {"f_degree": res.f_degree(args.loops)}}, args)
    return 0


def cmd_dimreg(args):
    g, digest = _load_graph(args.graph)
    mom = _momentum(args, g)
    opts = IntegrateOpts(tolerance=args.tolerance, max_evals=args.max_evals)
    sr = dimreg_series(g, mom, args.dimension, args.log_mu, args.order, opts)
    doc = {
        "inputs": {"graph": digest, "tolerance": args.tolerance,
                   "max_evals": args.max_evals, "D": args.dimension},
        "series": sr.to_json(),
    }
    if args.emit_plot_data:
        with open(args.emit_plot_data, "w") as fh:
            fh.write("k,coefficient,err\n")
            for k, (c, err) in enumerate(zip(sr.coefficients, sr.errors)):
                fh.write(f"{k},{c},{err}\n")
    _emit(doc, args)
    return 0


def cmd_integrate(args):
    g, digest = _load_graph(args.graph)
    mom = _momentum(args, g)
    opts = IntegrateOpts(tolerance=args.tolerance, max_evals=args.max_evals,
                         method=args.method, seed=_default_seed(args))
    res, prefactor = feynman_U(g, mom, args.dimension, opts, args.allow_divergent)
    doc = {
        "inputs": {"graph": digest, "tolerance": args.tolerance,
                   "max_evals": args.max_evals, "D": args.dimension},
        "integral": res.to_json(),
        "prefactor": prefactor,
    }
    _emit(doc, args)
    return 0


def cmd_identity_check(args):
    g, digest = _load_graph(args.graph)
    mom = _momentum(args, g)
    opts = IntegrateOpts(tolerance=args.tolerance, max_evals=args.max_evals)
    rep = projective_identity_residual(g, mom, args.dimension, opts)
    doc = {"inputs": {"graph": digest, "D": args.dimension}, "identity": rep}
    _emit(doc, args)
    return 0 if rep["residual"] < args.residual_bound else 3


def _disk_toy():
    u1, u2 = MultiPoly.variables(2)
    return u1**2 + u2**2


def cmd_gl_mellin(args):
    f = _disk_toy()
    density = lambda p: np.ones(len(p))
    grid = np.geomspace(args.s_min, args.s_max, args.samples)
    sub = SublevelOpts(max_depth=args.depth)
    samples = gelfand_leray_J(f, density, [(-1.2, 1.2), (-1.2, 1.2)], grid, sub)
    fit = asymptotic_fit(samples, use_smallest=max(8, args.samples // 3))
    values, _ = mellin_transform(samples, args.z, tail=fit)
    doc = {
        "inputs": {"toy": "disk", "depth": args.depth},
        "samples": [{"s": s, "J": j, "err": e} for s, j, e in samples],
        "fit": fit.to_json(),
        "mellin": [{"z": z, "F": v} for z, v in values],
    }
    if args.emit_plot_data:
        with open(args.emit_plot_data, "w") as fh:
            fh.write("s,J,err\n")
            for s, j, e in samples:
                fh.write(f"{s},{j},{e}\n")
    _emit(doc, args)
    return 0


def cmd_leray(args):
    u1, u2 = MultiPoly.variables(2)
    f = MultiPoly.constant(2, 1) - u1**2 - u2**2
    if args.smooth_control:
        f = MultiPoly.constant(2, 4) - u1**2 - u2**2
    case = case_table_affine(2, 4, 1)  # low regime: f plays Psi, m = 2
    m = args.m if args.m is not None else case.m
    grid = np.geomspace(args.eps_min, args.eps_max, args.samples)
    samples, fit = leray_I_epsilon(
        f, MultiPoly.one(2), m, [(-1.2, 1.2), (-1.2, 1.2)], grid,
        sub_opts=SublevelOpts(max_depth=args.depth),
    )
    doc = {
        "inputs": {"m": m, "depth": args.depth, "case_m": case.m},
        "samples": [{"eps": e, "I": v, "err": er} for e, v, er in samples],
        "fit": fit,
    }
    if args.emit_plot_data:
        with open(args.emit_plot_data, "w") as fh:
            fh.write("eps,I,err\n")
            for e, v, er in samples:
                fh.write(f"{e},{v},{er}\n")
    _emit(doc, args)
    return 0


def cmd_zeta_log(args):
    g, digest = _load_graph(args.graph)
    mom = _momentum(args, g)
    p_eff, psi = v_function(g, mom)
    density = lambda p: np.ones(len(p))
    opts = IntegrateOpts(tolerance=args.tolerance)
    from math import factorial

    coeffs = log_zeta_coeffs(psi, density, args.n_max, opts)
    lam = [
        {"n": n, "value": iterated_log_integral(1.0, float(np.e), n, opts)[0],
         "expected": 1.0 / factorial(n)}
        for n in range(1, min(args.n_max, 3) + 1)
    ]
    doc = {
        "inputs": {"graph": digest},
        "zeta_coefficients": [
            {"n": n, "value": v, "err": e} for n, (v, e) in enumerate(coeffs)
        ],
        "iterated_log_checks": lam,
    }
    _emit(doc, args)
    return 0


def cmd_count_points(args):
    if args.graph:
        g, digest = _load_graph(args.graph)
        p = psi_polynomial(g, "det")
        source = {"graph": digest}
    else:
        with open(args.poly) as fh:
            p = MultiPoly.parse(fh.read())
        source = {"poly": _hash_file(args.poly)}
    counts = {}
    for q in args.q:
        affine = count_points(p, q, projective=False)
        entry = {"affine": affine, "naive_oracle": count_points_naive(p, q)}
        if args.projective:
            entry["projective"] = count_points(p, q, projective=True)
        counts[str(q)] = entry
    _emit({"inputs": source, "counts": counts}, args)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="feynpar")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument(
        "--threads", type=int, default=1,
        help="worker-pool size hint; results are deterministic regardless",
    )
    ap.add_argument(
        "--golden", default=None,
        help="golden-file regression: write on first run, compare afterwards",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        return p

    p = add("poly", cmd_poly, help="graph polynomials and generic condition")
    p.add_argument("graph")
    p.add_argument("--p2", default=None)
    p.add_argument("--gram", default=None)
    p.add_argument("--mass2", default=None)

    p = add("check", cmd_check, help="exact invariant suite over the corpus")
    p.add_argument("names", nargs="*", default=None)

    p = add("hopf", cmd_hopf, help="coproduct/antipode/birkhoff")
    p.add_argument("action", choices=["coproduct", "antipode", "birkhoff"])
    p.add_argument("--graphs", nargs="+", required=True)
    p.add_argument("--dimension", type=int, default=4)
    p.add_argument("--character", default=None)

    p = add("renorm", cmd_renorm, help="renormalized values and counterterms")
    p.add_argument("--graphs", nargs="+", required=True)
    p.add_argument("--dimension", type=int, default=4)
    p.add_argument("--character", required=True)
    p.add_argument("--log-mu", dest="log_mu", type=float, default=0.0)

    p = add("connection", cmd_connection, help="a(z), b(z), flatness residual")
    p.add_argument("--graphs", nargs="+", required=True)
    p.add_argument("--dimension", type=int, default=4)
    p.add_argument("--character", required=True)

    p = add("slice", cmd_slice, help="generate a rational linear slice")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)

    p = add("milnor", cmd_milnor, help="slice Psi and report Milnor data")
    p.add_argument("graph")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--slice", default=None)

    p = add("feynman-subspace", cmd_feynman_subspace, help="momentum span in the Milnor algebra")
    p.add_argument("graph")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--slice", default=None)
    p.add_argument("--dims", type=int, nargs="+", required=True)

    p = add("case-table", cmd_case_table, help="projective case tables")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dimension", type=int, required=True)
    p.add_argument("--loops", type=int, required=True)
    p.add_argument("--sliced", action="store_true")

    p = add("dimreg", cmd_dimreg, help="DimReg series coefficients")
    p.add_argument("graph")
    p.add_argument("--dimension", type=int, required=True)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--p2", default=None)
    p.add_argument("--gram", default=None)
    p.add_argument("--mass2", default=None)
    p.add_argument("--log-mu", dest="log_mu", type=float, default=0.0)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--max-evals", type=int, default=4_000_000)
    p.add_argument("--emit-plot-data", default=None)

    p = add("integrate", cmd_integrate, help="parametric Feynman integral")
    p.add_argument("graph")
    p.add_argument("--dimension", type=int, required=True)
    p.add_argument("--p2", default=None)
    p.add_argument("--gram", default=None)
    p.add_argument("--mass2", default=None)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--max-evals", type=int, default=4_000_000)
    p.add_argument("--method", choices=["adaptive", "monte-carlo"], default="adaptive")
    p.add_argument("--allow-divergent", action="store_true")

    p = add("identity-check", cmd_identity_check, help="projective identity residual")
    p.add_argument("graph")
    p.add_argument("--dimension", type=int, required=True)
    p.add_argument("--p2", default="1")
    p.add_argument("--gram", default=None)
    p.add_argument("--mass2", default=None)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--max-evals", type=int, default=2_000_000)
    p.add_argument("--residual-bound", type=float, default=1e-4)

    p = add("gl-mellin", cmd_gl_mellin, help="Gelfand-Leray samples and Mellin transform")
    p.add_argument("--s-min", type=float, default=0.05)
    p.add_argument("--s-max", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--depth", type=int, default=18)
    p.add_argument("--z", type=float, nargs="+", default=[0.0, 0.5, 1.0, 2.0])
    p.add_argument("--emit-plot-data", default=None)

    p = add("leray", cmd_leray, help="Leray epsilon-regularization samples")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--eps-min", type=float, default=0.02)
    p.add_argument("--eps-max", type=float, default=0.12)
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--depth", type=int, default=19)
    p.add_argument("--smooth-control", action="store_true")
    p.add_argument("--emit-plot-data", default=None)

    p = add("zeta-log", cmd_zeta_log, help="log-moment zeta coefficients")
    p.add_argument("graph")
    p.add_argument("--n-max", type=int, default=2)
    p.add_argument("--p2", default="1")
    p.add_argument("--gram", default=None)
    p.add_argument("--mass2", default=None)
    p.add_argument("--tolerance", type=float, default=1e-8)

    p = add("count-points", cmd_count_points, help="finite-field point counts")
    p.add_argument("graph", nargs="?", default=None)
    p.add_argument("--poly", default=None)
    p.add_argument("--q", type=int, nargs="+", required=True)
    p.add_argument("--projective", action="store_true")

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except DivergentConfiguration as exc:
        print(f"divergent configuration: {exc}", file=sys.stderr)
        return 4
    except (ToleranceNotReached, FitUnstable, GoldenMismatch) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except (MalformedGraph, json.JSONDecodeError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
