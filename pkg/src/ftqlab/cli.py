"""ftqlab command line: build and verify codes, run decoders and
distillation Monte Carlo, compile circuits, evaluate enumerator bounds.

Outputs are CSV (versioned header comment) or JSON with sorted keys;
identical configuration and seed give byte-identical output.  Figures
render only when --plot is passed; the delimited output stays the
contract.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

import numpy as np

USAGE_EXIT = 2
VERIFY_FAIL_EXIT = 1
CSV_HEADER = "# ftqlab-csv v1"


def _seed_from(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("FTQLAB_SEED")
    if env is not None:
        return int(env)
    raise SystemExit("a --seed is required for stochastic subcommands "
                     "(or set FTQLAB_SEED)")


def _resolve_output(args):
    """--out takes either a literal format name (csv|json) or a path."""
    fmt = args.format
    path = args.out
    if path in ("csv", "json"):
        fmt, path = path, None
    return fmt, path


def _emit(args, rows, header_fields, json_payload=None):
    fmt, path = _resolve_output(args)
    out = io.StringIO()
    if fmt == "csv":
        print(CSV_HEADER, file=out)
        print(",".join(header_fields), file=out)
        for row in rows:
            print(",".join(str(v) for v in row), file=out)
    else:
        payload = json_payload if json_payload is not None else [
            dict(zip(header_fields, row)) for row in rows
        ]
        json.dump(payload, out, sort_keys=True, indent=2)
        out.write("\n")
    text = out.getvalue()
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_pqrs(args):
    from .pqrs import (build_pqrs, standard_instance, interpolation_identities,
                       logical_ccz_phase, random_c2perp_element, magic_multilevel)
    from . import lin

    if args.action in ("build", "verify") and args.q is None:
        raise SystemExit("pqrs build/verify need --q")
    if args.action == "build":
        code = standard_instance(args.q) if args.k is None else build_pqrs(
            args.q, args.k, args.m, args.s)
        payload = {
            "q": code.q, "n": code.n, "k_logical": code.css.k,
            "k": code.k, "m": code.m, "s": code.s, "d_bound": code.d_bound,
            "A": code.A, "B": code.B,
        }
        _emit(args, [list(payload.values())], list(payload.keys()), payload)
        return 0
    if args.action == "verify":
        code = build_pqrs(args.q, args.k, args.m, args.s)
        rep = interpolation_identities(code)
        star = lin.star_square_subset(code.c1, code.c2)
        rng = np.random.default_rng(_seed_from(args))
        ccz_ok = True
        for _ in range(args.trials or 100):
            msgs = [rng.integers(0, code.q, size=code.k).astype(np.uint8) for _ in range(3)]
            shifts = [random_c2perp_element(code, rng) for _ in range(3)]
            mb, cb = logical_ccz_phase(code, *msgs, shifts=shifts)
            ccz_ok &= mb == cb
        payload = {
            "triple_identity": rep.triple_identity,
            "systematic": rep.systematic,
            "product_identity": rep.product_identity,
            "c2_equals_dual": code.verify_compute_c2(),
            "star_square_in_c2": star,
            "logical_ccz_phase": ccz_ok,
        }
        _emit(args, [list(payload.values())], list(payload.keys()), payload)
        return 0 if all(payload.values()) else VERIFY_FAIL_EXIT
    if args.action == "distill":
        seed = _seed_from(args)
        res = magic_multilevel(args.levels, args.eps, args.trials, seed=seed)
        rows = [[res.levels, res.trials, res.eps_in, res.failures,
                 res.outputs_per_trial, f"{res.failure_frequency:.8f}",
                 str(res.yield_fraction)]]
        _emit(args, rows, ["levels", "trials", "eps_in", "failures",
                           "outputs_per_trial", "failure_frequency", "yield"])
        if args.plot:
            from .plots import plot_failure_rate
            plot_failure_rate(args.plot, f"magic distillation l={res.levels}",
                              [f"l={res.levels}"], [res.failure_frequency])
        return 0
    raise SystemExit(f"unknown pqrs action {args.action!r}")


def cmd_hamming(args):
    from .hamming_distill import DistillInstance, multilevel_mc, schedule_rate

    seed = _seed_from(args)
    inst = DistillInstance.named(args.psi)
    res = multilevel_mc(args.levels, inst, args.eps, args.trials, seed=seed,
                        jobs=max(args.jobs, 1))
    rate = schedule_rate(args.levels)
    rows = [[args.r, res.levels, res.trials, res.eps_in, res.failures,
             res.outputs_per_trial, f"{res.failure_frequency:.8f}",
             f"{res.wilson99_upper:.8f}", f"{res.bound:.8f}", str(rate)]]
    _emit(args, rows, ["r", "levels", "trials", "eps_in", "failures",
                       "outputs_per_trial", "failure_frequency",
                       "wilson99_upper", "bound", "schedule_rate"])
    if args.plot:
        from .plots import plot_failure_rate
        plot_failure_rate(args.plot, f"stabilizer distillation psi={args.psi}",
                          [f"l={res.levels}"], [res.failure_frequency],
                          bounds=[min(res.bound, 1.0)],
                          upper_intervals=[res.wilson99_upper])
    return 0


def _cubical_instance(args):
    from .cubical.complex import CubicalComplex
    from .cubical.sheaf import SheafComplex

    shifts = [int(s) for s in args.shifts.split(",")]
    h = np.array(json.loads(args.h), dtype=np.uint8)
    X = CubicalComplex.cyclic_shifts(args.N, [shifts, shifts])
    return SheafComplex(X, [h, h])


def cmd_cubical(args):
    from . import lin
    from .cubical.decoders import (z_decode_seq, z_decode_par, x_decode,
                                   coboundary_equivalent, boundary_equivalent)
    from .cubical.experiments import single_shot_experiment
    from .cubical.sheaf import css_from_sheaf

    sheaf = _cubical_instance(args)
    k = args.level
    if args.action == "build":
        code = css_from_sheaf(sheaf, k)
        payload = {
            "N": sheaf.X.N, "t": sheaf.X.t, "n": sheaf.X.n,
            "dims": [sheaf.dim(i) for i in range(sheaf.X.t + 1)],
            "dim_formula": [sheaf.dim_formula(i) for i in range(sheaf.X.t + 1)],
            "face_counts": [len(sheaf.X.faces(i)) for i in range(sheaf.X.t + 1)],
            "dd_zero": sheaf.verify_dd_zero(),
            "css_n": code.n, "css_k": code.k, "delta": code.delta,
        }
        _emit(args, [list(payload.values())], list(payload.keys()), payload)
        return 0 if payload["dd_zero"] else VERIFY_FAIL_EXIT
    if args.action == "export":
        payload = sheaf.to_json()
        _emit(args, [[json.dumps(payload)]], ["sheaf_json"], payload)
        return 0
    if args.action == "decode":
        import time as _time

        seed = _seed_from(args)
        rng = np.random.default_rng(seed)
        rows = []
        fails = 0
        for trial in range(args.trials):
            e = np.zeros(sheaf.dim(k), dtype=np.uint8)
            w = args.weight if args.weight else int(rng.integers(1, 4))
            e[rng.choice(sheaf.dim(k), size=w, replace=False)] = 1
            m_weight = 0  # measurement noise belongs to the single-shot action
            t0 = _time.perf_counter()
            if args.decoder == "z-seq":
                run = z_decode_seq(sheaf, k, lin.matvec(sheaf.delta_matrix(k), e))
                ok = run.cleared and coboundary_equivalent(sheaf, k, run.correction, e)
                residual = sheaf.block_weight(run.syndrome_final, k + 1)
                rounds = run.iterations
            elif args.decoder == "z-par":
                run = z_decode_par(sheaf, k, lin.matvec(sheaf.delta_matrix(k), e),
                                   rounds=args.rounds)
                ok = run.cleared and coboundary_equivalent(sheaf, k, run.correction, e)
                residual = sheaf.block_weight(run.syndrome_final, k + 1)
                rounds = len(run.syndrome_weights) - 1
            else:
                run = x_decode(sheaf, k, lin.matvec(sheaf.partial_matrix(k), e),
                               mode="par" if args.decoder == "x-par" else "seq",
                               rounds=args.rounds)
                ok = run.syndrome_matched and boundary_equivalent(sheaf, k, run.correction, e)
                residual = 0 if run.syndrome_matched else -1
                rounds = run.stopped_at
            wall = _time.perf_counter() - t0
            fails += not ok
            row = [trial, w, m_weight, int(ok), residual, rounds]
            if args.timing:
                row.append(f"{wall:.4f}")
            rows.append(row)
        header = ["trial", "e_weight", "m_weight", "recovered", "residual", "rounds"]
        if args.timing:
            header.append("wall_time")  # opt-in: breaks byte-identical replay
        _emit(args, rows, header)
        return 0 if fails == 0 else VERIFY_FAIL_EXIT
    if args.action == "single-shot":
        seed = _seed_from(args)
        rep = single_shot_experiment(sheaf, k, args.p_data, args.p_meas, args.trials,
                                     decoder=args.decoder, seed=seed,
                                     meas_weight=args.meas_weight)
        rows = [[r.trial, r.data_weight, r.meas_weight, r.residual_bound,
                 int(r.residual_exact), r.followup_zero] for r in rep.trials]
        _emit(args, rows, ["trial", "data_weight", "meas_weight",
                           "residual_bound", "residual_exact", "followup_zero"])
        if args.plot:
            from .plots import plot_trial_scatter
            plot_trial_scatter(args.plot, "single-shot residuals",
                               [r.meas_weight for r in rep.trials],
                               [r.residual_bound for r in rep.trials],
                               "|m|", "residual reduced weight (bound)",
                               fit_slope=rep.gamma_hat)
        return 0
    raise SystemExit(f"unknown cubical action {args.action!r}")


def cmd_compile(args):
    from .compiler import (compile_circuit, verify_equivalence_tableau,
                           verify_equivalence_statevector)
    from .pauli import Circuit

    text = open(args.circuit).read() if args.circuit else sys.stdin.read()
    circ = Circuit.from_text(text)
    layers = [[(op.name, op.qubits) for op in layer] for layer in circ.layers]
    W = circ.n
    comp = compile_circuit(layers, W, args.k)
    rep = comp.report()
    if args.verify:
        names = {name for layer in layers for (name, _) in layer}
        if "CCZ" in names:
            rep["fidelity"] = verify_equivalence_statevector(layers, comp,
                                                             seed=_seed_from(args))
            rep["equivalent"] = rep["fidelity"] >= 1 - 1e-10
        else:
            rep["equivalent"] = verify_equivalence_tableau(
                layers, comp, trials=args.trials, seed=_seed_from(args))
    _emit(args, [list(rep.values())], list(rep.keys()), rep)
    if args.plot:
        from .plots import plot_depth_report
        plot_depth_report(args.plot, "compiled op histogram", rep["ops"])
    return 0 if rep.get("equivalent", True) else VERIFY_FAIL_EXIT


def cmd_wenum(args):
    from .wenum import BadSetFamily, mc_avoidance_bound, recursion_bound, subsets_of_size

    if args.action == "eval":
        fam = BadSetFamily.from_json(json.loads(args.family)) if args.family else \
            subsets_of_size(args.n, args.d)
        coeffs = fam.enumerator().to_coeff_list()
        payload = {"universe": fam.size, "members": len(fam),
                   "coefficients": coeffs,
                   "value_at_c": float(fam.enumerator()(args.c))}
        _emit(args, [list(payload.values())], list(payload.keys()), payload)
        return 0
    if args.action == "mc":
        fam = BadSetFamily.from_json(json.loads(args.family)) if args.family else \
            subsets_of_size(args.n, args.d)
        seed = _seed_from(args)
        freq, bound, se = mc_avoidance_bound(fam, args.c, args.trials, seed)
        ok = freq <= bound + 3 * se
        rows = [[args.trials, args.c, f"{freq:.8f}", f"{bound:.8f}",
                 f"{se:.8f}", int(ok)]]
        _emit(args, rows, ["trials", "p", "empirical", "bound", "stderr", "within_bound"])
        return 0 if ok else VERIFY_FAIL_EXIT
    if args.action == "recursion":
        rep = recursion_bound(lambda i: args.f_const, lambda i: args.g_const,
                              args.levels, args.c)
        payload = {"value": rep.value, "exponent": rep.exponent, "beta": rep.beta,
                   "cap": rep.cap, "cap_holds": rep.cap_holds,
                   "series_converged": rep.series_converged}
        _emit(args, [list(payload.values())], list(payload.keys()), payload)
        return 0
    raise SystemExit(f"unknown wenum action {args.action!r}")


def cmd_css(args):
    from .css import CssCode, build_syndrome_circuit, canonical_logicals

    obj = json.loads(open(args.code).read() if os.path.exists(args.code) else args.code)
    code = CssCode.from_json(obj)
    canon = canonical_logicals(code)
    payload = {"n": code.n, "k": code.k, "delta": code.delta,
               "logical_x": [[int(v) for v in l.x_part] for l in canon.logical_x],
               "logical_z": [[int(v) for v in l.z_part] for l in canon.logical_z]}
    if args.syndrome_circuit:
        sc = build_syndrome_circuit(code)
        payload["entangling_depth"] = sc.entangling_depth()
        payload["colors_x"] = 1 + max(sc.coloring_x.values()) if sc.coloring_x else 0
        payload["colors_z"] = 1 + max(sc.coloring_z.values()) if sc.coloring_z else 0
        if args.out_circuit:
            with open(args.out_circuit, "w") as fh:
                fh.write(sc.circuit.to_text())
    _emit(args, [list(payload.values())], list(payload.keys()), payload)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out", help="output path, or a literal 'csv'/'json' "
                                      "to pick the format")
    common.add_argument("--plot", help="also render a figure to this path")
    common.add_argument("--jobs", type=int,
                        help="parallel trial workers (aggregation stays ordered)")
    p = argparse.ArgumentParser(prog="ftqlab", parents=[common],
                                description="desk-scale fault-tolerance laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    q = add_parser("pqrs", help="punctured quantum Reed-Solomon codes")
    q.add_argument("action", choices=("build", "verify", "distill"))
    q.add_argument("--q", type=int, help="field size (build/verify; distill "
                                         "derives level sizes from the schedule)")
    q.add_argument("--k", type=int)
    q.add_argument("--m", type=int)
    q.add_argument("--s", type=int)
    q.add_argument("--levels", type=int, default=1)
    q.add_argument("--eps", type=float, default=0.01)
    q.add_argument("--trials", type=int, default=1000)
    q.add_argument("--seed", type=int)
    q.set_defaults(func=cmd_pqrs)

    hd = add_parser("hamming-distill", help="stabilizer state distillation")
    hd.add_argument("--r", type=int, default=4)
    hd.add_argument("--levels", type=int, default=1)
    hd.add_argument("--psi", choices=("zero", "plus", "y", "bell"), default="zero")
    hd.add_argument("--eps", type=float, default=0.01)
    hd.add_argument("--trials", type=int, default=10000)
    hd.add_argument("--seed", type=int)
    hd.set_defaults(func=cmd_hamming)

    cu = add_parser("cubical", help="sheaf codes and single-shot decoders")
    cu.add_argument("action", choices=("build", "export", "decode", "single-shot"))
    cu.add_argument("--N", type=int, default=5)
    cu.add_argument("--shifts", default="1,2,3,4")
    cu.add_argument("--h", default="[[1,0,1,1],[0,1,1,0]]")
    cu.add_argument("--level", type=int, default=1)
    cu.add_argument("--decoder", choices=("z-seq", "z-par", "x-seq", "x-par"),
                    default="z-seq")
    cu.add_argument("--rounds", type=int, default=30)
    cu.add_argument("--weight", type=int, default=0)
    cu.add_argument("--p-data", type=float, default=0.0)
    cu.add_argument("--p-meas", type=float, default=0.01)
    cu.add_argument("--meas-weight", type=int, default=0,
                    help="inject exactly this many syndrome flips instead of iid noise")
    cu.add_argument("--timing", action="store_true",
                    help="append a wall-time column (not byte-reproducible)")
    cu.add_argument("--trials", type=int, default=100)
    cu.add_argument("--seed", type=int)
    cu.set_defaults(func=cmd_cubical)

    co = add_parser("compile", help="compile circuits to the primitive set")
    co.add_argument("--circuit", help="circuit text file (stdin when absent)")
    co.add_argument("--k", type=int, default=16)
    co.add_argument("--verify", action="store_true")
    co.add_argument("--trials", type=int, default=10)
    co.add_argument("--seed", type=int)
    co.set_defaults(func=cmd_compile)

    we = add_parser("wenum", help="weight enumerator algebra")
    we.add_argument("action", choices=("eval", "mc", "recursion"))
    we.add_argument("--family", help="JSON family {size, members}")
    we.add_argument("--n", type=int, default=8)
    we.add_argument("--d", type=int, default=2)
    we.add_argument("--c", type=float, default=0.01,
                    help="evaluation point (threshold fraction)")
    we.add_argument("--trials", type=int, default=10000)
    we.add_argument("--levels", type=int, default=3)
    we.add_argument("--f-const", type=float, default=1.0)
    we.add_argument("--g-const", type=int, default=2)
    we.add_argument("--seed", type=int)
    we.set_defaults(func=cmd_wenum)

    cs = add_parser("css", help="CSS code inspection")
    cs.add_argument("code", help="JSON file or literal {field_l, hx, hz}")
    cs.add_argument("--syndrome-circuit", action="store_true")
    cs.add_argument("--out-circuit", help="write the circuit text here")
    cs.set_defaults(func=cmd_css)
    return p


COMMON_DEFAULTS = {"format": "csv", "out": None, "plot": None, "jobs": 1}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        # argparse exits 2 on usage errors already
        raise
    for key, val in COMMON_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, val)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except Exception as ex:  # verification machinery raises typed errors
        print(f"error: {ex}", file=sys.stderr)
        return VERIFY_FAIL_EXIT


if __name__ == "__main__":
    sys.exit(main())
