"""lo-lab: command line front end.

Exit status: 0 when every check passes, 2 when a checked inequality or
certificate condition fails, 3 when an enumeration budget is exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from fractions import Fraction

from lolab import __version__, config
from lolab import io as lio

EXIT_OK = 0
EXIT_FAIL = 2
EXIT_BUDGET = 3


class _Out:
    def __init__(self, fmt: str, stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout

    def emit(self, payload, rows=None):
        """JSON payload, or CSV of ``rows`` (list of dicts) when --format csv."""
        if self.fmt == "csv":
            if rows is None:
                rows = [{"key": k, "value": _flat(v)} for k, v in lio.to_jsonable(payload).items()]
            self.stream.write(_csv(rows))
        else:
            self.stream.write(lio.dumps(payload) + "\n")


def _flat(v):
    if isinstance(v, (list, dict)):
        return lio.json.dumps(v)
    return v


def _csv(rows) -> str:
    rows = [lio.to_jsonable(r) for r in rows]
    cols: list = []
    for r in rows:
        for c in r:
            if c not in cols:
                cols.append(c)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: _flat(r.get(c, "")) for c in cols})
    return buf.getvalue()


def _ints(text: str) -> list:
    return [int(x) for x in text.split(",") if x.strip()]


def _blocks(text: str) -> list:
    """"0,1;2,3" -> [[0, 1], [2, 3]]."""
    return [_ints(b) for b in text.split(";")]


def _vector(text: str) -> tuple:
    return tuple(lio.parse_scalar(x.strip()) for x in text.split(","))


def _rational(text: str):
    return Fraction(text)


# subcommands --------------------------------------------------------------------


def cmd_rho(args, out, budget):
    from lolab.anticoncentration import (
        FinitePointSet,
        SubspaceSet,
        rho_finite,
        rho_subspace,
        rho_translate_lower_bound,
        sum_distribution,
    )

    A = lio.sequence_from_json(args.sequence)
    if args.distribution:
        D = sum_distribution(A, budget, args.threads)
        if out.fmt == "csv":
            out.stream.write(D.to_csv())
        else:
            out.emit(D.as_dict())
        return EXIT_OK
    if args.set is None:
        D = sum_distribution(A, budget, args.threads)
        m = D.max_count()
        argmax = next(p for p, c in D.items() if c == m)
        out.emit({"rho": Fraction(m, D.denominator), "point": list(argmax), "support": len(D)})
        return EXIT_OK
    S = lio.set_from_json(args.set, A.k)
    if isinstance(S, FinitePointSet):
        res = rho_finite(A, S, budget)
        out.emit({"rho": res.probability, "shift": list(res.shift), "exact": True})
    elif isinstance(S, SubspaceSet):
        out.emit({"rho": rho_subspace(A, S.basis, budget), "exact": True})
    else:
        witness = [_vector(w) for w in args.witness] if args.witness else None
        res = rho_translate_lower_bound(A, S, candidates=None, witness=witness, budget=budget)
        out.emit({"rho_lower_bound": res.probability, "shift": list(res.shift), "exact": False})
    return EXIT_OK


def cmd_prob(args, out, budget):
    from lolab.anticoncentration import monte_carlo_prob, prob_in_set

    A = lio.sequence_from_json(args.sequence)
    S = lio.set_from_json(args.set, A.k)
    shift = _vector(args.shift) if args.shift else None
    if args.mc:
        from lolab.anticoncentration import TranslatedSet

        target = S if shift is None else TranslatedSet(S, shift)
        est = monte_carlo_prob(A, target, args.mc, seed=args.seed)
        out.emit({"estimate": est.estimate, "low": est.low, "high": est.high, "trials": est.trials,
                  "hits": est.hits, "seed": args.seed})
        return EXIT_OK
    p = prob_in_set(A, S, shift=shift, budget=budget)
    out.emit({"probability": p, "shift": None if shift is None else list(shift)})
    return EXIT_OK


def cmd_pack(args, out, budget):
    from lolab.matroid import basis_packing_number, drop_to_subspace, verify_packing

    A = lio.sequence_from_json(args.sequence)
    if args.drop is not None:
        res = drop_to_subspace(A, args.drop)
        out.emit({"basis": [list(v) for v in res.basis], "indices": list(res.indices),
                  "packing": res.packing, "steps": res.steps,
                  "guarantee": A.n - Fraction((args.drop - 1) * A.k * (A.k + 1), 2)})
        return EXIT_OK
    P = basis_packing_number(A)
    ok = verify_packing(A, P)
    out.emit({"b": P.b, "bases": [list(I) for I in P.index_sets], "verified": ok},
             rows=[{"basis": j, "indices": list(I)} for j, I in enumerate(P.index_sets)])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_gap(args, out, budget):
    from lolab.gap import (
        coverage_check,
        empirical_containment,
        gap_contains,
        gap_coordinates,
        hoeffding_tail_bound,
        is_proper,
    )

    Q = lio.gap_from_json(args.gap)
    result = {"rank": Q.rank, "volume": Q.volume}
    chk = is_proper(Q, budget)
    result["proper"] = chk.proper
    result["witness"] = None if chk.witness is None else [list(w) for w in chk.witness]
    if args.contains:
        c = gap_contains(Q, _vector(args.contains), budget)
        result["coefficients"] = None if c is None else list(c)
    if args.coords:
        A = lio.sequence_from_json(args.coords)
        result["coordinates"] = [list(c) for c in gap_coordinates(A, Q, budget=budget)]
    if args.coverage:
        A = lio.sequence_from_json(args.coverage)
        rep = coverage_check(A, Q, budget)
        result["outside"] = rep.outside
        result["outside_indices"] = list(rep.outside_indices)
    if args.hoeffding:
        A = lio.sequence_from_json(args.hoeffding)
        ints = [[int(x.re) for x in v] for v in A.vectors]
        rep = empirical_containment(ints, Q.radii, args.t, args.trials, seed=args.seed)
        result["escape_frequency"] = rep.frequency
        result["bound"] = hoeffding_tail_bound(len(ints), Q.rank, args.t)
        result["within_bound"] = rep.within_bound()
        if not rep.within_bound():
            out.emit(result)
            return EXIT_FAIL
    out.emit(result)
    return EXIT_OK


def cmd_poly(args, out, budget):
    from lolab.algebra import (
        expand_chow,
        galois_pair_variety,
        invariance_subspace,
        quadric_reducibility,
        reduction_to_vectors,
        robust_dependence_check,
    )

    obj = lio.load_json(args.polynomial)
    result: dict = {}
    if "forms" in obj or "products" in obj:
        R = lio.chow_from_json(obj)
        F = expand_chow(R, budget)
        A, S = reduction_to_vectors(R)
        result["expanded"] = lio.polynomial_to_json(F)
        result["vectors"] = lio.sequence_to_json(A)
        result["variety"] = lio.variety_to_json(S)
    else:
        F = lio.polynomial_from_json(obj)
        result["polynomial"] = str(F)
        result["degree"] = F.degree()
    if args.robust is not None:
        r = robust_dependence_check(F, args.robust, budget)
        result["robust"] = r.robust
        result["robust_witness"] = None if r.witness is None else r.witness
    if args.quadric:
        result["quadric"] = quadric_reducibility(F)
    if args.invariance:
        result["invariance_basis"] = [list(v) for v in invariance_subspace(F)]
    if args.galois:
        result["galois_pair"] = lio.variety_to_json(galois_pair_variety(F))
    if args.lines:
        from lolab.decoupling import lines_in_plane_curve

        ls = lines_in_plane_curve(F)
        result["lines"] = [str(g) for g in ls.lines]
        result["lines_complete"] = ls.complete
    out.emit(result)
    return EXIT_OK


def _load_counting_set(path):
    obj = lio.load_json(path)
    return lio.set_from_json(obj)


def cmd_count(args, out, budget):
    from lolab.lattice import count_lattice_points, schwartz_zippel_check, slicing_identity_check

    S = _load_counting_set(args.variety)
    rows = []
    status = EXIT_OK
    for B in args.B:
        rep = count_lattice_points(S, B, strategy=args.strategy, workers=args.threads, budget=budget)
        row = {"B": B, "count": rep.count, "strategy": rep.strategy}
        if args.schwartz_zippel:
            sz = schwartz_zippel_check(S, B, budget)
            row["schwartz_zippel"] = sz.passed
            row["sz_bound"] = sz.rhs
            if not sz.passed:
                status = EXIT_FAIL
        if args.slice:
            sl = slicing_identity_check(S, B, args.slice, budget)
            row["slicing"] = sl.passed
            if not sl.passed:
                status = EXIT_FAIL
        rows.append(row)
    out.emit({"rows": rows}, rows=rows)
    return status


def cmd_density(args, out, budget):
    from lolab.lattice import density_lower_bound

    S = _load_counting_set(args.variety)
    rows = []
    for B in args.B:
        d, rep = density_lower_bound(S, B, translate_radius=args.translates, budget=budget)
        rows.append({"B": B, "density": d, "count": rep.count, "map": rep.map})
    out.emit({"rows": rows}, rows=rows)
    return EXIT_OK


def cmd_hull(args, out, budget):
    from lolab.lattice import exponent_fit, hull_vertices_ball

    rows = [{"B": B, "count": hull_vertices_ball(args.k, B, boundary=args.boundary, budget=budget)} for B in args.B]
    payload: dict = {"k": args.k, "rows": rows}
    if len(rows) >= 3:
        fit = exponent_fit([(r["B"], r["count"]) for r in rows])
        payload.update(slope=fit.slope, residual=fit.residual)
    out.emit(payload, rows=rows)
    return EXIT_OK


def cmd_decouple(args, out, budget):
    from lolab.decoupling import Partition, decoupling_check, iterated_decoupling_bound

    A = lio.sequence_from_json(args.sequence)
    S = lio.set_from_json(args.set, A.k)
    if args.blocks:
        cands = []
        for c in args.candidate or ():
            cands.append([_vector(v) for v in c.split(";")])
        translates = [_vector(t) for t in args.translate] if args.translate else None
        witness = [_vector(w) for w in args.witness] if args.witness else None
        res = iterated_decoupling_bound(A, Partition(_blocks(args.blocks)), S, candidates=cands,
                                        translates=translates, witness=witness, budget=budget)
        out.emit({"lhs": res.lhs, "rhs": res.rhs, "rhs_base": res.rhs_base, "factor": res.factor,
                  "ell": res.ell, "status": res.status, "passed": res.passed, "shift": list(res.shift)})
        return EXIT_OK if res.passed else EXIT_FAIL
    I0 = _ints(args.I0 or "")
    shift = _vector(args.shift) if args.shift else None
    res = decoupling_check(A, I0, S, shift, budget)
    out.emit({"lhs": res.lhs, "rhs": res.rhs, "probability": res.probability, "passed": res.passed})
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_certify(args, out, budget):
    from lolab.decoupling import structure_certificate_check

    A = lio.sequence_from_json(args.sequence)
    cert = lio.certificate_from_json(args.certificate)
    S = lio.variety_from_json(args.variety)
    rep = structure_certificate_check(A, cert, S, budget)
    rows = [{"condition": k, "passed": c.passed, "lhs": c.lhs, "rhs": c.rhs, "note": c.note}
            for k, c in rep.conditions.items()]
    out.emit({"passed": rep.passed, "conditions": rows}, rows=rows)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_halasz(args, out, budget):
    from lolab.decoupling import halasz_check

    A = lio.sequence_from_json(args.sequence)
    res = halasz_check(A, _blocks(args.blocks), budget, args.threads)
    out.emit({"t": res.t, "base": res.base, "bound": res.bound, "rho": res.rho, "passed": res.passed})
    return EXIT_OK if res.passed else EXIT_FAIL


def _param(text: str):
    key, _, val = text.partition("=")
    if not _:
        raise argparse.ArgumentTypeError("parameters look like name=value")
    for conv in (int, Fraction):
        try:
            v = conv(val)
            return key, v
        except ValueError:
            pass
    if "," in val:
        return key, tuple(int(x) for x in val.split(","))
    return key, val


def cmd_experiment(args, out, budget):
    from lolab.harness import ExperimentSpec, run_experiment

    params = dict(args.param or ())
    res = run_experiment(ExperimentSpec(args.name, params, args.seed, budget, args.threads))
    if out.fmt == "csv":
        out.stream.write(res.to_csv())
    else:
        out.stream.write(res.to_json() + "\n")
    return EXIT_FAIL if res.passed is False else EXIT_OK


def cmd_scan(args, out, budget):
    from lolab.harness import theorem_scan

    grid = _ints(args.grid) if args.grid else None
    res = theorem_scan(args.theorem, grid, seed=args.seed, budget=budget if args.budget else None,
                       workers=args.threads, tolerance=args.tolerance)
    if out.fmt == "csv":
        out.stream.write(res.to_csv())
    else:
        out.stream.write(res.to_json() + "\n")
    return EXIT_FAIL if res.passed is False else EXIT_OK


# parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def common(suppress: bool):
        # flags are accepted before or after the subcommand; the copy on the
        # subparsers must not overwrite values given before it
        c = argparse.ArgumentParser(add_help=False)
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        c.add_argument("--seed", type=int, default=d(0), help="RNG seed for sampled quantities")
        c.add_argument("--budget", type=float, default=d(None),
                       help="multiply every enumeration budget by this factor")
        c.add_argument("--threads", type=int, default=d(1), help="worker processes for exact enumeration")
        c.add_argument("--format", choices=("json", "csv"), default=d("json"))
        return c

    p = argparse.ArgumentParser(prog="lo-lab", description="Exact Littlewood-Offord computations.",
                                parents=[common(False)])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, parents=[common(True)])
        sp.set_defaults(func=fn)
        return sp

    sp = add("rho", cmd_rho, "maximum point probability, or rho(A, S)")
    sp.add_argument("sequence")
    sp.add_argument("--set", help="membership set JSON (finite, subspace or variety)")
    sp.add_argument("--witness", action="append", help="point of S used to generate shifts (varieties)")
    sp.add_argument("--distribution", action="store_true", help="print the full law of X")

    sp = add("prob", cmd_prob, "P[X in S + shift]")
    sp.add_argument("sequence")
    sp.add_argument("set")
    sp.add_argument("--shift")
    sp.add_argument("--mc", type=int, help="Monte Carlo with this many trials instead of exact")

    sp = add("pack", cmd_pack, "basis packing number with witnesses")
    sp.add_argument("sequence")
    sp.add_argument("--drop", type=int, help="drop to a subspace with packing at least this")

    sp = add("gap", cmd_gap, "properness, membership and coordinates for a symmetric GAP")
    sp.add_argument("gap")
    sp.add_argument("--contains")
    sp.add_argument("--coords", help="sequence JSON to express in GAP coordinates")
    sp.add_argument("--coverage", help="sequence JSON to test for coverage")
    sp.add_argument("--hoeffding", help="integer sequence JSON inside the box")
    sp.add_argument("--t", type=float, default=2.0)
    sp.add_argument("--trials", type=int, default=10000)

    sp = add("poly", cmd_poly, "polynomial / Chow representation tools")
    sp.add_argument("polynomial")
    sp.add_argument("--robust", type=int)
    sp.add_argument("--quadric", action="store_true")
    sp.add_argument("--invariance", action="store_true")
    sp.add_argument("--galois", action="store_true")
    sp.add_argument("--lines", action="store_true")

    sp = add("count", cmd_count, "integer points N_S(B)")
    sp.add_argument("variety")
    sp.add_argument("--B", type=_rational, nargs="+", required=True)
    sp.add_argument("--strategy", choices=("auto", "scan", "solved"), default="auto")
    sp.add_argument("--schwartz-zippel", action="store_true")
    sp.add_argument("--slice", type=int, help="check the slicing identity with this ambient dimension")

    sp = add("density", cmd_density, "certified lower bound on d_S(B)")
    sp.add_argument("variety")
    sp.add_argument("--B", type=_rational, nargs="+", required=True)
    sp.add_argument("--translates", type=int, default=0)

    sp = add("hull", cmd_hull, "hull vertices of lattice points in a ball")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--B", type=_rational, nargs="+", required=True)
    sp.add_argument("--boundary", action="store_true")

    sp = add("decouple", cmd_decouple, "decoupling inequality or iterated bound")
    sp.add_argument("sequence")
    sp.add_argument("set")
    sp.add_argument("--I0")
    sp.add_argument("--shift")
    sp.add_argument("--blocks", help='iterated bound with blocks like "0,1;2,3"')
    sp.add_argument("--candidate", action="append", help='subspace basis like "1,0;0,1"')
    sp.add_argument("--translate", action="append")
    sp.add_argument("--witness", action="append")

    sp = add("certify", cmd_certify, "check a structure certificate")
    sp.add_argument("sequence")
    sp.add_argument("certificate")
    sp.add_argument("variety")

    sp = add("halasz", cmd_halasz, "Halasz-type bound with explicit constants")
    sp.add_argument("sequence")
    sp.add_argument("--blocks", required=True)

    sp = add("experiment", cmd_experiment, "run a named experiment")
    sp.add_argument("name")
    sp.add_argument("--param", type=_param, action="append", help="name=value")

    sp = add("scan", cmd_scan, "exponent scan for a theorem family")
    sp.add_argument("theorem")
    sp.add_argument("--grid", help="comma-separated grid")
    sp.add_argument("--tolerance", type=float)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    budget = config.DEFAULT_BUDGET if args.budget is None else config.DEFAULT_BUDGET.scaled(args.budget)
    out = _Out(args.format)
    try:
        return args.func(args, out, budget)
    except config.BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except config.CertificateError as exc:
        print(f"malformed certificate: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ValueError, KeyError, FileNotFoundError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
