"""Command-line front end: ``rzmoduli <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

from . import batteries
from . import combinatorics as cb
from .errors import PrecisionExhausted, RZError
from .isocrystal import IsocrystalShape, IsoVector, make_ring
from .lattice import (M0, a_invariant, default_precision, dieudonne_closure, lattice_from_cycle_point,
                      p_closure, span)
from .padic import is_prime

SCHEMA = 1


class UsageError(Exception):
    pass


def _emit(args, payload, text):
    if args.json:
        print(json.dumps({"schema": SCHEMA, **payload}, sort_keys=True))
    else:
        print(text)


def _frac(x):
    return int(x) if x.denominator == 1 else str(x)


def _pair(text):
    mt = re.fullmatch(r"\s*(\d+)\s*[:,\s]\s*(\d+)\s*", text)
    if not mt:
        raise UsageError(f"expected m:n, got {text!r}")
    return int(mt.group(1)), int(mt.group(2))


def _ring_for(args, shape):
    if not is_prime(args.p):
        raise UsageError(f"--p {args.p} is not prime")
    degree = args.field_degree or 2 * shape.required_field_degree()
    precision = args.precision or default_precision(shape)
    return make_ring(args.p, degree, precision)


# -- commands -------------------------------------------------------------------

def cmd_dim(args):
    shape = IsocrystalShape.parse(args.shape)
    d1 = cb.dim_formula(shape)
    d2 = cb.dim_rho_formula(shape)
    dim = cb.dimension(shape)
    _emit(args, {"shape": str(shape), "dim": dim, "dim_rho": _frac(d2), "defect": cb.defect(shape)},
          f"{dim}\n(copy-sum form {_frac(d1)}, root form {_frac(d2)}, defect {cb.defect(shape)})")
    return 0


def cmd_betti(args):
    m, n = _pair(args.pair)
    prof = cb.paving_profile(m, n)
    lines = [f"d = {list(prof.d)}", f"Euler {prof.euler}",
             f"count check {'ok' if prof.count_check() else 'FAILED'} (C(h,m)/h = {prof.expected_count})"]
    _emit(args, {"profile": prof.to_json()}, "\n".join(lines))
    return 0


def cmd_semimodules(args):
    m, n = _pair(args.pair)
    cycles = cb.enumerate_cycles(m, n)
    rows = []
    for c in cycles:
        A = cb.semimodule_from_cycle(c)
        rows.append({"cycle": list(c.values), "generators": A.generators(),
                     "B_plus": c.b_plus(), "B_minus": c.b_minus(),
                     "V": [list(p) for p in c.v_set()]})
    text = "\n".join(f"B = {tuple(r['cycle'])}  generators {r['generators']}  |V(B)| = {len(r['V'])}"
                     for r in rows)
    _emit(args, {"m": m, "n": n, "count": len(rows), "semimodules": rows}, text)
    return 0


def cmd_smooth(args):
    shape = IsocrystalShape.parse(args.shape)
    res = cb.smoothness(shape)
    text = f"{res.verdict} ({res.reason})"
    if res.duality_confirmed is not None:
        text += f"; profile asymmetry confirmed: {str(res.duality_confirmed).lower()}"
    _emit(args, {"shape": str(shape), "smoothness": res.to_json()}, text)
    return 0


def cmd_pi0(args):
    shape = IsocrystalShape.parse(args.shape)
    desc = cb.pi0_descriptor(shape)
    payload = {"shape": str(shape), "pi0": desc.to_json()}
    text = [desc.describe()]
    reach = []
    for (m, n) in cb.bi_part(shape):
        a, b = cb.height_reachability(m, n, 1)
        reach.append({"m": m, "n": n, "a": a, "b": b})
        text.append(f"height 1 reached on {m}:{n}: {a}*{m + n} + ({b})*{m} = 1")
    if reach:
        payload["height_reachability"] = reach
    _emit(args, payload, "\n".join(text))
    return 0


def _lattice_report(args, L, extra=None):
    payload = {"lattice": L.to_json(), **(extra or {})}
    lines = [f"vol {L.vol()}", f"first indices {L.first_indices()}",
             f"certified depth {L.certified_depth}"]
    for k, v in (extra or {}).items():
        lines.append(f"{k.replace('_', ' ')}: {json.dumps(v)}")
    _emit(args, payload, "\n".join(lines))


def _parse_coords(text, vset, field):
    coords = {}
    if not text:
        return coords
    order = sorted(vset)
    for item in text.split(","):
        if "=" not in item:
            raise UsageError(f"coordinate {item!r} must look like key=value")
        key, val = (s.strip() for s in item.split("=", 1))
        mt = re.fullmatch(r"(\d+):(\d+)", key)
        if mt:
            pair = (int(mt.group(1)), int(mt.group(2)))
        elif key == "a" and len(order) == 1:
            pair = order[0]
        elif re.fullmatch(r"a(\d+)", key) and 1 <= int(key[1:]) <= len(order):
            pair = order[int(key[1:]) - 1]
        else:
            raise UsageError(f"unknown coordinate {key!r}; V(B) = {order}")
        coords[pair] = field.parse(val)
    return coords


def cmd_lattice(args):
    shape = IsocrystalShape.parse(args.shape)
    ring = _ring_for(args, shape)
    if args.action == "from-cycle":
        if not shape.is_simple():
            raise UsageError("from-cycle needs a simple shape m:n")
        (m, n, _), = shape.summands
        gens = [int(x) for x in args.semimodule.split(",")] if args.semimodule else [0]
        A = cb.SemiModule.from_generators(m, n, gens)
        if not A.is_normalized():
            raise UsageError(f"semimodule with fringe {A.fringe} is not normalized")
        vset = cb.cycle_from_semimodule(A).v_set()
        coords = _parse_coords(args.coords, vset, ring.field)
        L = lattice_from_cycle_point(A, coords, ring)
        back = L.semimodule()
        _lattice_report(args, L, {"semimodule": list(back.fringe), "round_trip": back == A})
        return 0
    if not args.vectors:
        raise UsageError("give at least one generator")
    vectors = [IsoVector.parse(shape, ring, text) for text in args.vectors]
    L = span(vectors) if args.span else dieudonne_closure(vectors)
    if args.action == "closure":
        _lattice_report(args, L, {"a_invariant": a_invariant(L)})
    elif args.action == "vol":
        _emit(args, {"vol": L.vol(), "certified_depth": L.certified_depth}, str(L.vol()))
    elif args.action == "ainv":
        a = a_invariant(L)
        _emit(args, {"a_invariant": a, "certified_depth": L.certified_depth}, str(a))
    elif args.action == "semimodule":
        A = L.semimodule()
        _emit(args, {"semimodule": A.to_json(), "normalization": list(A.normalization().fringe)},
              f"fringe {list(A.fringe)} generators {A.generators()} "
              f"normalization {list(A.normalization().fringe)}")
    elif args.action == "pclosure":
        P = p_closure(L)
        _lattice_report(args, P, {"equals_M0": P == M0(shape, ring)})
    return 0


def cmd_verify(args):
    suites = batteries.SUITES if args.suite == "all" else (args.suite,)
    checks = []
    for name in suites:
        for c in batteries.run_suite(name, args.seed, args.trials):
            checks.append((name, c))
    ok = all(c.passed for _, c in checks)
    payload = {"seed": args.seed, "passed": ok,
               "checks": [{"suite": s, **{k: v for k, v in c.to_json().items() if k != "seconds"}}
                          for s, c in checks]}
    text = "\n".join(f"{'PASS' if c.passed else 'FAIL'} [{s}] {c.name}: {c.detail} ({c.seconds:.2f}s)"
                     for s, c in checks)
    _emit(args, payload, text)
    return 0 if ok else 1


# -- parser ------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=2, help="residue characteristic (default 2)")
    common.add_argument("--field-degree", type=int, default=None,
                        help="degree a of the residue field F_p^a (default: twice the lcm of the heights)")
    common.add_argument("--precision", type=int, default=None,
                        help="Witt precision N (default c + 2h + 4)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    parser = argparse.ArgumentParser(
        prog="rzmoduli", description="Dieudonné lattices and the combinatorics of their moduli.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dim", parents=[common], help="dimension of the reduced moduli space")
    p.add_argument("shape")
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("betti", parents=[common], help="Betti profile d(j) for a simple m:n")
    p.add_argument("pair")
    p.set_defaults(func=cmd_betti)

    p = sub.add_parser("semimodules", parents=[common], help="normalized semimodules and cycles")
    p.add_argument("pair")
    p.set_defaults(func=cmd_semimodules)

    p = sub.add_parser("smooth", parents=[common], help="smoothness verdict")
    p.add_argument("shape")
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("pi0", parents=[common], help="connected components descriptor")
    p.add_argument("shape")
    p.set_defaults(func=cmd_pi0)

    p = sub.add_parser("lattice", help="lattice computations")
    actions = p.add_subparsers(dest="action", required=True)
    lattice_opts = argparse.ArgumentParser(add_help=False, parents=[common])
    lattice_opts.add_argument("--shape", required=True)
    for name, helptext in [("closure", "F,V-closure with volume and a-invariant"),
                           ("vol", "volume"), ("ainv", "a-invariant"),
                           ("semimodule", "semimodule of first indices (simple shapes)"),
                           ("pclosure", "closure under F, V and all pi_j, sigma_j")]:
        a = actions.add_parser(name, parents=[lattice_opts], help=helptext)
        a.add_argument("vectors", nargs="+", help="generators such as 'e_0+[x]e_1' or '[1]e(1,2,0)'")
        a.add_argument("--span", action="store_true", help="use the plain W-span instead of the F,V-closure")
        a.set_defaults(func=cmd_lattice)
    a = actions.add_parser("from-cycle", parents=[lattice_opts], help="lattice at a point of a paving cell")
    a.add_argument("--semimodule", default=None, help="generators of a normalized semimodule, e.g. '-1,1'")
    a.add_argument("--coords", default=None, help="coordinates on V(B): 'a=x', 'a1=x,a2=1' or 'd:i=x'")
    a.set_defaults(func=cmd_lattice)

    p = sub.add_parser("verify", parents=[common], help="run verification batteries")
    p.add_argument("suite", choices=list(batteries.SUITES) + ["all"])
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # let values such as "-1,1" follow --semimodule without an '='
    for k in range(len(argv) - 1):
        if argv[k] == "--semimodule":
            argv[k:k + 2] = [f"--semimodule={argv[k + 1]}", ""]
    argv = [a for a in argv if a != ""]
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except PrecisionExhausted as exc:
        depth = f" (depth reached: {exc.depth})" if exc.depth is not None else ""
        print(f"error: {exc}{depth}; try a larger --precision", file=sys.stderr)
        return 2
    except (UsageError, RZError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
