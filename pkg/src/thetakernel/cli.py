"""Command-line front end.

Subcommands: theta (q-expansions), classgroup (binary form classes),
invariants (det/level/rank/local invariants of a Gram file), and verify
(named verification suites).  All serialized numbers are exact integers or
num/den strings; output written via --out is byte-stable across runs and
thread counts.

Exit codes: 0 success / all claims pass, 1 internal error, 2 invalid input,
3 at least one verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from . import analysis, bqf, qexp, suites
from .exactmath import INFINITE_PLACE, is_odd_prime
from .lattice import (
    det_level,
    dual_gram,
    gram_from_json,
    hasse_witt_all_places,
    rank_mod_p,
)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_BAD_INPUT = 2
EXIT_VERIFICATION = 3


def data_dir() -> str:
    override = os.environ.get("THETA_KERNEL_DATA")
    if override:
        return override
    return os.path.join(os.path.dirname(__file__), "data")


def _load_gram(path: str):
    candidate = path
    if not os.path.exists(candidate):
        fallback = os.path.join(data_dir(), path)
        if os.path.exists(fallback):
            candidate = fallback
        else:
            raise ValueError(f"Gram file not found: {path}")
    with open(candidate) as fh:
        return gram_from_json(json.load(fh))


def _emit(doc, args, csv_rows=None) -> None:
    if getattr(args, "csv", False):
        buf = io.StringIO()
        writer = csv.writer(buf)
        for row in csv_rows or []:
            writer.writerow(row)
        text = buf.getvalue()
    else:
        text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_theta(args) -> int:
    gram = _load_gram(args.gram)
    if args.det and args.cusp:
        expansion = qexp.slash_cusp(gram, args.degree, args.cusp, args.bound, det=True)
    elif args.cusp:
        expansion = qexp.slash_cusp(gram, args.degree, args.cusp, args.bound)
    elif args.det:
        expansion = qexp.theta_det_expansion(gram, args.degree, args.bound)
    else:
        expansion = qexp.theta_expansion(gram, args.degree, args.bound)
    if args.det and expansion.is_zero():
        print(
            "warning: det-weighted series vanishes identically "
            "(the form has an improper automorphism)",
            file=sys.stderr,
        )
    doc = qexp.expansion_to_json(expansion)
    rows = [["index_2T", "value"]] + [
        [json.dumps(item["index_2T"]), item["value"]] for item in doc["coeffs"]
    ]
    _emit(doc, args, rows)
    return EXIT_OK


def cmd_classgroup(args) -> int:
    classes = bqf.class_representatives(args.disc)
    doc = {
        "discriminant": args.disc,
        "class_number": len(classes),
        "ambiguous": [list(c.triple()) for c in classes if c.ambiguous],
        "classes": [c.to_json() for c in classes],
    }
    rows = [["a", "b", "c", "ambiguous"]] + [
        [c.a, c.b, c.c, c.ambiguous] for c in classes
    ]
    _emit(doc, args, rows)
    return EXIT_OK


def cmd_invariants(args) -> int:
    gram = _load_gram(args.gram)
    det, level = det_level(gram)
    doc = {
        "size": gram.size,
        "determinant": det,
        "level": level,
        "dual_level": dual_gram(gram).level,
        "hasse_witt": {
            ("infinity" if v == INFINITE_PLACE else str(v)): s
            for v, s in hasse_witt_all_places(gram).items()
        },
    }
    if args.p:
        if not is_odd_prime(args.p):
            raise ValueError(f"{args.p} is not an odd prime")
        doc["rank_mod_p"] = {"p": args.p, "rank": rank_mod_p(gram, args.p)}
    rows = [["invariant", "value"]] + [[k, json.dumps(v)] for k, v in doc.items()]
    _emit(doc, args, rows)
    return EXIT_OK


def _suite_tasks(args) -> list:
    name = args.suite
    if name == "kernel":
        return suites.kernel_tasks(args.p, args.bound)
    if name == "dimensions":
        return suites.dimensions_tasks(args.p, args.bound)
    if name == "km":
        return suites.km_tasks(args.p, args.dmax)
    if name == "witt":
        return suites.witt_tasks(args.p)
    if name == "erratum":
        return suites.erratum_tasks(args.p, args.degree, args.bound)
    if name == "dj":
        return suites.dj_tasks()
    if name == "special":
        return suites.special_tasks()
    raise ValueError(f"unknown suite: {name}")


_SUITE_DEFAULTS = {
    "kernel": {"bound": 12, "needs_p": True},
    "dimensions": {"bound": 12, "needs_p": True},
    "km": {"needs_p": True},
    "witt": {"needs_p": True},
    "erratum": {"bound": 30},
    "dj": {},
    "special": {},
}


def cmd_verify(args) -> int:
    profile = _SUITE_DEFAULTS[args.suite]
    if profile.get("needs_p") and not args.p:
        raise ValueError(f"suite '{args.suite}' requires --p")
    if args.suite == "erratum" and not args.p:
        args.p = 5
    if args.bound is None:
        args.bound = profile.get("bound", 12)
    timed = suites.run_tasks(_suite_tasks(args), threads=args.threads)
    records = []
    for item in timed:
        record = item.report.to_json()
        record["name"] = item.name
        records.append(record)
        status = "PASS" if item.report.passed else "FAIL"
        print(f"{status} {item.name} ({item.elapsed_ms} ms)", file=sys.stderr)
    doc = {"suite": args.suite, "reports": records}
    rows = [["name", "verdict", "bound", "claim"]] + [
        [r["name"], r["verdict"], r.get("bound"), r["claim"]] for r in records
    ]
    _emit(doc, args, rows)
    return EXIT_OK if all(r["verdict"] == "pass" for r in records) else EXIT_VERIFICATION


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thetakernel",
        description="Exact theta-series expansions and mod-p kernel verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output_flags(p):
        p.add_argument("--out", help="write the artifact to this path")
        fmt = p.add_mutually_exclusive_group()
        fmt.add_argument("--json", action="store_true", help="JSON output (default)")
        fmt.add_argument("--csv", action="store_true", help="CSV output")

    p_theta = sub.add_parser("theta", help="compute a theta q-expansion")
    p_theta.add_argument("--gram", required=True, help="Gram JSON path (or bundled name)")
    p_theta.add_argument("--degree", type=int, required=True)
    p_theta.add_argument("--bound", type=int, required=True, help="trace bound")
    p_theta.add_argument("--det", action="store_true", help="weight by det(X)")
    p_theta.add_argument("--cusp", type=int, default=0, metavar="J",
                         help="expansion at the J-th cusp")
    add_output_flags(p_theta)
    p_theta.set_defaults(func=cmd_theta)

    p_cg = sub.add_parser("classgroup", help="binary form class representatives")
    p_cg.add_argument("--disc", type=int, required=True, help="negative discriminant")
    add_output_flags(p_cg)
    p_cg.set_defaults(func=cmd_classgroup)

    p_inv = sub.add_parser("invariants", help="det/level/rank/local invariants")
    p_inv.add_argument("--gram", required=True)
    p_inv.add_argument("--p", type=int, help="odd prime for the F_p rank")
    add_output_flags(p_inv)
    p_inv.set_defaults(func=cmd_invariants)

    p_ver = sub.add_parser("verify", help="run a verification suite")
    p_ver.add_argument(
        "suite",
        choices=["kernel", "dimensions", "km", "witt", "erratum", "dj", "special"],
    )
    p_ver.add_argument("--p", type=int)
    p_ver.add_argument("--bound", type=int)
    p_ver.add_argument("--dmax", type=int, default=300)
    p_ver.add_argument("--degree", type=int, default=1)
    p_ver.add_argument("--threads", type=int, default=1)
    add_output_flags(p_ver)
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
