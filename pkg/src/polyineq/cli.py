"""Command-line interface.

Subcommands: norm, polarize, derivative, constants, audit, extremal, search-k.
Exit status is 0 on success, 1 when an audit or gallery check fails, and 2 on
bad input (one diagnostic line on stderr).

The default seed is 42; the environment variable ``POLYINEQ_SEED`` replaces
that default, and ``--seed`` overrides both.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import audit, bounds, jsonio
from .bounds import BoundError
from .forms import FormError, GeneralPoly, MonomialPoly, SymmetricForm, polarize
from .jsonio import InputError
from .lp import ExponentError, SpaceDesc, format_exponent, parse_exponent
from .norms import (
    OptimizerOptions,
    derivative_norms,
    derivative_sup_norm,
    grid_oracle,
    multilinear_norm,
    polarization_ratio_search,
    poly_norm,
)

SEED_ENV = "POLYINEQ_SEED"
DEFAULT_SEED = 42
DEFAULT_RESTARTS = 32
GRID_EPS = 1e-12

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


# -- value parsing --------------------------------------------------------------------

def _range(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"grid {text!r} must look like a:b:step")
    a, b, step = (float(v) for v in parts)
    if not (np.isfinite([a, b, step]).all() and step > 0 and b >= a):
        raise InputError(f"grid {text!r} needs finite a <= b and step > 0")
    count = int(np.floor((b - a) / step + GRID_EPS)) + 1
    vals = [a + i * step for i in range(count)]
    if abs(vals[-1] - b) <= GRID_EPS * max(1.0, abs(b)):
        vals[-1] = b
    return vals


def parse_grid(text: str, kind: str = "exponent") -> list:
    """Comma-separated values and ``a:b:step`` ranges (endpoints inclusive within 1e-12).

    ``kind`` is "exponent" (``inf`` allowed), "int" or "float".
    """
    out = []
    try:
        for piece in (t.strip() for t in text.split(",")):
            if not piece:
                continue
            vals = _range(piece) if ":" in piece else [piece]
            for v in vals:
                if kind == "exponent":
                    out.append(parse_exponent(v))
                elif kind == "int":
                    f = float(v)
                    if abs(f - round(f)) > GRID_EPS:
                        raise InputError(f"grid {text!r} must contain integers")
                    out.append(int(round(f)))
                else:
                    out.append(float(v))
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(f"bad grid value {text!r}: {exc}") from None
    if not out:
        raise InputError(f"empty grid {text!r}")
    return out


def _exponent(text: str) -> float:
    try:
        return parse_exponent(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        seed = int(raw)
    except ValueError:
        raise InputError(f"{SEED_ENV} must be a nonnegative integer, got {raw!r}") from None
    if seed < 0:
        raise InputError(f"{SEED_ENV} must be a nonnegative integer, got {raw!r}")
    return seed


def _opts(args) -> OptimizerOptions:
    if args.restarts < 1:
        raise InputError("--restarts must be positive")
    if args.seed < 0:
        raise InputError("--seed must be nonnegative")
    return OptimizerOptions(restarts=args.restarts, seed=args.seed)


def _load_poly(path: str):
    return jsonio.poly_from_json(jsonio.load(path))


def _load_vector(text: str) -> np.ndarray:
    if os.path.exists(text):
        return jsonio.vector_from_json(jsonio.load(text))
    try:
        return jsonio.vector_from_json(json.loads(text))
    except json.JSONDecodeError:
        raise InputError(f"--x must be a JSON array or a file path, got {text!r}") from None


def _space(args, dim: int, poly_field: str) -> SpaceDesc:
    field = args.field or poly_field
    if field == "real" and poly_field == "complex":
        raise InputError("a complex polynomial needs --field complex")
    if args.space == "hxc":
        if dim < 2:
            raise InputError("H x C needs dim >= 2 (the last coordinate is the C factor)")
        if field != "complex":
            raise InputError("H x C is supported over the complex field only")
        return SpaceDesc.hilbert_times_c(dim - 1)
    return SpaceDesc.lp(dim, args.p, field)


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


# -- commands -------------------------------------------------------------------------

def cmd_norm(args) -> int:
    P = _load_poly(args.input)
    if isinstance(P, MonomialPoly):
        P = polarize(P)
    space = _space(args, P.dim, P.field)
    opts = _opts(args)
    out = {"space": space.describe()}
    if args.kind in ("poly", "both"):
        out["poly"] = poly_norm(P, space, opts).to_dict()
    if args.kind in ("multilinear", "both"):
        if not isinstance(P, SymmetricForm):
            raise InputError("multilinear norms need a homogeneous tensor")
        out["multilinear"] = multilinear_norm(P, space, opts).to_dict()
    if args.oracle:
        target = P if args.kind != "multilinear" else ("multilinear", P)
        try:
            out["oracle"] = grid_oracle(target, space, args.resolution).to_dict()
        except FormError as exc:
            raise InputError(f"grid oracle: {exc}") from None
    _emit(_dump(out), args.output)
    return EXIT_OK


def cmd_polarize(args) -> int:
    P = _load_poly(args.input)
    if isinstance(P, GeneralPoly):
        raise InputError("polarize needs a homogeneous polynomial")
    _emit(_dump(jsonio.form_to_json(polarize(P))), args.output)
    return EXIT_OK


def cmd_derivative(args) -> int:
    P = _load_poly(args.input)
    if isinstance(P, MonomialPoly):
        P = polarize(P)
    if not isinstance(P, SymmetricForm):
        raise InputError("derivative needs a homogeneous tensor")
    space = _space(args, P.dim, P.field)
    opts = _opts(args)
    m, k = P.order, args.k
    if not 1 <= k <= m:
        raise InputError(f"--k must lie in 1..{m}")
    out = {"space": space.describe(), "m": m, "k": k}
    if args.x is None:
        out["sup_poly"] = derivative_sup_norm(P, k, space, opts, kind="poly").to_dict()
        out["sup_multilinear"] = derivative_sup_norm(P, k, space, opts,
                                                     kind="multilinear").to_dict()
    else:
        x = _load_vector(args.x)
        if x.shape != (space.coords,):
            raise InputError(f"--x needs {space.coords} entries, got {x.shape[0]}")
        r = space.norm(x)
        if r >= 1:
            raise InputError(f"--x must lie in the open unit ball, got norm {r}")
        pn, mn = derivative_norms(P, x.astype(space.dtype), k, space, opts)
        out.update(r=r, poly=pn.to_dict(), multilinear=mn.to_dict())
    _emit(_dump(out), args.output)
    return EXIT_OK


def cmd_constants(args) -> int:
    ms = parse_grid(args.m, "int")
    ks = parse_grid(args.k, "int")
    ps = parse_grid(args.p)
    rs = parse_grid(args.r, "float") if args.r else []
    rows = bounds.constants_table(ms, ks, ps, rs, field=args.field)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(bounds.CSV_HEADER)
    for row in rows:
        w.writerow(row.csv_row())
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def _parse_counts(text: str | None) -> dict:
    counts = {}
    if not text:
        return counts
    for item in text.split(","):
        cid, sep, num = item.partition("=")
        if not sep:
            raise InputError(f"--counts entries look like U7=200, got {item!r}")
        try:
            counts[cid.strip()] = int(num)
        except ValueError:
            raise InputError(f"bad count in {item!r}") from None
    return counts


def cmd_audit(args) -> int:
    if args.checks:
        checks = tuple(c.strip() for c in args.checks.split(",") if c.strip())
    else:
        checks = audit.SUITES[args.suite]
    if args.instances < 0:
        raise InputError("--instances must be nonnegative")
    config = audit.SuiteConfig(checks=checks, instances=args.instances,
                               counts=_parse_counts(args.counts), seed=args.seed,
                               opts=_opts(args))
    report = audit.run_suite(config)
    text = audit.to_csv(report) if args.format == "csv" else audit.to_jsonl(report)
    _emit(text, args.output)
    n, bad = len(report.records), report.failures
    print(f"audit: {n} records, {bad} failures", file=sys.stderr)
    return EXIT_FAIL if bad else EXIT_OK


def cmd_extremal(args) -> int:
    params = {"m": args.m, "k": args.k, "p": args.p, "N": args.N, "n": args.n,
              "field": args.field}
    res = audit.extremal_gallery(args.case, {k: v for k, v in params.items() if v is not None},
                                 _opts(args))
    expected = {k: float(v) for k, v in res.expected.items()}
    out = {"case": res.case, "params": res.params, "expected": expected,
           "records": [r.to_dict() for r in res.records], "pass": res.passed}
    if "ratio" in res.instance:
        out["ratio"] = res.instance["ratio"].ratio
    _emit(_dump(out), args.output)
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_search_k(args) -> int:
    if not 2 <= args.m <= 6:
        raise InputError("--m must lie in 2..6")
    space = SpaceDesc.lp(args.dim, args.p, args.field)
    res = polarization_ratio_search(args.m, space, _opts(args), n_random=args.n_random,
                                    climb_steps=args.climb_steps)
    specs = bounds.polarization_bounds(args.m, args.p, args.field)
    out = {"m": args.m, "p": format_exponent(args.p), "dim": args.dim, "field": args.field,
           "ratio": res.ratio, "form": jsonio.form_to_json(res.form),
           "multilinear": res.multilinear.to_dict(), "poly": res.poly.to_dict(),
           "bounds": [s.to_dict() for s in specs]}
    _emit(_dump(out), args.output)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help=f"base seed (default {DEFAULT_SEED}, or ${SEED_ENV})")
    common.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS,
                        help="optimizer restarts per search")
    common.add_argument("--output", "-o", default=None, help="write here instead of stdout")

    parser = _Parser(prog="polyineq",
                     description="Polynomial inequalities on finite-dimensional l_p spaces.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def space_args(p):
        p.add_argument("--p", type=_exponent, default=2.0, help="exponent, or 'inf'")
        p.add_argument("--field", choices=["real", "complex"], default=None,
                       help="defaults to the polynomial's field")
        p.add_argument("--space", choices=["lp", "hxc"], default="lp",
                       help="hxc: l_2^(dim-1) x C with the max norm")

    p = sub.add_parser("norm", parents=[common], help="sup norm of a polynomial or form")
    p.add_argument("--input", required=True, help="tensor, monomial or general polynomial JSON")
    p.add_argument("--kind", choices=["poly", "multilinear", "both"], default="poly")
    p.add_argument("--oracle", action="store_true", help="also run the grid oracle")
    p.add_argument("--resolution", type=int, default=201)
    space_args(p)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("polarize", parents=[common], help="symmetric form of a polynomial")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_polarize)

    p = sub.add_parser("derivative", parents=[common],
                       help="norms of the k-th derivative at x, or their sup over the ball")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--x", default=None, help="JSON array or file; omit for the sup over x")
    space_args(p)
    p.set_defaults(func=cmd_derivative)

    p = sub.add_parser("constants", parents=[common], help="table of closed-form constants")
    p.add_argument("--m", required=True, help="grid a:b:step, list a,b or value")
    p.add_argument("--k", default="1")
    p.add_argument("--p", default="2")
    p.add_argument("--r", default=None, help="radii for the pointwise Bernstein factors")
    p.add_argument("--field", choices=["real", "complex"], default="complex")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("audit", parents=[common], help="run registry checks")
    p.add_argument("--suite", choices=sorted(audit.SUITES), default="full")
    p.add_argument("--checks", default=None, help="comma-separated check ids")
    p.add_argument("--instances", type=int, default=audit.DEFAULT_INSTANCES)
    p.add_argument("--counts", default=None, help="per-check counts, e.g. U7=200,C1=200")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("extremal", parents=[common], help="check a gallery case")
    p.add_argument("--case", required=True, choices=list(audit.GALLERY))
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--p", type=_exponent, default=None)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--field", choices=["real", "complex"], default=None)
    p.set_defaults(func=cmd_extremal)

    p = sub.add_parser("search-k", parents=[common], help="empirical polarization constant")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--p", type=_exponent, default=2.0)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--field", choices=["real", "complex"], default="real")
    p.add_argument("--n-random", type=int, default=8)
    p.add_argument("--climb-steps", type=int, default=40)
    p.set_defaults(func=cmd_search_k)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.seed is None:
            args.seed = _default_seed()
        return args.func(args)
    except (InputError, FormError, ExponentError, BoundError, audit.AuditError,
            ValueError) as exc:
        msg = " ".join(str(exc).split())
        print(f"polyineq: error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
