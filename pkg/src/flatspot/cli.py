"""Command-line front end: ``flatspot <subcommand> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 capacity error.
Errors are reported as one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from fractions import Fraction

from . import checks
from .density import DEFAULT_N, assemble, error_bound, evaluate, tail_bounds, to_csv, to_json
from .dynamics import locate
from .exact_core import (
    CapacityError,
    check_capacity,
    farey_enumerate,
    fmt_rational,
    interval_I,
    parse_rational,
    t_of,
    upper_string,
)

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3
TABLE_HEADER = ["p/q", "s_plus", "t", "I_left", "I_right", "J_left", "J_right"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error("usage", message)
        sys.exit(EXIT_USAGE)


def _emit_error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _g(x) -> str:
    return format(float(x), ".17g")


# -- table ---------------------------------------------------------------------

def table_rows(max_q: int) -> list[dict]:
    from .density import component

    rows = []
    for r in farey_enumerate(max_q):
        lo, hi = interval_I(r)
        j0, j1 = component(r).support
        rows.append({
            "p/q": str(r),
            "s_plus": str(upper_string(r)),
            "t": fmt_rational(t_of(r)),
            "I_left": fmt_rational(lo),
            "I_right": fmt_rational(hi),
            "J_left": fmt_rational(j0),
            "J_right": fmt_rational(j1),
        })
    return rows


def cmd_table(args) -> int:
    if args.max_q < 2:
        raise UsageError("--max-q must be >= 2")
    check_capacity(args.max_q)
    rows = table_rows(args.max_q)
    if args.format == "json":
        _write(json.dumps(rows, indent=1) + "\n", args.output)
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=TABLE_HEADER, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        _write(buf.getvalue(), args.output)
    return EXIT_OK


# -- density / eval / error-bound --------------------------------------------

def step_svg(f, width: int = 640, height: int = 360, pad: int = 40) -> str:
    """Static SVG of a step function over [-1/2, 1/2]: axes plus one step polyline."""
    top = max((float(v) for v in f.values), default=1.0) or 1.0

    def X(x):
        return pad + (float(x) + 0.5) * (width - 2 * pad)

    def Y(y):
        return height - pad - float(y) / top * (height - 2 * pad)

    pts = [(X(-0.5), Y(0))]
    for a, b, v in f.gaps:
        pts += [(X(a), pts[-1][1]), (X(a), Y(v)), (X(b), Y(v))]
    pts += [(pts[-1][0], Y(0)), (X(0.5), Y(0))]
    poly = " ".join(f"{x:.3f},{y:.3f}" for x, y in pts)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>\n'
        f'<line x1="{X(0):.3f}" y1="{pad}" x2="{X(0):.3f}" y2="{height - pad}" stroke="black"/>\n'
        f'<text x="{pad}" y="{height - pad + 15}" font-size="11">-1/2</text>\n'
        f'<text x="{width - pad - 20}" y="{height - pad + 15}" font-size="11">1/2</text>\n'
        f'<text x="{X(0) + 4:.3f}" y="{pad + 10}" font-size="11">{top:.4g}</text>\n'
        f'<polyline fill="none" stroke="black" stroke-width="1" points="{poly}"/>\n'
        "</svg>\n"
    )


def cmd_density(args) -> int:
    f = assemble(args.max_q)
    text = {"csv": to_csv, "json": to_json, "svg": step_svg}[args.format](f)
    _write(text, args.output)
    return EXIT_OK


def cmd_eval(args) -> int:
    v = evaluate(assemble(args.max_q), parse_rational(args.x))
    print(f"{fmt_rational(v)} {_g(v)}")
    return EXIT_OK


def cmd_error_bound(args) -> int:
    if args.max_q < 2:
        raise UsageError("--max-q must be >= 2")
    b = error_bound(args.max_q)
    print(f"{fmt_rational(b)} {_g(b)}")
    return EXIT_OK


# -- simulate --------------------------------------------------------------------

def cmd_simulate(args) -> int:
    from .montecarlo import (
        ComparisonReport,
        SimulationConfig,
        compare,
        histogram_csv,
        histogram_json,
        run,
    )

    config = SimulationConfig(args.samples, args.iters, args.cap, args.bins, args.seed)
    nu = assemble(args.max_q)
    h = run(config, workers=args.threads)
    l1, ks = compare(h, nu)
    if args.output:
        render = histogram_json if args.format == "json" else histogram_csv
        _write(render(h, nu), args.output)
    report = ComparisonReport(
        l1, ks, config.samples, config.iterations, config.bins, config.seed,
        {"max_q": args.max_q, "underflow": h.underflow, "overflow": h.overflow, "mean": h.mean()},
    )
    sys.stdout.write(report.to_json())
    return EXIT_OK


# -- tail / fit -------------------------------------------------------------------

def cmd_tail(args) -> int:
    from .qgaussian import QGaussianParams, density, tail_ratio_series

    params = QGaussianParams(args.Q, args.beta, 0.0, args.C)
    nu = assemble(args.max_q)
    series = tail_ratio_series(params, range(args.q_from, args.q_to + 1), N=args.max_q, nu=nu)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q", "z", "qgauss", "nu_exact", "nu_float", "nu_lower", "nu_upper", "ratio"])
    for z, ratio in series:
        q = z.denominator
        v = evaluate(nu, Fraction(-1, 2) + z)
        g = float(density(params, -params.halfwidth + float(z)))
        lo, hi = tail_bounds(q) if q >= 4 else ("", "")
        w.writerow([
            q, fmt_rational(z), _g(g), fmt_rational(v), _g(v),
            _g(lo) if lo != "" else "", _g(hi) if hi != "" else "", _g(ratio),
        ])
    _write(buf.getvalue(), args.output)
    return EXIT_OK


def cmd_fit(args) -> int:
    from .qgaussian import fit

    res = fit(assemble(args.max_q))
    _write(res.to_json(), args.output)
    return EXIT_OK


# -- locate / verify --------------------------------------------------------------

def cmd_locate(args) -> int:
    check_capacity(args.max_q)
    t = parse_rational(args.t)
    if not 0 < t < 1:
        raise UsageError("--t must lie in (0, 1)")
    r = locate(t, args.max_q)
    if r is None:
        print("none")
    else:
        lo, hi = interval_I(r)
        print(f"{r} [{fmt_rational(lo)},{fmt_rational(hi)}]")
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(checks.SUITES) if args.suite == "all" else [args.suite]
    failed = False
    for name in names:
        t0 = time.perf_counter()
        errs = checks.SUITES[name]()
        dt = time.perf_counter() - t0
        status = "PASS" if not errs else "FAIL"
        print(f"{status} {name} ({dt:.2f}s)")
        for e in errs[:20]:
            print(f"  {e}")
        failed |= bool(errs)
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="flatspot", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("table", cmd_table, "rows (p/q, s+, t, I, J) for all q <= max-q")
    sp.add_argument("--max-q", type=int, default=5, help="largest denominator (default 5)")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--output", help="output path (default stdout)")

    sp = add("density", cmd_density, "the partial-sum density nu_N as a step function")
    sp.add_argument("--max-q", type=int, default=DEFAULT_N, help=f"N (default {DEFAULT_N})")
    sp.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    sp.add_argument("--output")

    sp = add("eval", cmd_eval, "evaluate nu_N at an exact point")
    sp.add_argument("--x", required=True, help="point, e.g. 0, -3/10, 0.25")
    sp.add_argument("--max-q", type=int, default=DEFAULT_N)

    sp = add("error-bound", cmd_error_bound, "sup-norm bound on nu - nu_N")
    sp.add_argument("--max-q", type=int, default=DEFAULT_N)

    sp = add("simulate", cmd_simulate, "Monte Carlo histogram of S_n/n compared with nu_N")
    sp.add_argument("--samples", type=int, default=100_000, help="M (default 100000)")
    sp.add_argument("--iters", type=int, default=10_000, help="n (default 10000)")
    sp.add_argument("--bins", type=int, default=400, help="B (default 400)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-q", type=int, default=40, help="N of the reference nu_N (default 40)")
    sp.add_argument("--cap", type=int, default=10**6, help="entry/period cap (default 1e6)")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker processes (default: available CPUs); output does not depend on it")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--output", help="histogram output path; report JSON goes to stdout")

    sp = add("tail", cmd_tail, "Q-Gaussian / nu tail ratio at z = 1/q")
    sp.add_argument("--q-from", type=int, default=8)
    sp.add_argument("--q-to", type=int, default=20)
    sp.add_argument("--Q", type=float, default=0.7)
    sp.add_argument("--beta", type=float, default=16.1)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--max-q", type=int, default=DEFAULT_N)
    sp.add_argument("--output")

    sp = add("fit", cmd_fit, "least-squares Q-Gaussian fit to nu_N")
    sp.add_argument("--max-q", type=int, default=DEFAULT_N)
    sp.add_argument("--output")

    sp = add("locate", cmd_locate, "find the p/q interval containing t")
    sp.add_argument("--t", required=True)
    sp.add_argument("--max-q", type=int, default=DEFAULT_N)

    sp = add("verify", cmd_verify, "run an invariant suite; exit 1 on any violation")
    sp.add_argument("--suite", choices=["all", *checks.SUITES], default="all")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as e:
        _emit_error("capacity", str(e))
        return EXIT_CAPACITY
    except (UsageError, ValueError, ZeroDivisionError) as e:
        _emit_error("usage", str(e))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
