"""Command-line entry point: ``spinorzeta <command> [options]``.

Exit codes: 0 success, 2 validation failure, 3 accuracy failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import checks, detector, ingest, voronoi
from .coeffs import build_table, crosscheck_hecke, mean_value_ratio, rp_violation_scan, sign_counts
from .errors import AccuracyError, SpinorZetaError, ValidationError

DATA_DIR_ENV = "SPINORZETA_DATA"
EXIT_OK, EXIT_VALIDATION, EXIT_ACCURACY = 0, 2, 3


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:count:log|lin``."""
    parts = text.split(":")
    if len(parts) != 4 or parts[3] not in ("log", "lin"):
        raise ValidationError(f"grid must be lo:hi:count:log|lin, got {text!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1 or lo <= 0 or hi < lo:
        raise ValidationError(f"invalid grid {text!r}")
    if parts[3] == "log":
        return np.geomspace(lo, hi, count)
    return np.linspace(lo, hi, count)


def _resolve_input(path: str) -> Path:
    p = Path(path)
    if not p.exists() and not p.is_absolute() and os.environ.get(DATA_DIR_ENV):
        alt = Path(os.environ[DATA_DIR_ENV]) / p
        if alt.exists():
            return alt
    return p


def load_form(args, N: int):
    if args.input:
        F = ingest.load(_resolve_input(args.input), classical=args.classical)
    else:
        spec = ingest.SyntheticSpec.parse(args.gen)
        F = spec.build(max(2, N))
    return F


def _pmap(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _write(reports, out: str | None, stream=sys.stdout):
    if out:
        if out.endswith(".json"):
            ingest.emit_json(list(reports), out)
        else:
            ingest.emit_csv(reports, out)
        print(f"wrote {len(reports)} rows to {out}", file=stream)
    else:
        stream.write(ingest.csv_text(reports))


def cmd_gen(args) -> int:
    spec = ingest.SyntheticSpec.parse(args.gen)
    F = spec.build(args.prime_bound)
    text = ingest.dumps_eigenform(F, args.convention)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {F.label} with {len(F.locals)} primes to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_coeffs(args) -> int:
    F = load_form(args, args.N)
    t = build_table(F, args.N)
    sc = sign_counts(t, args.N, args.zero_tol)
    bad = rp_violation_scan(t)
    stats = {
        "label": F.label,
        "N": args.N,
        "S_N": float(t.prefix_a[args.N]),
        "plus": sc.plus,
        "minus": sc.minus,
        "zero": sc.zero,
        "rp_violations": int(len(bad)),
        "hecke_deviation": crosscheck_hecke(t),
        "mean_value_ratio_0.65": mean_value_ratio(t) if args.N >= 2 else float("nan"),
    }
    for k, v in stats.items():
        print(f"{k}: {v}")
    if args.out:
        n = np.arange(1, args.N + 1)
        cols = ["n", "a", "lam", "d4", "prefix_a"]
        rows = zip(n, t.a[1:], t.lam[1:], t.d4[1:], t.prefix_a[1:])
        with open(args.out, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for r in rows:
                fh.write(",".join(ingest._cell(v) for v in r) + "\n")
        print(f"wrote table to {args.out}")
    return EXIT_OK


def _check_grid(xs, N: int, what: str):
    if len(xs) and float(np.max(xs)) > N:
        raise ValidationError(f"{what} grid exceeds N={N}")


def cmd_voronoi(args) -> int:
    xs = parse_grid(args.x_grid)
    _check_grid(xs, args.N, "x")
    F = load_form(args, args.N)
    t = build_table(F, args.N)
    rule = voronoi.parse_m_rule(args.M_rule)
    evals = _pmap(lambda x: voronoi.evaluate(t, float(x), rule(float(x))), xs, args.threads)
    _write(evals, args.out)
    if len(xs) >= 8:
        fit = voronoi.loglog_slope([e.x for e in evals], [e.residual for e in evals])
        print(f"residual exponent fit: slope={fit.slope:.6f} stderr={fit.stderr:.6f} "
              f"r2={fit.r_squared:.4f} points={fit.n_points}")
        if args.out:
            ingest.emit_json({"M_rule": args.M_rule, "fit": fit}, args.out + ".fit.json")
    else:
        print("residual exponent fit skipped: fewer than 8 x values")
    return EXIT_OK


def cmd_perron(args) -> int:
    N = max(2, int(math.floor(args.x)))
    F = load_form(args, max(N, args.P))
    t = build_table(F, N)
    cfg = voronoi.PerronConfig(T=args.T, P=args.P, kappa=args.perron_kappa, step=args.perron_step)
    row = voronoi.perron_compare(F, t, args.x, cfg)
    _write([row], args.out)
    print(f"perron={row.perron:.10g} direct={row.direct:.10g} deviation={row.deviation:.3e}")
    return EXIT_OK


def cmd_kernel(args) -> int:
    ts = parse_grid(args.t_grid)
    if args.phase_match:
        ts = np.array([detector.phase_matched_t(x) for x in ts])
    _check_grid((ts + args.kappa) ** 4, args.N, "(t + kappa)^4")
    F = load_form(args, args.N)
    t = build_table(F, args.N)
    taus = [args.tau] if args.tau else [1, -1]
    jobs = [(float(x), tau) for x in ts for tau in taus]
    rows = _pmap(lambda j: detector.j_tau(t, j[0], args.kappa, j[1], args.n_quad), jobs, args.threads)
    _write(rows, args.out)
    return EXIT_OK


def cmd_extrema(args) -> int:
    xs = parse_grid(args.x_grid)
    _check_grid(xs + args.C * xs**0.75, args.N, "window")
    F = load_form(args, args.N)
    t = build_table(F, args.N)
    rows = _pmap(lambda X: detector.find_extrema(t, float(X), args.C), xs, args.threads)
    _write(rows, args.out)
    if not all(r.lemma_holds for r in rows):
        print("note: some windows lack S1 > 0 > S2 (expected for data without a functional equation)")
    return EXIT_OK


def cmd_scan(args) -> int:
    xs = parse_grid(args.x_grid)
    _check_grid(xs + args.C * xs**0.75, args.N, "window")
    F = load_form(args, args.N)
    t = build_table(F, args.N)
    rows = _pmap(lambda x: detector.scan_window(t, float(x), args.C, args.eps, args.zero_tol),
                 xs, args.threads)
    _write(rows, args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    F = load_form(args, args.N)
    results = checks.run_checks(F, args.N)
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.module}: {r.invariant} ({r.detail})")
    if args.out:
        ingest.emit_json(results, args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def _add_input(p, required_N: bool = True):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="eigenvalue file")
    src.add_argument("--gen", help="synthetic form: tempered[:seed], sk[:seed] or trivial")
    p.add_argument("--classical", action="store_true",
                   help="input lambda values are classical; rescale by p^-(k-3/2) per power")
    if required_N:
        p.add_argument("--N", type=int, required=True, help="coefficient table bound")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="output file (.csv or .json); stdout if omitted")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinorzeta", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic eigenvalue file")
    p.add_argument("--gen", required=True)
    p.add_argument("--prime-bound", type=int, default=1000)
    p.add_argument("--convention", choices=ingest.CONVENTIONS, default="e1e2")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("coeffs", help="build a coefficient table and print statistics")
    _add_input(p)
    p.add_argument("--zero-tol", type=float, default=None)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("voronoi", help="exact partial sums against the truncated main term")
    _add_input(p)
    p.add_argument("--x-grid", required=True)
    p.add_argument("--M-rule", default="pow:0.6")
    p.set_defaults(func=cmd_voronoi)

    p = sub.add_parser("perron", help="Perron integral against the direct partial sum")
    _add_input(p, required_N=False)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--P", type=int, required=True)
    p.add_argument("--perron-kappa", type=float, default=1.1)
    p.add_argument("--perron-step", type=float, default=None,
                   help="fixed quadrature step; by default chosen from the phase speed")
    p.set_defaults(func=cmd_perron)

    p = sub.add_parser("kernel", help="kernel integrals J_tau over a t-grid")
    _add_input(p)
    p.add_argument("--t-grid", required=True)
    p.add_argument("--kappa", type=float, default=detector.DEFAULT_KAPPA)
    p.add_argument("--tau", type=int, choices=(1, -1), default=None)
    p.add_argument("--n-quad", type=int, default=1000)
    p.add_argument("--phase-match", action="store_true",
                   help="move each t to the nearest point where the n = 1 phase vanishes")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("extrema", help="largest and smallest partial sums in short windows")
    _add_input(p)
    p.add_argument("--x-grid", required=True)
    p.add_argument("--C", type=float, default=detector.DEFAULT_WINDOW_C)
    p.set_defaults(func=cmd_extrema)

    p = sub.add_parser("scan", help="sign counts in windows [x, x + C x^{3/4}]")
    _add_input(p)
    p.add_argument("--x-grid", required=True)
    p.add_argument("--C", type=float, default=detector.DEFAULT_WINDOW_C)
    p.add_argument("--eps", type=float, default=detector.DEFAULT_EPS)
    p.add_argument("--zero-tol", type=float, default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("check", help="run the invariant suites")
    _add_input(p)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AccuracyError as exc:
        print(f"accuracy error: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except (SpinorZetaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
