"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 acceptance failure, 4 numerical
non-convergence.  The default worker count comes from ``BRENTLAB_THREADS``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

from .gcd import BUILTIN_COSTS, CostFunction, binary_gcd_trace, read_cost_file, total_cost

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ACCEPTANCE = 3
EXIT_NONCONVERGENCE = 4

CSV_VERSION = "#brentlab-v1"


class UsageError(Exception):
    pass


def parse_cost(text: str) -> CostFunction:
    if text in BUILTIN_COSTS:
        return BUILTIN_COSTS[text]
    if os.path.exists(text):
        return read_cost_file(text)
    raise UsageError(f"cost must be one of {sorted(BUILTIN_COSTS)} or a cost-table file, got {text!r}")


def parse_ladder(text: str) -> list[int]:
    try:
        return [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad ladder {text!r}") from exc


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _grid_spec(args):
    from .density import GridSpec

    return GridSpec(args.m_geometric, args.m_uniform, args.x_min)


# --- subcommands --------------------------------------------------------------


def cmd_census(args) -> int:
    from .ensembles import CSV_COLUMNS, EnsembleId, ensemble_census

    ns = parse_ladder(args.n)
    rows = []
    for e in args.ensemble:
        for n in ns:
            c = ensemble_census(EnsembleId(e), n)
            rows.append({"ensemble": e, "n": n, "count": c.count, "ratio": c.ratio})
    if args.format == "json":
        _emit(_json(rows), args.out)
    else:
        lines = [f"{CSV_VERSION} census", CSV_COLUMNS]
        lines += [f"{r['ensemble']},{r['n']},{r['count']},{r['ratio']:.10g},,,," for r in rows]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_stats(args) -> int:
    from .ensembles import (CSV_COLUMNS, EXHAUSTIVE_LIMIT, EnsembleId, fit_log_slope, ladder_stats,
                            sample_mean_cost)

    ns = parse_ladder(args.n)
    costs = [parse_cost(c) for c in args.cost]
    names = [c.name for c in costs]
    if len(set(names)) != len(names):
        raise UsageError("cost selectors must be distinct")
    ensembles = [EnsembleId(e) for e in args.ensemble]
    rows, fits = [], []
    if max(ns) > EXHAUSTIVE_LIMIT or args.samples:
        samples = args.samples or 10**5
        for e in ensembles:
            for c in costs:
                means = []
                for n in ns:
                    r = sample_mean_cost(e, n, c, samples, args.seed)
                    means.append(r.mean)
                    rows.append({"ensemble": int(e), "n": n, "count": samples, "cost": c.name,
                                 "mean": r.mean, "stderr": r.stderr, "second_moment": r.second_moment,
                                 "seed": args.seed})
                if len(ns) >= 3:
                    fits.append(_fit_dict(e, c.name, fit_log_slope(ns, means)))
        csv_rows = [f"{r['ensemble']},{r['n']},{r['count']},,{r['cost']},{r['mean']:.12g},"
                    f",{r['second_moment']:.12g}" for r in rows]
    else:
        stats = ladder_stats(ensembles, ns, costs, args.threads)
        for e in ensembles:
            for c in costs:
                series = [stats[(e, n, c.name)] for n in sorted(set(ns))]
                rows += [dict(asdict(s), ensemble=int(s.ensemble), mean=s.mean,
                              mean_over_logn=s.mean_over_logn, second_moment=s.second_moment)
                         for s in series]
                if len(series) >= 3:
                    fits.append(_fit_dict(e, c.name, fit_log_slope([s.n for s in series],
                                                                   [s.mean for s in series])))
        csv_rows = [stats[(e, n, c.name)].csv_row() for e in ensembles for c in costs
                    for n in sorted(set(ns))]
    if args.format == "json":
        _emit(_json({"rows": rows, "fits": fits}), args.out)
    else:
        lines = [f"{CSV_VERSION} stats", CSV_COLUMNS, *csv_rows]
        lines += [f"# slope ensemble={f['ensemble']} cost={f['cost']} slope={f['slope']:.10g} "
                  f"intercept={f['intercept']:.10g} residual={f['residual']:.3g}" for f in fits]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _fit_dict(e, cost, fit) -> dict:
    return {"ensemble": int(e), "cost": cost, "slope": fit.slope, "intercept": fit.intercept,
            "residual": fit.residual}


def cmd_density(args) -> int:
    from .density import grid_csv, solve_F, solve_xi

    spec = _grid_spec(args)
    d, drec = solve_xi(args.tol, spec)
    F, frec = solve_F(args.tol_f, spec)
    if args.format == "json":
        out = {"alpha": d.alpha, "xi_at_one": d.xi_at_one, "theta_hat": drec.theta_hat,
               "iterations": drec.iterations, "residual": drec.residual, "grid_spec": asdict(spec),
               "distribution": {"theta_hat": frec.theta_hat, "iterations": frec.iterations,
                                "residual": frec.residual}}
        _emit(_json(out), args.out)
    else:
        _emit(grid_csv(F, d), args.out)
    return EXIT_OK


def cmd_constants(args) -> int:
    from .constants import constants_report
    from .density import solve_F, solve_xi

    spec = _grid_spec(args)
    d, _ = solve_xi(args.tol, spec)
    F, _ = solve_F(args.tol_f, spec)
    rep = constants_report(d, F)
    if args.format == "json":
        _emit(rep.to_json() + "\n", args.out)
    else:
        _emit(rep.table() + "\n", args.out)
    return EXIT_OK


def cmd_verify_theta(args) -> int:
    from .theta import verify_theta

    rep = verify_theta(args.n_max, args.v_max, parse_cost(args.cost))
    _emit(rep.to_json() + "\n", args.out)
    return EXIT_OK if rep.passed else EXIT_ACCEPTANCE


def cmd_dirichlet(args) -> int:
    from .dirichlet import SeriesQuery, series_truncated, verify_convolution, verify_numthy

    c = parse_cost(args.cost)
    if args.check == "series":
        res = series_truncated(SeriesQuery(args.ensemble, args.s, args.p, c, args.v_max), args.threads)
        _emit(res.to_json() + "\n", args.out)
        return EXIT_OK
    if args.check == "numthy":
        checks = list(verify_numthy(args.s, args.v_max))
    else:
        checks = [verify_convolution(args.s, args.v_max, args.p, c, args.threads)]
    _emit(_json({"checks": [ch.to_dict() for ch in checks]}), args.out)
    return EXIT_OK if all(ch.passed for ch in checks) else EXIT_ACCEPTANCE


def cmd_report(args) -> int:
    from .acceptance import AcceptanceContext, run_all

    results = run_all(AcceptanceContext(_grid_spec(args), args.threads))
    lines = [r.line() for r in results]
    failed = [r for r in results if not r.passed]
    lines.append(f"{'FAIL' if failed else 'PASS'}: {len(results) - len(failed)}/{len(results)} criteria passed")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_ACCEPTANCE if failed else EXIT_OK


def cmd_trace(args) -> int:
    tr = binary_gcd_trace(args.u, args.v)
    out = {"u": args.u, "v": args.v, "gcd": tr.gcd}
    for name, c in BUILTIN_COSTS.items():
        out[name] = total_cost(tr, c)
    if args.dump_trace:
        out["trace"] = tr.dumps()
    _emit(_json(out), args.out)
    return EXIT_OK


# --- parser -------------------------------------------------------------------


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("BRENTLAB_THREADS", "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="brentlab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--threads", type=int, default=_default_threads(),
                        help="worker threads for band-parallel scans (default: $BRENTLAB_THREADS or 1)")
    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--m-geometric", type=int, default=2048)
    grid.add_argument("--m-uniform", type=int, default=2048)
    grid.add_argument("--x-min", type=float, default=2.0**-48)
    grid.add_argument("--tol", type=float, default=1e-12, help="density iteration tolerance")
    grid.add_argument("--tol-f", type=float, default=1e-13, help="distribution recursion tolerance")

    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("census", parents=[common], help="ensemble sizes and n**-2 ratios")
    s.add_argument("--ensemble", type=int, choices=(1, 2, 3, 4), action="append")
    s.add_argument("--n", required=True, help="bound or comma-separated ladder")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.set_defaults(func=cmd_census)

    s = sub.add_parser("stats", parents=[common], help="mean-cost table and slope fit")
    s.add_argument("--ensemble", type=int, choices=(1, 2, 3, 4), action="append")
    s.add_argument("--n", default="1024,2048,4096,8192,16384,32768", help="comma-separated ladder")
    s.add_argument("--cost", action="append", help="S, T, E, N or a cost-table file (repeatable)")
    s.add_argument("--samples", type=int, default=0, help="force sampling mode with this many pairs")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("density", parents=[common, grid], help="solve F and xi")
    s.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="csv: grid values; json: convergence summary")
    s.set_defaults(func=cmd_density)

    s = sub.add_parser("constants", parents=[common, grid], help="constants report with residuals")
    s.add_argument("--format", choices=("table", "json"), default="table")
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("verify-theta", parents=[common], help="branch-word bijection check")
    s.add_argument("--n-max", type=int, default=6)
    s.add_argument("--v-max", type=int, default=500)
    s.add_argument("--cost", default="S")
    s.set_defaults(func=cmd_verify_theta)

    s = sub.add_parser("dirichlet", parents=[common], help="series values and zeta identities")
    s.add_argument("--check", choices=("series", "numthy", "convolution"), default="numthy")
    s.add_argument("--ensemble", type=int, choices=(1, 2), default=2)
    s.add_argument("--s", type=float, default=1.5)
    s.add_argument("--p", type=int, choices=(0, 1), default=0)
    s.add_argument("--v-max", type=int, default=10**5)
    s.add_argument("--cost", default="S")
    s.set_defaults(func=cmd_dirichlet)

    s = sub.add_parser("report", parents=[common, grid], help="run every acceptance criterion")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("trace", parents=[common], help="trace one pair")
    s.add_argument("u", type=int)
    s.add_argument("v", type=int)
    s.add_argument("--dump-trace", action="store_true", help="include the (i,k) step list")
    s.set_defaults(func=cmd_trace)
    return p


def main(argv=None) -> int:
    from .density import NonConvergenceError

    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "ensemble", None) is None and args.command in ("census", "stats"):
        args.ensemble = [1, 2, 3, 4] if args.command == "census" else [2]
    if getattr(args, "cost", None) is None and args.command == "stats":
        args.cost = ["S"]
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except NonConvergenceError as exc:
        print(f"brentlab: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (UsageError, ValueError, OverflowError, OSError) as exc:
        print(f"brentlab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
