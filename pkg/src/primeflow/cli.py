"""Command-line interface.

Subcommands: alpha, orbit, sums, flow, primes, equi, run-all.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import artifacts, plots
from .cf import DiophantineParams, construct_alpha_in_D, verify_diophantine
from .charsums import (
    char_bound_report,
    deviation_qn,
    fit_exponential_bound,
    horizon_multiplier,
    uniform_sup_check,
)
from .config import load_config, parse_range
from .equi import default_start_grid, default_test_functions, run_experiment
from .errors import FitError, PrimeflowError
from .flow import FlowPoint, FlowSampler, flow_time_t, near_return_check
from .pipeline import run_all
from .primes import li_x, pi_x, save_primes_bin, sieve, sw_report
from .roof import default_roof, load_roof
from .rotation import CirclePoint, default_grid, rotate_n


def _load_cf(path: str):
    cf, params = artifacts.load_cf(path)
    return cf, params


def _load_roof_arg(path: str | None):
    roof = default_roof() if path in (None, "default") else load_roof(path)
    return roof.normalized()


def _parse_levels(text: str) -> list[int]:
    lo, hi = parse_range(text)
    return list(range(lo, hi + 1))


def _print_json(data) -> None:
    print(json.dumps(data, indent=2, sort_keys=True))


# -- subcommand handlers -------------------------------------------------


def _cmd_alpha_build(args) -> int:
    params = DiophantineParams(c0=args.c0, delta=args.delta, d=args.d)
    cf, records = construct_alpha_in_D(
        params, args.bits, args.levels, search_ceiling=args.search_ceiling
    )
    artifacts.save_cf(cf, args.out, params, args.bits[: args.levels])
    for rec in records:
        flag = " (probabilistic primality)" if rec.used_probabilistic else ""
        print(
            f"level {rec.level}: a = {rec.quotient}, q = {rec.denominator}, "
            f"{rec.candidates_scanned} candidates{flag}"
        )
    print(f"wrote {args.out}")
    return 0


def _cmd_alpha_verify(args) -> int:
    cf, params = _load_cf(getattr(args, "in"))
    if params is None:
        print("cf file carries no growth parameters; cannot verify", file=sys.stderr)
        return 2
    report = verify_diophantine(cf, params, from_level=args.from_level)
    for c in report.levels:
        parts = [f"level {c.level}: q = {c.q}"]
        parts.append(f"prime: {'pass' if c.prime_ok else 'FAIL'}")
        if c.growth_ok is not None:
            parts.append(f"growth ratio {c.growth_ratio:.6g}: {'pass' if c.growth_ok else 'FAIL'}")
        if c.eq1_ok is not None:
            parts.append(f"bracketing: {'pass' if c.eq1_ok else 'FAIL'}")
        if c.prime_probabilistic:
            parts.append("(probabilistic)")
        print("  ".join(parts))
    print("all checks passed" if report.all_ok else "SOME CHECKS FAILED")
    return 0 if report.all_ok else 1


def _cmd_orbit(args) -> int:
    cf, _ = _load_cf(args.cf)
    x = CirclePoint(Fraction(args.x))
    point, budget = rotate_n(x, cf, args.n, args.tol)
    _print_json(
        {
            "point": f"{point.value.numerator}/{point.value.denominator}",
            "budget": {
                "steps": budget.steps,
                "approx_level": budget.approx_level,
                "bound": f"{budget.bound.numerator}/{budget.bound.denominator}",
            },
        }
    )
    return 0


def _cmd_sums_lemma4(args) -> int:
    cf, _ = _load_cf(args.cf)
    grid = default_grid(args.grid)
    levels = _parse_levels(args.levels)
    ks = [k for k in range(-args.kmax, args.kmax + 1) if k != 0]
    rows_by_level = {}
    csv_rows = []
    violations = 0
    for level in levels:
        rows = char_bound_report(ks, grid, cf, level)
        rows_by_level[level] = rows
        for r in rows:
            csv_rows.append([
                r.level, r.k, r.grid_sup, r.bound_triangle, r.bound_analytic,
                r.bound_analytic_no_k, r.dist_lo, r.ok, r.ok_no_k,
            ])
        violations += sum(1 for r in rows if not r.ok)
    artifacts.write_csv(
        args.out,
        ["level", "k", "grid_sup", "bound_triangle", "bound_analytic",
         "bound_analytic_no_k", "dist_lo", "pass", "pass_no_k"],
        csv_rows,
    )
    print(f"wrote {args.out} ({len(csv_rows)} rows, {violations} violations)")
    if args.plots:
        fig = plots.render_char_bounds(rows_by_level, Path(args.out).with_suffix(".png"))
        print(f"wrote {fig}")
    return 0 if violations == 0 else 1


def _cmd_sums_deviation(args) -> int:
    cf, _ = _load_cf(args.cf)
    roof = _load_roof_arg(args.roof)
    grid = default_grid(args.grid)
    levels = _parse_levels(args.levels)
    qs = [cf.denominators[n] for n in levels]
    devs = [deviation_qn(roof, grid, cf, n) for n in levels]
    fit = None
    fit_note = "fit failed"
    try:
        fit = fit_exponential_bound(levels, qs, devs)
        fit_note = f"majorant {fit.scale:.6g} * exp(-{fit.rate:.6g} q)"
    except FitError as exc:
        fit_note = f"fit failed: {exc}"
    artifacts.write_csv(
        args.out,
        ["level", "q", "deviation", "fit_scale", "fit_rate"],
        [[n, q, d, fit.scale if fit else "", fit.rate if fit else ""]
         for n, q, d in zip(levels, qs, devs)],
    )
    print(f"wrote {args.out}; {fit_note}")
    if args.plots:
        fig = plots.render_deviation(qs, devs, fit, Path(args.out).with_suffix(".png"))
        print(f"wrote {fig}")
    return 0 if fit is not None else 1


def _cmd_sums_uniform(args) -> int:
    cf, _ = _load_cf(args.cf)
    roof = _load_roof_arg(args.roof)
    grid = default_grid(args.grid)
    levels = _parse_levels(args.levels)
    rows = []
    ok = True
    for level in levels:
        res = uniform_sup_check(roof, grid, cf, level, args.d, k_budget=args.k_budget)
        passed = res.value <= res.chain_bound + 1e-9
        ok = ok and passed
        rows.append([level, res.k_cap, res.value, res.term_sup, res.chain_bound, passed])
    artifacts.write_csv(
        args.out,
        ["level", "k_cap", "max_block_deviation", "per_block_sup", "chain_bound", "pass"],
        rows,
    )
    print(f"wrote {args.out}")
    return 0 if ok else 1


def _cmd_flow_t(args) -> int:
    cf, _ = _load_cf(args.cf)
    roof = _load_roof_arg(args.roof)
    p = FlowPoint(CirclePoint(Fraction(args.x)), args.s)
    point, step = flow_time_t(p, args.t, roof, cf, tol=args.tol)
    _print_json(
        {
            "base": f"{point.base.value.numerator}/{point.base.value.denominator}",
            "height": point.height,
            "steps": step.steps,
            "residual": step.residual,
        }
    )
    return 0


def _cmd_flow_near_return(args) -> int:
    cf, _ = _load_cf(args.cf)
    roof = _load_roof_arg(args.roof)
    if args.x is not None:
        starts = [FlowPoint(CirclePoint(Fraction(args.x)), args.s)]
    else:
        starts = default_start_grid(roof)
    rows = []
    samplers = {}
    q = cf.denominators[args.level]
    for K in range(args.kmax + 1):
        worst = (0.0, 0.0)
        for p0 in starts:
            key = p0.base.value
            if key not in samplers:
                samplers[key] = FlowSampler(
                    roof, p0.base, cf, expected_steps=args.kmax * q + 2
                )
            d_phys, d_int = near_return_check(p0, roof, cf, args.level, K, sampler=samplers[key])
            worst = (max(worst[0], d_phys), max(worst[1], d_int))
        rows.append([args.level, K, worst[0], worst[1]])
    artifacts.write_csv(args.out, ["level", "K", "d_physical", "d_integer"], rows)
    print(f"wrote {args.out}")
    if args.plots:
        fig = plots.render_near_return(
            {args.level: [(r[1], r[2], r[3]) for r in rows]},
            Path(args.out).with_suffix(".png"),
        )
        print(f"wrote {fig}")
    return 0


def _cmd_primes_sieve(args) -> int:
    table = sieve(args.limit)
    save_primes_bin(table, args.out)
    print(f"wrote {args.out}: {table.count()} primes up to {args.limit}")
    return 0


def _cmd_primes_sw(args) -> int:
    x = int(args.x)
    table = sieve(x)
    print(f"pi({x}) = {pi_x(table, x)}, Li({x}) = {li_x(x):.6f}")
    rows = sw_report(table, x, args.q)
    print("a,count,ratio,flags")
    for row in rows:
        print(f"{row.a},{row.count},{row.ratio!r},{';'.join(row.flags)}")
    return 0


def _cmd_equi_run(args) -> int:
    cf, params = _load_cf(args.cf)
    roof = _load_roof_arg(args.roof)
    levels = _parse_levels(args.levels)
    max_horizon = int(args.max_horizon)
    horizon_needed = min(
        max(
            (horizon_multiplier(args.d, cf.denominators[n], 2**62) * cf.denominators[n]
             for n in levels if n <= cf.max_level),
            default=2,
        ),
        max_horizon,
    )
    table = sieve(max(horizon_needed, 2))
    starts = default_start_grid(roof)
    reports = run_experiment(
        cf, roof, table, levels, d=args.d, max_horizon=max_horizon, starts=starts
    )
    env = {"d": args.d, "max_horizon": max_horizon, "levels": args.levels}
    artifacts.dump_json(artifacts.experiment_report_to_dict(reports, env), args.out)
    print(f"wrote {args.out}")
    if args.csv:
        header, rows = artifacts.experiment_report_csv_rows(reports)
        artifacts.write_csv(args.csv, header, rows)
        print(f"wrote {args.csv}")
    if args.plots:
        fig = plots.render_experiment(reports, Path(args.out).with_suffix(".png"))
        print(f"wrote {fig}")
    for r in reports:
        if r.error:
            print(f"level {r.level}: {r.error}")
        else:
            print(
                f"level {r.level}: q={r.q} K={r.K} horizon={r.horizon} "
                f"primes={r.n_primes} gap(prime,residue)={r.summary['gap_prime_residue']:.6g} "
                f"gap(prime,target)={r.summary['gap_prime_target']:.6g} "
                f"discrepancy={r.summary['discrepancy']:.6g}"
            )
    return 0


def _cmd_run_all(args) -> int:
    cfg = load_config(args.config)
    if args.out_dir is not None:
        cfg.out_dir = args.out_dir
    result = run_all(cfg)
    for name, path in sorted(result.artifacts.items()):
        print(f"{name}: {path}")
    if result.failures:
        print(f"{len(result.failures)} check(s) failed; see failures.json", file=sys.stderr)
    return result.exit_code


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="primeflow", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    alpha = sub.add_parser("alpha", help="construct and verify the rotation angle")
    alpha_sub = alpha.add_subparsers(dest="subcommand", required=True)
    build = alpha_sub.add_parser("build", help="search quotients meeting the growth law")
    build.add_argument("--c0", type=float, default=1.0)
    build.add_argument("--delta", type=float, default=0.5)
    build.add_argument("--d", type=float, default=0.3)
    build.add_argument("--bits", default="00000")
    build.add_argument("--levels", type=int, default=5)
    build.add_argument("--search-ceiling", type=int, default=10**9)
    build.add_argument("--out", default="cf.json")
    build.set_defaults(fn=_cmd_alpha_build)
    verify = alpha_sub.add_parser("verify", help="re-check a stored cf file")
    verify.add_argument("--in", dest="in", required=True)
    verify.add_argument("--from-level", type=int, default=2)
    verify.set_defaults(fn=_cmd_alpha_verify)

    orbit = sub.add_parser("orbit", help="exact n-step rotation with budget")
    orbit.add_argument("--cf", required=True)
    orbit.add_argument("--x", required=True, help="rational start point, e.g. 1/3")
    orbit.add_argument("--n", type=int, required=True)
    orbit.add_argument("--tol", type=float, required=True)
    orbit.set_defaults(fn=_cmd_orbit)

    sums = sub.add_parser("sums", help="character-sum and deviation reports")
    sums_sub = sums.add_subparsers(dest="subcommand", required=True)
    lemma4 = sums_sub.add_parser("lemma4", help="character-sum bound check")
    lemma4.add_argument("--cf", required=True)
    lemma4.add_argument("--roof", default=None, help="accepted for interface parity; unused")
    lemma4.add_argument("--kmax", type=int, default=200)
    lemma4.add_argument("--levels", default="2..5")
    lemma4.add_argument("--grid", type=int, default=64)
    lemma4.add_argument("--out", default="lemma4.csv")
    lemma4.add_argument("--plots", action=argparse.BooleanOptionalAction, default=True)
    lemma4.set_defaults(fn=_cmd_sums_lemma4)
    deviation = sums_sub.add_parser("deviation", help="block-sum deviation and majorant fit")
    deviation.add_argument("--cf", required=True)
    deviation.add_argument("--roof", default=None)
    deviation.add_argument("--levels", default="2..5")
    deviation.add_argument("--grid", type=int, default=64)
    deviation.add_argument("--out", default="deviation.csv")
    deviation.add_argument("--plots", action=argparse.BooleanOptionalAction, default=True)
    deviation.set_defaults(fn=_cmd_sums_deviation)
    uniform = sums_sub.add_parser("uniform", help="uniform block deviation over K repetitions")
    uniform.add_argument("--cf", required=True)
    uniform.add_argument("--roof", default=None)
    uniform.add_argument("--levels", default="3..5")
    uniform.add_argument("--grid", type=int, default=64)
    uniform.add_argument("--d", type=float, default=0.3)
    uniform.add_argument("--k-budget", type=int, default=1000)
    uniform.add_argument("--out", default="uniform.csv")
    uniform.set_defaults(fn=_cmd_sums_uniform)

    flow = sub.add_parser("flow", help="suspension-flow queries")
    flow_sub = flow.add_subparsers(dest="subcommand", required=True)
    flow_t = flow_sub.add_parser("t", help="flow a point forward by time t")
    flow_t.add_argument("--roof", default=None)
    flow_t.add_argument("--cf", required=True)
    flow_t.add_argument("--x", required=True)
    flow_t.add_argument("--s", type=float, required=True)
    flow_t.add_argument("--t", type=float, required=True)
    flow_t.add_argument("--tol", type=float, default=1e-9)
    flow_t.set_defaults(fn=_cmd_flow_t)
    near = flow_sub.add_parser("near-return", help="block-time and integer-time returns")
    near.add_argument("--cf", required=True)
    near.add_argument("--roof", default=None)
    near.add_argument("--level", type=int, required=True)
    near.add_argument("--kmax", type=int, required=True)
    near.add_argument("--x", default=None)
    near.add_argument("--s", type=float, default=0.1)
    near.add_argument("--out", default="near_return.csv")
    near.add_argument("--plots", action=argparse.BooleanOptionalAction, default=True)
    near.set_defaults(fn=_cmd_flow_near_return)

    primes = sub.add_parser("primes", help="sieve and residue-class statistics")
    primes_sub = primes.add_subparsers(dest="subcommand", required=True)
    psieve = primes_sub.add_parser("sieve", help="write primes as 64-bit little-endian deltas")
    psieve.add_argument("--limit", type=lambda v: int(float(v)), required=True)
    psieve.add_argument("--out", default="primes.bin")
    psieve.set_defaults(fn=_cmd_primes_sieve)
    psw = primes_sub.add_parser("sw", help="residue-class ratio report")
    psw.add_argument("--x", type=lambda v: int(float(v)), required=True)
    psw.add_argument("--q", type=int, required=True)
    psw.set_defaults(fn=_cmd_primes_sw)

    equi = sub.add_parser("equi", help="prime-orbit equidistribution experiment")
    equi_sub = equi.add_subparsers(dest="subcommand", required=True)
    run = equi_sub.add_parser("run")
    run.add_argument("--cf", required=True)
    run.add_argument("--roof", default=None)
    run.add_argument("--d", type=float, default=0.3)
    run.add_argument("--levels", default="2..5")
    run.add_argument("--max-horizon", type=lambda v: int(float(v)), default=10**8)
    run.add_argument("--out", default="report.json")
    run.add_argument("--csv", default=None)
    run.add_argument("--plots", action=argparse.BooleanOptionalAction, default=True)
    run.set_defaults(fn=_cmd_equi_run)

    run_all_p = sub.add_parser("run-all", help="full pipeline with artifacts on disk")
    run_all_p.add_argument("--config", default=None)
    run_all_p.add_argument("--out-dir", default=None)
    run_all_p.set_defaults(fn=_cmd_run_all)
    return top


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PrimeflowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
