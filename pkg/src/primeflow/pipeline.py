"""End-to-end orchestration: construct, verify, check, experiment, report."""

from __future__ import annotations

from dataclasses import dataclass
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
from .config import RunConfig, parse_range
from .equi import default_start_grid, default_test_functions, run_experiment
from .errors import FitError, PrimeflowError
from .flow import FlowSampler, near_return_check
from .primes import sieve
from .roof import default_roof, load_roof, save_roof
from .rotation import default_grid


@dataclass
class RunResult:
    exit_code: int
    artifacts: dict[str, Path]
    failures: list[dict]


def _environment_echo(cfg: RunConfig) -> dict:
    return {
        "budgets": {
            "max_horizon": cfg.max_horizon,
            "step_budget": cfg.step_budget,
            "k_budget": cfg.k_budget,
            "search_ceiling": cfg.search_ceiling,
        },
        "grids": {
            "x_grid": cfg.x_grid,
            "base_starts": cfg.base_starts,
            "height_starts": cfg.height_starts,
        },
        "conventions": {
            "angle_tail": "all-ones canonical continuation",
            "residue_zero_class": "excluded from residue averages, bookkept separately",
            "horizon": "min(floor(e^(d*q_n)) * q_n, max_horizon), primes strictly below",
            "grid_sup": "suprema are grid suprema and understate true suprema",
            "reparam_section": "crossing from (x,0) parametrized by the second coordinate",
        },
    }


def run_all(cfg: RunConfig) -> RunResult:
    """Run the whole pipeline; returns artifacts and a failure manifest.

    Exit code 0 means every enabled pass/fail check passed; partial
    failures are collected per module rather than aborting the run.
    """
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    made: dict[str, Path] = {}
    failures: list[dict] = []

    # -- irrational construction + verification
    params = DiophantineParams(c0=cfg.c0, delta=cfg.delta, d=cfg.d)
    cf, records = construct_alpha_in_D(
        params, cfg.bits, cfg.levels, search_ceiling=cfg.search_ceiling
    )
    made["cf"] = artifacts.save_cf(cf, out / "cf.json", params, cfg.bits[: cfg.levels])
    report = verify_diophantine(cf, params)
    if not report.all_ok:
        failures.append({"module": "cf", "check": "diophantine-verification",
                         "message": "some level checks failed"})

    # -- roof
    roof = (
        default_roof(cfg.harmonics, cfg.roof_amplitude, cfg.roof_decay)
        if cfg.roof == "default"
        else load_roof(cfg.roof)
    ).normalized()
    save_roof(roof, out / "roof.json")
    made["roof"] = out / "roof.json"

    grid = default_grid(cfg.x_grid)
    lo_level, hi_level = parse_range(cfg.sum_levels, "sum_levels")
    hi_level = min(hi_level, cf.max_level - 1)
    sum_levels = list(range(lo_level, hi_level + 1))

    # -- character-sum bound checks
    ks = [k for k in range(-cfg.kmax, cfg.kmax + 1) if k != 0]
    rows_by_level = {}
    csv_rows = []
    for level in sum_levels:
        rows = char_bound_report(ks, grid, cf, level)
        rows_by_level[level] = rows
        for r in rows:
            csv_rows.append([
                r.level, r.k, r.grid_sup, r.bound_triangle, r.bound_analytic,
                r.bound_analytic_no_k, r.dist_lo, r.ok, r.ok_no_k,
            ])
        bad = [r for r in rows if not r.ok]
        if bad:
            failures.append({"module": "charsums", "check": "char-bound",
                             "message": f"{len(bad)} violations at level {level}"})
    made["lemma4_csv"] = artifacts.write_csv(
        out / "lemma4.csv",
        ["level", "k", "grid_sup", "bound_triangle", "bound_analytic",
         "bound_analytic_no_k", "dist_lo", "pass", "pass_no_k"],
        csv_rows,
    )

    # -- block-sum deviations and the exponential majorant
    qs = [cf.denominators[n] for n in sum_levels]
    devs = [deviation_qn(roof, grid, cf, n, tol=cfg.flow_tol) for n in sum_levels]
    fit = None
    try:
        fit = fit_exponential_bound(sum_levels, qs, devs)
    except FitError as exc:
        failures.append({"module": "charsums", "check": "deviation-fit", "message": str(exc)})
    made["deviation_csv"] = artifacts.write_csv(
        out / "deviation.csv",
        ["level", "q", "deviation", "fit_scale", "fit_rate"],
        [
            [n, q, d, fit.scale if fit else "", fit.rate if fit else ""]
            for n, q, d in zip(sum_levels, qs, devs)
        ],
    )

    # -- uniform block deviations (proof-chain bound)
    uni_rows = []
    for level in sum_levels:
        res = uniform_sup_check(
            roof, grid, cf, level, cfg.d, k_budget=cfg.k_budget,
            step_budget=cfg.step_budget, tol=cfg.flow_tol,
        )
        chain_ok = res.value <= res.chain_bound + 1e-9
        uni_rows.append([level, res.k_cap, res.value, res.term_sup, res.chain_bound, chain_ok])
        if not chain_ok:
            failures.append({"module": "charsums", "check": "uniform-chain-bound",
                             "message": f"level {level}: {res.value} > {res.chain_bound}"})
    made["uniform_csv"] = artifacts.write_csv(
        out / "uniform.csv",
        ["level", "k_cap", "max_block_deviation", "per_block_sup", "chain_bound", "pass"],
        uni_rows,
    )

    # -- near returns
    starts = default_start_grid(roof, cfg.base_starts, cfg.height_starts)
    nr_rows = []
    nr_by_level: dict[int, list] = {}
    for level in sum_levels:
        k_cap = horizon_multiplier(cfg.d, cf.denominators[level], cfg.k_budget)
        per_level = []
        samplers = {}
        for K in range(k_cap + 1):
            worst = (0.0, 0.0)
            for p0 in starts:
                key = p0.base.value
                if key not in samplers:
                    samplers[key] = FlowSampler(
                        roof, p0.base, cf, tol=cfg.flow_tol,
                        expected_steps=k_cap * cf.denominators[level] + 2,
                        step_budget=cfg.step_budget,
                    )
                d_phys, d_int = near_return_check(
                    p0, roof, cf, level, K, sampler=samplers[key]
                )
                worst = (max(worst[0], d_phys), max(worst[1], d_int))
            per_level.append((K, worst[0], worst[1]))
            nr_rows.append([level, K, worst[0], worst[1]])
        nr_by_level[level] = per_level
    made["near_return_csv"] = artifacts.write_csv(
        out / "near_return.csv",
        ["level", "K", "d_physical", "d_integer"],
        nr_rows,
    )

    # -- figures for the check reports
    if cfg.emit_plots:
        made["fig_lemma4"] = plots.render_char_bounds(rows_by_level, out / "fig_lemma4.png")
        made["fig_deviation"] = plots.render_deviation(qs, devs, fit, out / "fig_deviation.png")
        made["fig_near_return"] = plots.render_near_return(nr_by_level, out / "fig_near_return.png")

    # -- the experiment
    if not cfg.check_only:
        lo_eq, hi_eq = parse_range(cfg.equi_levels, "equi_levels")
        eq_levels = list(range(lo_eq, min(hi_eq, cf.max_level - 1) + 1))
        horizon_needed = min(
            max(
                (horizon_multiplier(cfg.d, cf.denominators[n], 2**62) * cf.denominators[n]
                 for n in eq_levels),
                default=2,
            ),
            cfg.max_horizon,
        )
        table = sieve(max(horizon_needed, 2))
        reports = run_experiment(
            cf, roof, table, eq_levels, d=cfg.d, max_horizon=cfg.max_horizon,
            starts=starts, tol=cfg.flow_tol,
        )
        for r in reports:
            if r.error is not None and not r.error_benign:
                failures.append({"module": "equi", "check": f"level-{r.level}",
                                 "message": r.error})
        made["report"] = artifacts.dump_json(
            artifacts.experiment_report_to_dict(reports, _environment_echo(cfg)),
            out / "report.json",
        )
        header, rows = artifacts.experiment_report_csv_rows(reports)
        made["report_csv"] = artifacts.write_csv(out / "report.csv", header, rows)
        if cfg.emit_plots:
            made["fig_experiment"] = plots.render_experiment(reports, out / "fig_experiment.png")
            done = [r for r in reports if r.error is None]
            if done:
                top = done[-1]
                sampler = FlowSampler(
                    roof, starts[0].base, cf, tol=cfg.flow_tol,
                    expected_steps=int(top.horizon / roof.min_value()) + 2,
                )
                ps = table.primes[table.primes < top.horizon].astype(float)
                xs, ss, _, _ = sampler.points_at_times(ps, starts[0].height)
                made["fig_orbit"] = plots.render_orbit(
                    xs, ss, roof, out / "fig_orbit.png",
                    title=f"Prime-orbit sample, level {top.level}",
                )

    if failures:
        made["failures"] = artifacts.dump_json({"failures": failures}, out / "failures.json")
    return RunResult(exit_code=1 if failures else 0, artifacts=made, failures=failures)
