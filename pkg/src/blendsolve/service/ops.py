"""Service operations: parse a config, run the requested computation, and
package results as response models with ready-to-write CSV payloads.

Used in-process by the CLI and over HTTP by the FastAPI app; both paths go
through the same functions, so outputs are byte-identical either way.
"""

from __future__ import annotations

import numpy as np

from ..bench import ALL_TEST_IDS, exact_projection, l1_error, parameter_sweep, run_paper_test
from ..blend import run_simulation
from ..config import RunConfig, resolve_config
from ..csvio import csv_text
from ..lagrangian import particle_csv_rows
from ..richardson import estimate_coupling
from .schemas import (
    BenchReport,
    BenchRequest,
    BenchResponse,
    BenchRow,
    EstimateRequest,
    EstimateResponse,
    RunRequest,
    RunResponse,
    RunSummary,
    SweepRequest,
    SweepResponse,
)


def _echo_comments(cfg: RunConfig) -> list[str]:
    return [f"{key} = {value}" for key, value in cfg.echo.items()]


def execute_run(req: RunRequest) -> RunResponse:
    cfg = resolve_config(req.config_text)
    report = run_simulation(cfg.problem, cfg.grid, cfg.sim)
    comments = _echo_comments(cfg)

    series = csv_text(
        ["step", "time", "mass_W", "mass_V", "max_W"],
        zip(report.steps.tolist(), report.times.tolist(),
            report.mass_w.tolist(), report.mass_v.tolist(), report.max_w.tolist()),
        comments=comments)

    exact = None
    if cfg.problem.exact_solution is not None:
        exact = exact_projection(cfg.problem, cfg.grid)
    xs = cfg.grid.cell_centers
    fields = csv_text(
        ["i", "x", "W", "V", "U_exact"],
        ((i, float(xs[i]), float(report.w.values[i]), float(report.v.values[i]),
          float(exact.values[i]) if exact is not None else None)
         for i in range(cfg.grid.n_cells)),
        comments=comments)

    files = {
        "series.csv": series,
        "fields.csv": fields,
        "effective_config.ini": cfg.effective_ini(),
    }
    if cfg.particle_dump and report.particles is not None:
        files["particles.csv"] = csv_text(
            ["step", "alpha", "position", "mass"],
            particle_csv_rows(report.particles, cfg.grid.n_steps))

    mass_w = report.mass_w
    mass_v = report.mass_v
    summary = RunSummary(
        steps=cfg.grid.n_steps,
        final_time=cfg.grid.final_time,
        e1_w=l1_error(report.w, exact) if exact is not None else None,
        e1_v=l1_error(report.v, exact) if exact is not None else None,
        mass_w_drift=float(np.max(np.abs(mass_w - mass_w[0]))),
        mass_v_drift=float(np.max(np.abs(mass_v - mass_v[0]))),
        stability_warning=bool(report.w.stability_warning or report.v.stability_warning),
    )
    return RunResponse(summary=summary, files=files)


def execute_sweep(req: SweepRequest) -> SweepResponse:
    cfg = resolve_config(req.config_text)
    if cfg.problem.exact_solution is None:
        raise ValueError("sweep needs a problem with an exact solution")
    sweep = parameter_sweep(cfg.problem, cfg.grid, cfg.sim,
                            cfg.sweep_lams, cfg.sweep_mus, threads=req.threads)
    return SweepResponse(
        argmin_lambda=sweep.argmin_w[0], argmin_mu=sweep.argmin_w[1],
        min_e1_w=sweep.min_e1_w, e1_ref=sweep.e1_ref, n_points=len(sweep.lams),
        files={"sweep.csv": sweep.csv()})


def execute_estimate(req: EstimateRequest) -> EstimateResponse:
    cfg = resolve_config(req.config_text)
    result = estimate_coupling(cfg.problem, cfg.sim, cfg.grid, cfg.richardson_s,
                               cfg.search, threads=req.threads)
    surface = csv_text(["lambda", "mu", "delta_R_W", "delta_R_V"], result.surface)
    return EstimateResponse(
        lambda_r=result.lam, mu_r=result.mu,
        indicator_w=result.indicator_w, indicator_v=result.indicator_v,
        files={"surface.csv": surface})


def execute_bench(req: BenchRequest) -> BenchResponse:
    ids = ALL_TEST_IDS if req.test_id == "all" else (req.test_id,)
    reports, lines, files = [], [], {}
    for test_id in ids:
        report = run_paper_test(test_id, threads=req.threads)
        reports.append(BenchReport(
            test_id=report.test_id,
            rows=[BenchRow(quantity=r.quantity, paper_value=r.paper,
                           computed_value=r.computed, rel_diff=r.rel_diff,
                           passed=r.passed) for r in report.rows],
            passed=report.passed))
        lines.extend(report.lines())
        files[f"report_{report.test_id}.csv"] = report.csv()
    return BenchResponse(reports=reports,
                         all_passed=all(r.passed for r in reports),
                         lines=lines, files=files)
