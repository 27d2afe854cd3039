"""Benchmark suite: four published test cases, two worked examples, error
metrics, parameter sweeps, improvement regions and refinement-equivalence
studies, each reported against its published reference numbers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .blend import (
    BlendParams,
    MaskedLambda,
    OccupancyLambda,
    SimulationConfig,
    run_simulation,
)
from .core import CellField, Grid1D, Problem, build_grid, project_function
from .csvio import csv_text
from .presets import Preset, get_preset
from .richardson import SearchConfig, estimate_coupling, optimal_lambda_lwbw


def exact_projection(problem: Problem, grid: Grid1D, t: float | None = None) -> CellField:
    """Cell averages of the exact solution at time t (defaults to the final time)."""
    if problem.exact_solution is None:
        raise ValueError("problem has no exact solution")
    when = grid.final_time if t is None else t
    return project_function(lambda x: problem.exact_solution(x, when), grid)


def l1_error(numeric: CellField, exact: CellField) -> float:
    """Sum of |numeric - exact| times dx; both fields must share one grid."""
    if numeric.grid != exact.grid:
        raise ValueError("fields live on different grids")
    return float(np.sum(np.abs(numeric.values - exact.values)) * numeric.grid.dx)


def _run_errors(problem, grid, cfg: SimulationConfig, exact: CellField) -> tuple[float, float]:
    rep = run_simulation(problem, grid, cfg)
    return l1_error(rep.w, exact), l1_error(rep.v, exact)


def reference_error(problem, grid, cfg: SimulationConfig,
                    exact: CellField | None = None) -> float:
    """Best error of the uncoupled pair: min over both solutions for two grid
    schemes, the grid solution alone for the multiscale pairing."""
    exact = exact if exact is not None else exact_projection(problem, grid)
    uncoupled = replace(cfg, params=BlendParams(1.0, 1.0))
    e_w, e_v = _run_errors(problem, grid, uncoupled, exact)
    return e_w if cfg.multiscale else min(e_w, e_v)


@dataclass(frozen=True)
class SweepResult:
    lams: tuple[float, ...]
    mus: tuple[float, ...]
    e1_w: tuple[float, ...]
    e1_v: tuple[float, ...]
    e1_ref: float
    in_phi_w: tuple[bool, ...]
    in_phi_v: tuple[bool, ...]
    argmin_w: tuple[float, float]
    min_e1_w: float

    def csv(self) -> str:
        rows = zip(self.lams, self.mus, self.e1_w, self.e1_v, self.in_phi_w, self.in_phi_v)
        return csv_text(["lambda", "mu", "E1_W", "E1_V", "in_Phi_W", "in_Phi_V"], rows)


def parameter_sweep(problem, grid, cfg: SimulationConfig,
                    lam_values, mu_values=None, threads: int = 1) -> SweepResult:
    """Evaluate the blend on a (lam, mu) lattice against the exact solution.

    mu_values defaults to {1} for multiscale pairings and to lam_values for
    two grid schemes. The argmin resolves ties toward the smallest lam, then
    the smallest mu, independent of evaluation order.
    """
    exact = exact_projection(problem, grid)
    if mu_values is None:
        mu_values = (1.0,) if cfg.multiscale else lam_values
    lattice = [(float(l), float(m)) for l in lam_values for m in mu_values]
    e_ref = reference_error(problem, grid, cfg, exact)

    def one(pt):
        return _run_errors(problem, grid, replace(cfg, params=BlendParams(*pt)), exact)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            errors = list(pool.map(one, lattice))
    else:
        errors = [one(pt) for pt in lattice]

    e_w = tuple(e[0] for e in errors)
    e_v = tuple(e[1] for e in errors)
    best = min(range(len(lattice)), key=lambda i: (e_w[i], lattice[i]))
    return SweepResult(
        lams=tuple(p[0] for p in lattice),
        mus=tuple(p[1] for p in lattice),
        e1_w=e_w, e1_v=e_v, e1_ref=e_ref,
        in_phi_w=tuple(e < e_ref for e in e_w),
        in_phi_v=tuple(e < e_ref for e in e_v),
        argmin_w=lattice[best], min_e1_w=e_w[best],
    )


def refinement_equivalence(problem, grid: Grid1D, scheme: str, target_error: float,
                           max_factor: float = 4.0, tol: float = 0.02) -> float:
    """Cell-count factor the probe scheme needs to match target_error within tol.

    Bisects over n_cells with n_steps scaled proportionally; requires the
    error to bracket the target over [1, max_factor] times the base grid.
    """
    steps_per_cell = grid.n_steps / grid.n_cells

    def err(n_cells: int) -> float:
        g = build_grid(grid.x_lo, grid.x_hi, n_cells, grid.final_time,
                       round(steps_per_cell * n_cells))
        rep = run_simulation(problem, g, SimulationConfig(scheme, scheme, BlendParams(1.0, 1.0)))
        return l1_error(rep.w, exact_projection(problem, g))

    lo, hi = grid.n_cells, int(round(max_factor * grid.n_cells))
    if not err(lo) >= target_error >= err(hi):
        raise ValueError("target error not bracketed by the search range")
    while True:
        mid = (lo + hi) // 2
        e = err(mid)
        if abs(e - target_error) <= tol * target_error or hi - lo <= 1:
            return mid / grid.n_cells
        if e > target_error:
            lo = mid
        else:
            hi = mid


# ------------------------------------------------------------------ reports

@dataclass(frozen=True)
class ReportRow:
    quantity: str
    computed: float
    paper: float | None = None
    passed: bool | None = None    # None marks an informational row

    @property
    def rel_diff(self) -> float | None:
        if self.paper is None or self.paper == 0:
            return None
        return (self.computed - self.paper) / self.paper


@dataclass(frozen=True)
class TestReport:
    test_id: str
    rows: tuple[ReportRow, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows if r.passed is not None)

    def csv(self) -> str:
        rows = [(r.quantity, r.paper, r.computed, r.rel_diff,
                 None if r.passed is None else r.passed) for r in self.rows]
        return csv_text(["quantity", "paper_value", "computed_value", "rel_diff", "pass"], rows)

    def lines(self) -> list[str]:
        out = []
        for r in self.rows:
            mark = "info" if r.passed is None else ("PASS" if r.passed else "FAIL")
            ref = f" (paper {r.paper:g})" if r.paper is not None else ""
            out.append(f"[{mark}] {self.test_id}: {r.quantity} = {r.computed:.6g}{ref}")
        return out


def base_config(preset: Preset) -> SimulationConfig:
    return SimulationConfig(s1=preset.s1, s2=preset.s2, params=BlendParams(1.0, 1.0),
                            n_particles=preset.n_particles, ode_solver=preset.ode_solver,
                            speed_source=preset.speed_source)


def _lattice(stop_coarse: float, fine_start: float, coarse_step: float, fine_step: float):
    coarse = np.arange(0.0, stop_coarse, coarse_step)
    fine = np.arange(fine_start, 1.0 + 1e-9, fine_step)
    return tuple(round(float(v), 10) for v in np.concatenate([coarse, fine]))


def run_test1(threads: int = 1) -> TestReport:
    p = get_preset("test1")
    cfg = base_config(p)
    exact = exact_projection(p.problem, p.grid)
    e_w, e_v = _run_errors(p.problem, p.grid, cfg, exact)
    e_ref = min(e_w, e_v)

    step = 0.05
    grid_pts = tuple(round(float(v), 10) for v in np.arange(0.0, 1.0 + 1e-9, step))
    sweep = parameter_sweep(p.problem, p.grid, cfg, grid_pts, grid_pts, threads)

    e_paper_pt, _ = _run_errors(p.problem, p.grid,
                                replace(cfg, params=BlendParams(0.29, 0.10)), exact)

    est = estimate_coupling(p.problem, cfg, p.grid, 1.0 / 8.0, SearchConfig(), threads)
    e_est, _ = _run_errors(p.problem, p.grid,
                           replace(cfg, params=BlendParams(est.lam, est.mu)), exact)

    factor_est = refinement_equivalence(p.problem, p.grid, "RLW", e_est)
    factor_best = refinement_equivalence(p.problem, p.grid, "RLW", sweep.min_e1_w)

    rows = (
        ReportRow("E1_ref", e_ref, 0.1463, abs(e_ref - 0.1463) / 0.1463 <= 0.10),
        ReportRow("lattice_min_E1_W", sweep.min_e1_w, 0.0816,
                  sweep.min_e1_w <= 0.65 * e_ref),
        ReportRow("lattice_argmin_lambda", sweep.argmin_w[0], 0.8533, None),
        ReportRow("lattice_argmin_mu", sweep.argmin_w[1], 0.0, None),
        ReportRow("E1_at_paper_estimate", e_paper_pt, 0.117, e_paper_pt < e_ref),
        ReportRow("estimator_lambda", est.lam, 0.29, None),
        ReportRow("estimator_mu", est.mu, 0.10, None),
        ReportRow("E1_at_estimate", e_est, 0.117, e_est <= 0.85 * e_ref),
        ReportRow("refine_factor_estimate", factor_est, 1.42, 1.2 <= factor_est <= 1.7),
        ReportRow("refine_factor_best", factor_best, 2.71, 2.2 <= factor_best <= 3.2),
    )
    return TestReport("1", rows)


def run_test2(threads: int = 1, stability_scales=(0.5, 0.25, 1.0 / 6.0, 0.125)) -> TestReport:
    p = get_preset("test2")
    cfg = base_config(p)
    exact = exact_projection(p.problem, p.grid)
    e_ref, _ = _run_errors(p.problem, p.grid, cfg, exact)

    lams = _lattice(0.88, 0.9, 0.04, 0.002)
    sweep = parameter_sweep(p.problem, p.grid, cfg, lams, (1.0,), threads)

    est = estimate_coupling(p.problem, cfg, p.grid, 1.0 / 3.0,
                            SearchConfig(mode="partial-1d"), threads)
    e_est, _ = _run_errors(p.problem, p.grid,
                           replace(cfg, params=BlendParams(est.lam, 1.0)), exact)

    lam_rs = [estimate_coupling(p.problem, cfg, p.grid, s,
                                SearchConfig(mode="partial-1d"), threads).lam
              for s in stability_scales]
    span = max(lam_rs) - min(lam_rs)

    # one-sided third-order comparison: on a grid refined 3x the high-order
    # scheme must still trail the blended optimum
    g3 = build_grid(p.grid.x_lo, p.grid.x_hi, 3 * p.grid.n_cells,
                    p.grid.final_time, 3 * p.grid.n_steps)
    weno = run_simulation(p.problem, g3,
                          SimulationConfig("WENO2", "WENO2", BlendParams(1.0, 1.0)))
    e_weno3 = l1_error(weno.w, exact_projection(p.problem, g3))

    rows = (
        ReportRow("E1_ref", e_ref, 0.1771, abs(e_ref - 0.1771) / 0.1771 <= 0.10),
        ReportRow("lattice_min_E1_W", sweep.min_e1_w, 0.0204,
                  sweep.min_e1_w <= 0.25 * e_ref),
        ReportRow("lattice_argmin_lambda", sweep.argmin_w[0], 0.992, None),
        ReportRow("estimator_lambda", est.lam, 0.99, None),
        ReportRow("E1_at_estimate", e_est, 0.0208, e_est <= 1.25 * sweep.min_e1_w),
        ReportRow("estimator_lambda_span", span, 0.0, span <= 0.05),
        ReportRow("weno2_error_at_3x_grid", e_weno3, None, e_weno3 > sweep.min_e1_w),
    )
    return TestReport("2", rows)


def run_test3(threads: int = 1) -> TestReport:
    p = get_preset("test3")
    cfg = base_config(p)
    exact = exact_projection(p.problem, p.grid)
    e_ref, _ = _run_errors(p.problem, p.grid, cfg, exact)

    lams = _lattice(0.84, 0.85, 0.04, 0.01)
    sweep = parameter_sweep(p.problem, p.grid, cfg, lams, (1.0,), threads)

    est = estimate_coupling(p.problem, cfg, p.grid, 0.5,
                            SearchConfig(mode="partial-1d"), threads)
    e_est, _ = _run_errors(p.problem, p.grid,
                           replace(cfg, params=BlendParams(est.lam, 1.0)), exact)
    # the published estimate appears as 0.916 in the text and 0.952 in a caption
    near_published = min(abs(est.lam - 0.916), abs(est.lam - 0.952)) <= 0.06

    rows = (
        ReportRow("E1_ref", e_ref, 0.2591, abs(e_ref - 0.2591) / 0.2591 <= 0.15),
        ReportRow("best_constant_E1_W", sweep.min_e1_w, 0.0731,
                  sweep.min_e1_w <= 0.45 * e_ref),
        ReportRow("best_constant_lambda", sweep.argmin_w[0], 0.93, None),
        ReportRow("estimator_lambda", est.lam, 0.916, near_published),
        ReportRow("E1_at_estimate", e_est, 0.0742, e_est < e_ref),
    )
    return TestReport("3", rows)


def run_test3_variable_lambda(threads: int = 1) -> TestReport:
    p = get_preset("test3")
    cfg = base_config(p)
    exact = exact_projection(p.problem, p.grid)

    lams = _lattice(0.84, 0.85, 0.04, 0.01)
    sweep = parameter_sweep(p.problem, p.grid, cfg, lams, (1.0,), threads)

    best_policy, best_err = None, float("inf")
    for hi in (0.92, 0.94, 0.96):
        for lo in (0.75, 0.80, 0.85):
            for ref in (5.0, 8.0, 12.0):
                policy = OccupancyLambda(hi, lo, ref)
                rep = run_simulation(p.problem, p.grid, replace(cfg, params=policy))
                e = l1_error(rep.w, exact)
                if e < best_err:
                    best_policy, best_err = policy, e

    rows = (
        ReportRow("best_constant_E1_W", sweep.min_e1_w, 0.0731, None),
        ReportRow("occupancy_policy_E1_W", best_err, None, best_err < sweep.min_e1_w),
        ReportRow("policy_lam_hi", best_policy.lam_hi, None, None),
        ReportRow("policy_lam_lo", best_policy.lam_lo, None, None),
        ReportRow("policy_count_ref", best_policy.count_ref, None, None),
    )
    return TestReport("test3-variable-lambda", rows)


def run_test4(threads: int = 1) -> TestReport:
    p = get_preset("test4")
    cfg = base_config(p)
    exact = exact_projection(p.problem, p.grid)
    e_ref, _ = _run_errors(p.problem, p.grid, cfg, exact)

    est = estimate_coupling(p.problem, cfg, p.grid, 0.5,
                            SearchConfig(mode="partial-1d"), threads)
    e_est, _ = _run_errors(p.problem, p.grid,
                           replace(cfg, params=BlendParams(est.lam, 1.0)), exact)

    rows = (
        ReportRow("E1_ref", e_ref, 0.0839, abs(e_ref - 0.0839) / 0.0839 <= 0.15),
        ReportRow("estimator_lambda", est.lam, 0.956, None),
        ReportRow("E1_at_estimate", e_est, 0.0317, e_est <= 0.6 * e_ref),
    )
    return TestReport("4", rows)


def run_example1(threads: int = 1) -> TestReport:
    p = get_preset("example1")
    beta = 0.5
    lam = optimal_lambda_lwbw(beta)
    levels = ((161, 120), (321, 240), (641, 480))
    blend_errors, lw_errors, bw_errors = [], [], []
    for n_cells, n_steps in levels:
        g = build_grid(0.0, 4.0, n_cells, 1.5, n_steps)
        exact = exact_projection(p.problem, g)
        cfg = SimulationConfig("LW", "BW", BlendParams(1.0, 1.0))
        e_lw, e_bw = _run_errors(p.problem, g, cfg, exact)
        e_blend, _ = _run_errors(p.problem, g,
                                 replace(cfg, params=BlendParams(lam, 1.0 - lam)), exact)
        lw_errors.append(e_lw)
        bw_errors.append(e_bw)
        blend_errors.append(e_blend)
    orders = [float(np.log2(blend_errors[i] / blend_errors[i + 1])) for i in range(2)]

    rows = (
        ReportRow("optimal_lambda", lam, 0.5, abs(lam - 0.5) < 1e-15),
        ReportRow("lw_E1", lw_errors[0], None, None),
        ReportRow("bw_E1", bw_errors[0], None, None),
        ReportRow("blended_E1", blend_errors[0], None,
                  blend_errors[0] < 0.5 * min(lw_errors[0], bw_errors[0])),
        ReportRow("order_level1", orders[0], 3.0, orders[0] >= 2.5),
        ReportRow("order_level2", orders[1], 3.0, orders[1] >= 2.5),
    )
    return TestReport("example1", rows)


def run_example2(threads: int = 1) -> TestReport:
    p = get_preset("example2")
    grid = p.grid
    n = grid.n_steps
    half_step = n // 2
    rows = []
    for lam in (0.8, 0.95, 0.99, 1.0):
        cfg = SimulationConfig("UPW", "EXACT", BlendParams(lam, 1.0), record="trajectory")
        rep = run_simulation(p.problem, grid, cfg)
        snaps = {s.step: s for s in rep.snapshots}
        e_half = l1_error(snaps[half_step].w,
                          exact_projection(p.problem, grid, half_step * grid.dt))
        e_full = l1_error(rep.w, exact_projection(p.problem, grid))
        growth = e_full / e_half
        if lam < 1.0:
            rows.append(ReportRow(f"error_growth_lam{lam}", growth, 1.0, growth <= 1.10))
            plateau = rep.max_w[n] >= 0.95 * rep.max_w[3 * n // 4] and rep.max_w[n] > 0.05
            rows.append(ReportRow(f"max_plateau_lam{lam}", rep.max_w[n], None, plateau))
        else:
            rows.append(ReportRow("error_growth_lam1.0", growth, 1.455, growth >= 1.25))
            rows.append(ReportRow("max_decay_lam1.0", rep.max_w[n], None,
                                  rep.max_w[n] <= 0.99 * rep.max_w[3 * n // 4]))
    return TestReport("example2", rows=tuple(rows))


def run_test2_localized(threads: int = 1) -> TestReport:
    p = get_preset("test2")
    grid = p.grid
    dx = grid.dx
    cfg = SimulationConfig("UPW", None, MaskedLambda(0.0, 1.0, mu=1.0),
                           n_particles=32, seed_interval=(1.5 - 4 * dx, 1.5 + 4 * dx))
    rep = run_simulation(p.problem, grid, cfg)
    ps = rep.particles
    heavy = ps.positions[ps.alive & (ps.masses >= 0.5 * ps.masses.max())]
    front = float(heavy.max())
    shock = 1.5 * float(np.exp(grid.final_time))
    e1 = l1_error(rep.w, exact_projection(p.problem, grid))

    rows = (
        ReportRow("particle_front_position", front, shock,
                  abs(front - shock) <= 3 * dx),
        ReportRow("alive_particles", float(ps.n_alive), 32.0, ps.n_alive == 32),
        ReportRow("E1_W", e1, None, None),
    )
    return TestReport("test2-localized", rows)


def run_test2_reverse(threads: int = 1) -> TestReport:
    p = get_preset("test2")
    cfg = replace(base_config(p), params=BlendParams(1.0, 0.3))
    exact = exact_projection(p.problem, p.grid)
    rep = run_simulation(p.problem, p.grid, cfg)
    e_v = l1_error(rep.v, exact)
    rows = (
        ReportRow("E1_V(1.0,0.3)", e_v, None, None),
        ReportRow("finite", 1.0, None, bool(np.isfinite(rep.v.values).all())),
    )
    return TestReport("test2-reverse", rows)


_RUNNERS = {
    "1": run_test1,
    "2": run_test2,
    "3": run_test3,
    "4": run_test4,
    "example1": run_example1,
    "example2": run_example2,
    "test2-localized": run_test2_localized,
    "test2-reverse": run_test2_reverse,
    "test3-variable-lambda": run_test3_variable_lambda,
}

ALL_TEST_IDS = tuple(_RUNNERS)


def run_paper_test(test_id: str, threads: int = 1) -> TestReport:
    try:
        runner = _RUNNERS[str(test_id)]
    except KeyError:
        raise ValueError(f"unknown test id {test_id!r}; known: {', '.join(ALL_TEST_IDS)}") from None
    return runner(threads=threads)
