import numpy as np
import pytest

from blendsolve import (
    BlendParams,
    CellField,
    Problem,
    SearchConfig,
    SimulationConfig,
    build_grid,
    estimate_coupling,
    make_coarse_pair,
    node_correspondence,
    optimal_lambda_lwbw,
    richardson_indicator,
    run_simulation,
)
from blendsolve.core import BoundaryPolicy
from blendsolve.presets import box, get_preset, velocity_constant


class TestCoarsePair:
    def test_counts_round_up_and_double(self):
        grid = build_grid(0.0, 20.0, 1200, 2.3, 3000)
        pair = make_coarse_pair(grid, 1.0 / 3.0, n_particles=6000)
        assert pair.g_prime.n_cells == 400
        assert pair.g_prime.n_steps == 1000
        assert pair.g_second.n_cells == 800
        assert pair.g_second.n_steps == 2000
        assert pair.n_particles_prime == 2000
        assert pair.n_particles_second == 4000
        # upper integer part on a non-divisor scale
        odd = make_coarse_pair(grid, 0.123, n_particles=100)
        assert odd.g_prime.n_cells == 148  # ceil(147.6)
        assert odd.n_particles_prime == 13  # ceil(12.3)

    def test_same_span(self):
        grid = build_grid(-0.2, 7.0, 100, 4.0, 200)
        pair = make_coarse_pair(grid, 0.5)
        for g in (pair.g_prime, pair.g_second):
            assert (g.x_lo, g.x_hi, g.final_time) == (-0.2, 7.0, 4.0)

    @pytest.mark.parametrize("s", [0.0, -0.2, 0.51, 0.6, 1.0])
    def test_scale_out_of_range(self, s):
        grid = build_grid(0.0, 20.0, 1200, 2.3, 3000)
        with pytest.raises(ValueError):
            make_coarse_pair(grid, s)

    def test_degenerate_coarse_grid(self):
        grid = build_grid(0.0, 1.0, 5, 1.0, 10)
        with pytest.raises(Exception):
            make_coarse_pair(grid, 0.4)  # ceil(2.0) = 2 cells < 3


class TestNodeCorrespondence:
    def test_shared_endpoints(self):
        grid = build_grid(0.0, 3.0, 16, 1.0, 8)
        pair = make_coarse_pair(grid, 0.25)
        assert node_correspondence(0, pair) == 0
        assert node_correspondence(pair.g_prime.n_cells - 1, pair) == pair.g_second.n_cells - 1

    def test_matches_brute_force_scan(self):
        grid = build_grid(0.0, 3.0, 8, 1.0, 4)
        pair = make_coarse_pair(grid, 0.5)
        fine_x = pair.g_second.cell_centers
        for i in range(pair.g_prime.n_cells):
            x = pair.g_prime.cell_centers[i]
            d = np.abs(fine_x - x)
            expected = int(np.flatnonzero(d == d.min())[0])  # ties to the lower index
            assert node_correspondence(i, pair) == expected

    def test_out_of_range(self):
        grid = build_grid(0.0, 3.0, 8, 1.0, 4)
        pair = make_coarse_pair(grid, 0.5)
        with pytest.raises(ValueError):
            node_correspondence(-1, pair)
        with pytest.raises(ValueError):
            node_correspondence(pair.g_prime.n_cells, pair)


class TestIndicator:
    def test_identical_fields_give_zero(self):
        grid = build_grid(0.0, 3.0, 8, 1.0, 4)
        pair = make_coarse_pair(grid, 0.5)
        a = CellField(pair.g_prime, np.full(pair.g_prime.n_cells, 2.0))
        b = CellField(pair.g_second, np.full(pair.g_second.n_cells, 2.0))
        assert richardson_indicator(a, b, pair) == 0.0

    def test_unit_gap(self):
        grid = build_grid(0.0, 3.0, 8, 1.0, 4)
        pair = make_coarse_pair(grid, 0.5)
        nc = pair.g_prime.n_cells
        a = CellField(pair.g_prime, np.ones(nc))
        b = CellField(pair.g_second, np.zeros(pair.g_second.n_cells))
        assert richardson_indicator(a, b, pair) == pytest.approx(nc * pair.g_prime.dx)

    def test_nonnegative_and_zero_iff_mapped_match(self):
        grid = build_grid(0.0, 3.0, 10, 1.0, 4)
        pair = make_coarse_pair(grid, 0.5)
        rng = np.random.default_rng(0)
        a = CellField(pair.g_prime, rng.uniform(0, 1, pair.g_prime.n_cells))
        h = np.array([node_correspondence(i, pair) for i in range(pair.g_prime.n_cells)])
        fine = np.zeros(pair.g_second.n_cells)
        fine[h] = a.values
        assert richardson_indicator(a, CellField(pair.g_second, fine.copy()), pair) == 0.0
        bumped = fine.copy()
        bumped[h[2]] += 0.5
        assert richardson_indicator(a, CellField(pair.g_second, bumped), pair) > 0.0

    def test_decreases_under_refinement_on_smooth_run(self):
        p = get_preset("example2")
        grid = p.grid
        deltas = []
        for s in (0.125, 0.25):
            pair = make_coarse_pair(grid, s)
            runs = []
            for g in (pair.g_prime, pair.g_second):
                cfg = SimulationConfig("UPW", "EXACT", BlendParams(1.0, 1.0))
                runs.append(run_simulation(p.problem, g, cfg))
            deltas.append(richardson_indicator(runs[0].w, runs[1].w, pair))
        assert deltas[1] < deltas[0]


class TestSearchConfig:
    def test_defaults(self):
        sc = SearchConfig()
        assert sc.mode == "full-2d"
        assert sc.coarse_step == 0.05
        assert sc.refine_rounds == 2

    @pytest.mark.parametrize("kw", [
        dict(mode="random"), dict(coarse_step=0.0), dict(coarse_step=1.5),
        dict(refine_rounds=-1),
    ])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            SearchConfig(**kw)


class TestEstimateCoupling:
    def small_problem(self):
        datum = box(0.2, 0.5)
        problem = Problem(kind="advection", initial_datum=datum,
                          velocity=velocity_constant(1.0),
                          exact_solution=lambda x, t: datum(x - t),
                          speed_bound=1.0, boundary=BoundaryPolicy("zero", "copy"))
        grid = build_grid(0.0, 2.0, 120, 0.8, 240)
        return problem, grid

    def test_partial_mode_fixes_mu(self):
        problem, grid = self.small_problem()
        cfg = SimulationConfig("UPW", "EXACT", BlendParams(1.0, 1.0))
        res = estimate_coupling(problem, cfg, grid, 0.25,
                                SearchConfig(mode="partial-1d", coarse_step=0.25,
                                             refine_rounds=1))
        assert res.mu == 1.0
        assert all(m == 1.0 for _, m, _, _ in res.surface)
        assert 0.0 <= res.lam <= 1.0
        assert res.indicator_w >= 0.0

    def test_surface_and_tie_break_order(self):
        problem, grid = self.small_problem()
        cfg = SimulationConfig("UPW", "EXACT", BlendParams(1.0, 1.0))
        res = estimate_coupling(problem, cfg, grid, 0.25,
                                SearchConfig(coarse_step=0.5, refine_rounds=0))
        lattice = [(l, m) for l, m, _, _ in res.surface]
        assert lattice == sorted(lattice)
        assert len(lattice) == 9  # {0, .5, 1}^2

    def test_threads_do_not_change_result(self):
        problem, grid = self.small_problem()
        cfg = SimulationConfig("UPW", "EXACT", BlendParams(1.0, 1.0))
        sc = SearchConfig(mode="partial-1d", coarse_step=0.2, refine_rounds=1)
        a = estimate_coupling(problem, cfg, grid, 0.25, sc, threads=1)
        b = estimate_coupling(problem, cfg, grid, 0.25, sc, threads=4)
        assert (a.lam, a.mu) == (b.lam, b.mu)
        assert a.surface == b.surface

    def test_diverging_candidates_are_skipped(self):
        # Courant number 1.3: the pure-LW end of the sweep overflows, candidates
        # coupled to the exact solver stay finite and win
        datum = box(0.2, 0.5, height=1e305)
        problem = Problem(kind="advection", initial_datum=datum,
                          velocity=velocity_constant(1.0),
                          exact_solution=lambda x, t: datum(x - t),
                          speed_bound=1.0, boundary=BoundaryPolicy("zero", "copy"))
        grid = build_grid(0.0, 2.0, 41, 1.3 * 40 * (2.0 / 40), 40)
        cfg = SimulationConfig("LW", "EXACT", BlendParams(1.0, 1.0))
        with np.errstate(over="ignore", invalid="ignore"):
            res = estimate_coupling(problem, cfg, grid, 0.5,
                                    SearchConfig(mode="partial-1d", coarse_step=0.25,
                                                 refine_rounds=0))
        surface = {(l, m): dw for l, m, dw, _ in res.surface}
        assert surface[(1.0, 1.0)] == float("inf")
        assert np.isfinite(res.indicator_w)
        assert res.lam < 1.0


class TestOptimalLambdaLwBw:
    def test_formula_values(self):
        assert optimal_lambda_lwbw(0.5) == pytest.approx(0.5)
        assert optimal_lambda_lwbw(1.0) == pytest.approx(1.0 / 3.0)

    @pytest.mark.parametrize("beta", [0.0, -0.5, 1.0001])
    def test_range_checked(self, beta):
        with pytest.raises(ValueError):
            optimal_lambda_lwbw(beta)
