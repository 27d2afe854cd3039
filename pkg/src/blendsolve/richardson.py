"""A-priori coupling-weight estimation from coarse-grid pair runs.

Two runs of the blended scheme on a coarse grid and its 2x refinement give an
L1 discrepancy indicator per candidate (lam, mu); the estimate is the argmin
of that indicator, searched on a coarse lattice and refined locally. No exact
solution is needed. The closed-form optimum for the LW+BW pair is also here.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from math import ceil

import numpy as np

from .blend import BlendParams, DivergedError, SimulationConfig, run_simulation
from .core import CellField, Grid1D, Problem, build_grid


@dataclass(frozen=True)
class CoarsePair:
    """A coarse grid and its 2x space/time refinement spanning the same domain."""

    g_prime: Grid1D
    g_second: Grid1D
    n_particles_prime: int
    n_particles_second: int


def make_coarse_pair(grid: Grid1D, s: float, n_particles: int = 0) -> CoarsePair:
    """Scale cell/step/particle counts by s (rounding up), then double them."""
    if not 0.0 < s <= 0.5:
        raise ValueError(f"scale s must lie in (0, 1/2], got {s}")
    nc = ceil(s * grid.n_cells)
    nt = ceil(s * grid.n_steps)
    np_prime = ceil(s * n_particles) if n_particles else 0
    g1 = build_grid(grid.x_lo, grid.x_hi, nc, grid.final_time, nt)
    g2 = build_grid(grid.x_lo, grid.x_hi, 2 * nc, grid.final_time, 2 * nt)
    return CoarsePair(g1, g2, np_prime, 2 * np_prime)


def node_correspondence(i: int, pair: CoarsePair) -> int:
    """Index of the fine-grid node nearest to coarse node i; ties go to the lower index."""
    if not 0 <= i < pair.g_prime.n_cells:
        raise ValueError(f"node {i} outside the coarse grid")
    x = pair.g_prime.x_lo + i * pair.g_prime.dx
    q = (x - pair.g_second.x_lo) / pair.g_second.dx
    j = int(np.floor(q + 0.5))
    if q - np.floor(q) == 0.5:  # exact midpoint: prefer the lower index
        j = int(np.floor(q))
    return min(max(j, 0), pair.g_second.n_cells - 1)


@lru_cache(maxsize=64)
def _correspondence_table(pair: CoarsePair) -> np.ndarray:
    return np.array([node_correspondence(i, pair) for i in range(pair.g_prime.n_cells)])


def richardson_indicator(sol_prime: CellField, sol_second: CellField, pair: CoarsePair) -> float:
    """Sum over coarse nodes of |coarse - mapped fine| * coarse dx."""
    h = _correspondence_table(pair)
    diff = np.abs(sol_prime.values - sol_second.values[h])
    return float(np.sum(diff) * pair.g_prime.dx)


@dataclass(frozen=True)
class SearchConfig:
    """Lattice search over the coupling weights with local refinement."""

    mode: str = "full-2d"          # "full-2d" | "partial-1d" (mu fixed to 1)
    coarse_step: float = 0.05
    refine_rounds: int = 2         # each round halves the step around the incumbent

    def __post_init__(self):
        if self.mode not in ("full-2d", "partial-1d"):
            raise ValueError(f"unknown search mode {self.mode!r}")
        if not 0.0 < self.coarse_step <= 1.0:
            raise ValueError("coarse_step must lie in (0, 1]")
        if self.refine_rounds < 0:
            raise ValueError("refine_rounds must be >= 0")


@dataclass(frozen=True)
class EstimateResult:
    lam: float
    mu: float
    indicator_w: float
    indicator_v: float
    surface: tuple[tuple[float, float, float, float], ...]  # (lam, mu, delta_w, delta_v)


def _axis(center: float, step: float) -> np.ndarray:
    vals = center + step * np.arange(-2, 3)
    return np.unique(np.clip(np.round(vals, 12), 0.0, 1.0))


def _candidate_indicators(problem: Problem, config: SimulationConfig, pair: CoarsePair,
                          lam: float, mu: float) -> tuple[float, float]:
    """delta_w, delta_v for one candidate; +inf for runs that diverge."""
    h = _correspondence_table(pair)
    params = BlendParams(lam, mu)
    try:
        runs = []
        for g, n_p in ((pair.g_prime, pair.n_particles_prime),
                       (pair.g_second, pair.n_particles_second)):
            cfg = replace(config, params=params, n_particles=n_p, record="final")
            runs.append(run_simulation(problem, g, cfg))
    except DivergedError:
        return float("inf"), float("inf")
    dw = float(np.sum(np.abs(runs[0].w.values - runs[1].w.values[h])) * pair.g_prime.dx)
    dv = float(np.sum(np.abs(runs[0].v.values - runs[1].v.values[h])) * pair.g_prime.dx)
    return dw, dv


def estimate_coupling(problem: Problem, config: SimulationConfig, grid: Grid1D, s: float,
                      search: SearchConfig | None = None, threads: int = 1) -> EstimateResult:
    """Argmin of the coarse-pair indicator for w over the searched lattice.

    Candidates are evaluated independently (optionally in a thread pool) and
    reduced in lattice order: ties resolve to the smallest lam, then the
    smallest mu, regardless of completion order.
    """
    search = search or SearchConfig()
    pair = make_coarse_pair(grid, s, config.n_particles)

    cache: dict[tuple[float, float], tuple[float, float]] = {}

    def evaluate(cands: list[tuple[float, float]]) -> None:
        todo = [c for c in cands if c not in cache]
        if threads > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(
                    lambda c: _candidate_indicators(problem, config, pair, *c), todo))
        else:
            results = [_candidate_indicators(problem, config, pair, *c) for c in todo]
        cache.update(zip(todo, results))

    def lattice(lams: np.ndarray, mus: np.ndarray) -> list[tuple[float, float]]:
        return [(float(l), float(m)) for l in lams for m in mus]

    step = search.coarse_step
    lams = np.round(np.arange(0.0, 1.0 + 1e-9, step), 12)
    mus = np.array([1.0]) if search.mode == "partial-1d" else lams.copy()
    cands = lattice(lams, mus)
    evaluate(cands)

    def best(cands: list[tuple[float, float]]) -> tuple[float, float]:
        incumbent, best_dw = None, float("inf")
        for c in sorted(cands):
            dw = cache[c][0]
            if dw < best_dw:
                incumbent, best_dw = c, dw
        if incumbent is None:
            raise RuntimeError("every candidate diverged")
        return incumbent

    inc = best(cands)
    for _ in range(search.refine_rounds):
        step *= 0.5
        lams = _axis(inc[0], step)
        mus = np.array([1.0]) if search.mode == "partial-1d" else _axis(inc[1], step)
        cands = lattice(lams, mus)
        evaluate(cands)
        inc = best(list(cache.keys()))

    surface = tuple((l, m, cache[(l, m)][0], cache[(l, m)][1]) for l, m in sorted(cache.keys()))
    dw, dv = cache[inc]
    return EstimateResult(inc[0], inc[1], dw, dv, surface)


def optimal_lambda_lwbw(beta: float) -> float:
    """Dispersion-cancelling weight (2 - beta)/3 for the LW+BW pair at Courant number beta."""
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"Courant number must lie in (0, 1], got {beta}")
    return (2.0 - beta) / 3.0
