"""Particle transport: seeding, ODE advection, mass deposition and correction.

Particles carry time-dependent mass weights. Density on the grid is recovered
by summing the masses of the particles inside each cell and dividing by dx;
the correction step shifts those masses so the deposited density matches a
prescribed cell field. Particles leaving the domain (past the outermost cell
edges) are retired and their mass is logged to `exited_mass`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CellField, Grid1D, Problem


@dataclass(frozen=True)
class ParticleSet:
    """Particle positions and masses bound to a grid.

    `alive` marks particles still inside the domain; `cell_index` is the
    half-open cell binding of each alive particle (-1 once exited).
    """

    grid: Grid1D
    positions: np.ndarray
    masses: np.ndarray
    alive: np.ndarray
    cell_index: np.ndarray
    exited_mass: float = 0.0

    def __post_init__(self):
        for name, dtype in (("positions", np.float64), ("masses", np.float64),
                            ("alive", np.bool_), ("cell_index", np.int64)):
            arr = np.asarray(getattr(self, name), dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (len(self.positions) == len(self.masses) == len(self.alive) == len(self.cell_index)):
            raise ValueError("particle arrays must share one length")

    @property
    def n_alive(self) -> int:
        return int(np.count_nonzero(self.alive))

    def occupancy(self) -> np.ndarray:
        """Per-cell count of alive particles."""
        return np.bincount(self.cell_index[self.alive], minlength=self.grid.n_cells)


def _bind(grid: Grid1D, positions: np.ndarray, masses: np.ndarray,
          alive: np.ndarray, exited_mass: float) -> ParticleSet:
    """Refresh cell indices, retiring particles past the outermost edges."""
    idx = grid.cell_of(positions)
    inside = alive & (idx >= 0) & (idx < grid.n_cells)
    newly_exited = alive & ~inside
    if np.any(newly_exited):
        exited_mass += float(np.sum(masses[newly_exited]))
        masses = np.where(newly_exited, 0.0, masses)
    idx = np.where(inside, idx, -1)
    return ParticleSet(grid, positions, masses, inside, idx, exited_mass)


def init_particles(problem: Problem, grid: Grid1D, n_particles: int) -> ParticleSet:
    """Uniform seeding across the cell centers, masses from the pointwise initial datum."""
    if n_particles < 2:
        raise ValueError(f"n_particles must be >= 2, got {n_particles}")
    spacing = (grid.x_hi - grid.x_lo) / (n_particles - 1)
    positions = grid.x_lo + spacing * np.arange(n_particles)
    per_cell = n_particles / grid.n_cells
    masses = np.asarray(problem.initial_datum(positions), dtype=np.float64) * (grid.dx / per_cell)
    alive = np.ones(n_particles, dtype=bool)
    return _bind(grid, positions, masses, alive, 0.0)


def init_particles_localized(problem: Problem, grid: Grid1D, n_particles: int,
                             x_left: float, x_right: float) -> ParticleSet:
    """Seed particles only on [x_left, x_right]; each mass covers span/n_particles."""
    if n_particles < 2:
        raise ValueError(f"n_particles must be >= 2, got {n_particles}")
    if not x_left < x_right:
        raise ValueError("x_left must be < x_right")
    positions = np.linspace(x_left, x_right, n_particles)
    masses = np.asarray(problem.initial_datum(positions), dtype=np.float64) \
        * ((x_right - x_left) / n_particles)
    alive = np.ones(n_particles, dtype=bool)
    return _bind(grid, positions, masses, alive, 0.0)


def advect_particles(ps: ParticleSet, speed_of, dt: float, solver: str = "EE") -> ParticleSet:
    """Move alive particles one step; `speed_of` is A(x) or an array of frozen speeds.

    EE is one forward-Euler step, RK4 the classical 4-stage step. With frozen
    per-particle speeds every one-step solver collapses to the same update.
    """
    if solver not in ("EE", "RK4"):
        raise ValueError(f"unknown ODE solver {solver!r}")
    p = ps.positions.astype(np.float64)
    if callable(speed_of):
        if solver == "EE":
            p_new = p + dt * np.asarray(speed_of(p), dtype=np.float64)
        else:
            k1 = np.asarray(speed_of(p), dtype=np.float64)
            k2 = np.asarray(speed_of(p + 0.5 * dt * k1), dtype=np.float64)
            k3 = np.asarray(speed_of(p + 0.5 * dt * k2), dtype=np.float64)
            k4 = np.asarray(speed_of(p + dt * k3), dtype=np.float64)
            p_new = p + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    else:
        p_new = p + dt * np.asarray(speed_of, dtype=np.float64)
    p_new = np.where(ps.alive, p_new, p)
    return _bind(ps.grid, p_new, ps.masses, ps.alive, ps.exited_mass)


def reconstruct_density(ps: ParticleSet, grid: Grid1D) -> CellField:
    """Per-cell sum of alive-particle masses divided by dx; empty cells read 0."""
    sums = np.bincount(ps.cell_index[ps.alive],
                       weights=ps.masses[ps.alive],
                       minlength=grid.n_cells)
    return CellField(grid, sums / grid.dx)


def update_masses(ps: ParticleSet, v_new: CellField, v_hat: CellField,
                  grid: Grid1D) -> ParticleSet:
    """Shift particle masses so the deposited density matches v_new cellwise.

    Each alive particle in cell i receives (dx/count_i)*(v_new_i - v_hat_i);
    cells without particles are untouched. Masses may go negative; clipping
    would break the exact-deposition property.
    """
    if v_new.values.shape != (grid.n_cells,) or v_hat.values.shape != (grid.n_cells,):
        raise ValueError("field shape does not match the grid")
    counts = ps.occupancy()
    delta = np.zeros(grid.n_cells)
    occupied = counts > 0
    delta[occupied] = grid.dx * (v_new.values[occupied] - v_hat.values[occupied]) / counts[occupied]
    masses = np.where(ps.alive, ps.masses + delta[ps.cell_index], ps.masses)
    return ParticleSet(grid, ps.positions, masses, ps.alive, ps.cell_index, ps.exited_mass)


def particle_speed_cl(ps: ParticleSet, field: CellField, problem: Problem) -> np.ndarray:
    """Per-particle transport speeds A(u) read from the cell each particle sits in."""
    if problem.kind != "conservation-law":
        raise ValueError("particle_speed_cl applies to conservation-law problems")
    speeds = np.zeros(len(ps.positions))
    idx = ps.cell_index[ps.alive]
    speeds[ps.alive] = problem.transport_speed(field.values[idx])
    return speeds


def support_mask(ps: ParticleSet, grid: Grid1D) -> np.ndarray:
    """True on the contiguous cell range spanned by the alive particles."""
    mask = np.zeros(grid.n_cells, dtype=bool)
    if ps.n_alive == 0:
        return mask
    idx = ps.cell_index[ps.alive]
    mask[int(idx.min()):int(idx.max()) + 1] = True
    return mask


def particle_csv_rows(ps: ParticleSet, step: int) -> list[tuple[int, int, float, float]]:
    """(step, alpha, position, mass) rows for the alive particles."""
    return [(step, int(a), float(ps.positions[a]), float(ps.masses[a]))
            for a in np.flatnonzero(ps.alive)]
