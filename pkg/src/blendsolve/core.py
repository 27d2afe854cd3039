"""Grids, cell fields and problem definitions for the 1-D solvers.

The grid is cell-centered: nodes x_i = x_lo + i*dx are cell centers with
dx = (x_hi - x_lo)/(n_cells - 1), and cell C_i = [x_i - dx/2, x_i + dx/2).
This convention slightly overhangs [x_lo, x_hi] by dx/2 on each side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class InvalidGridError(ValueError):
    """Raised for degenerate domains or cell/step counts."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform space/time discretization of [x_lo, x_hi] x [0, final_time]."""

    x_lo: float
    x_hi: float
    n_cells: int
    final_time: float
    n_steps: int

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / (self.n_cells - 1)

    @property
    def dt(self) -> float:
        return self.final_time / self.n_steps

    @property
    def cell_centers(self) -> np.ndarray:
        return self.x_lo + self.dx * np.arange(self.n_cells)

    @property
    def interfaces(self) -> np.ndarray:
        """The n_cells + 1 cell edges, from x_lo - dx/2 to x_hi + dx/2."""
        return self.x_lo + self.dx * (np.arange(self.n_cells + 1) - 0.5)

    def cell_of(self, positions: np.ndarray) -> np.ndarray:
        """Half-open cell binding: a point on a right edge belongs to the next cell."""
        return np.floor((np.asarray(positions) - (self.x_lo - 0.5 * self.dx)) / self.dx).astype(np.int64)


def build_grid(x_lo: float, x_hi: float, n_cells: int, final_time: float, n_steps: int) -> Grid1D:
    if not (np.isfinite(x_lo) and np.isfinite(x_hi)) or x_hi <= x_lo:
        raise InvalidGridError(f"degenerate domain [{x_lo}, {x_hi}]")
    if n_cells < 3:
        raise InvalidGridError(f"n_cells must be >= 3, got {n_cells}")
    if n_steps < 1:
        raise InvalidGridError(f"n_steps must be >= 1, got {n_steps}")
    if not final_time > 0:
        raise InvalidGridError(f"final_time must be positive, got {final_time}")
    return Grid1D(float(x_lo), float(x_hi), int(n_cells), float(final_time), int(n_steps))


@dataclass(frozen=True)
class BoundaryPolicy:
    """Ghost-cell rule per side: "zero" inserts zeros, "copy" repeats the nearest cell."""

    left: str = "zero"
    right: str = "copy"

    def __post_init__(self):
        for side in (self.left, self.right):
            if side not in ("zero", "copy"):
                raise ValueError(f"unknown ghost rule {side!r}")

    def pad(self, values: np.ndarray, width: int) -> np.ndarray:
        """Extend a cell array by `width` ghost cells on each side."""
        left = np.full(width, values[0]) if self.left == "copy" else np.zeros(width)
        right = np.full(width, values[-1]) if self.right == "copy" else np.zeros(width)
        return np.concatenate([left, values, right])


@dataclass(frozen=True)
class CellField:
    """Per-cell averaged density values on a Grid1D, tagged with its time level."""

    grid: Grid1D
    values: np.ndarray
    time: float = 0.0
    stability_warning: bool = False

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != (self.grid.n_cells,):
            raise ValueError(f"expected {self.grid.n_cells} values, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class Problem:
    """Velocity field or flux, initial datum and boundary treatment for one run.

    For kind="advection", `velocity` is A(x). For kind="conservation-law",
    `flux` is f(u) and `particle_speed` is the transport speed A(u); when
    particle_speed is omitted it falls back to f(u)/u, guarded near u = 0
    by a centered difference for f'(0).
    """

    kind: str
    initial_datum: Callable[[np.ndarray], np.ndarray]
    speed_bound: float
    velocity: Callable[[np.ndarray], np.ndarray] | None = None
    flux: Callable[[np.ndarray], np.ndarray] | None = None
    particle_speed: Callable[[np.ndarray], np.ndarray] | None = None
    exact_solution: Callable[[np.ndarray, float], np.ndarray] | None = None
    boundary: BoundaryPolicy = field(default_factory=BoundaryPolicy)
    flux_critical_points: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("advection", "conservation-law"):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if not self.speed_bound > 0:
            raise ValueError("speed_bound must be positive")
        if self.kind == "advection" and self.velocity is None:
            raise ValueError("advection problem needs a velocity field")
        if self.kind == "conservation-law" and self.flux is None:
            raise ValueError("conservation-law problem needs a flux")

    def transport_speed(self, u: np.ndarray) -> np.ndarray:
        """Particle speed A(u) for conservation laws."""
        if self.particle_speed is not None:
            return self.particle_speed(u)
        u = np.asarray(u, dtype=np.float64)
        # f(u)/u, with f'(0) by centered difference where u ~ 0
        h = 1e-6
        slope0 = (self.flux(np.asarray(h)) - self.flux(np.asarray(-h))) / (2 * h)
        safe = np.where(np.abs(u) < 1e-12, 1.0, u)
        return np.where(np.abs(u) < 1e-12, slope0, self.flux(u) / safe)


def project_function(g: Callable[[np.ndarray], np.ndarray], grid: Grid1D,
                     quadrature_points: int = 8) -> CellField:
    """Cell averages of g by composite Simpson with `quadrature_points` subintervals per cell."""
    if quadrature_points <= 0 or quadrature_points % 2 != 0:
        raise ValueError(f"quadrature_points must be a positive even count, got {quadrature_points}")
    m = quadrature_points
    # Simpson weights (1,4,2,...,4,1)*h/3 over each cell, normalized by dx
    w = np.ones(m + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= 1.0 / (3.0 * m)
    offsets = np.linspace(-0.5 * grid.dx, 0.5 * grid.dx, m + 1)
    nodes = grid.cell_centers[:, None] + offsets[None, :]
    flat = nodes.ravel()
    samples = np.broadcast_to(np.asarray(g(flat), dtype=np.float64), flat.shape).reshape(nodes.shape)
    return CellField(grid, samples @ w)


def courant_number(grid: Grid1D, problem: Problem) -> float:
    """dt * speed_bound / dx."""
    return grid.dt * problem.speed_bound / grid.dx


def total_mass(field: CellField) -> float:
    """Sum of cell values times dx."""
    return float(np.sum(field.values) * field.grid.dx)
