"""The blended time step coupling two explicit solvers, and the run driver.

One step advances two solutions at once:

    w_next = lam * S1[w] + (1 - lam) * S2[v]
    v_next = (1 - mu) * S1[w] + mu * S2[v]

with weights lam, mu in [0, 1]. S2 may be a second grid scheme or the
particle solver, in which case the deposited density plays the role of
S2[v] and the particle masses are corrected toward v_next afterwards
(skipped when mu == 1, where v_next is the deposition itself).

Weights may vary per cell through a policy: a decreasing function of the
particle occupancy, or an inside/outside split on the particle support.
Cell-dependent weights give up exact mass conservation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import CellField, Grid1D, Problem, project_function, total_mass
from .eulerian import eulerian_step
from .lagrangian import (
    ParticleSet,
    advect_particles,
    init_particles,
    init_particles_localized,
    particle_speed_cl,
    reconstruct_density,
    support_mask,
    update_masses,
)


class DivergedError(RuntimeError):
    def __init__(self, step: int):
        super().__init__(f"run diverged (non-finite values) at step {step}")
        self.step = step


def _check_weight(x: float, name: str) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")
    return x


@dataclass(frozen=True)
class BlendParams:
    """Constant coupling weights."""

    lam: float
    mu: float

    def __post_init__(self):
        _check_weight(self.lam, "lam")
        _check_weight(self.mu, "mu")

    def weights(self, occupancy, support):
        return self.lam, self.mu


@dataclass(frozen=True)
class OccupancyLambda:
    """lam(count) = lam_hi - (lam_hi - lam_lo) * min(count/count_ref, 1), per cell.

    Decreasing in the particle count: densely covered cells lean on the
    particle solution, sparse ones on the grid scheme.
    """

    lam_hi: float
    lam_lo: float
    count_ref: float
    mu: float = 1.0

    def __post_init__(self):
        _check_weight(self.lam_hi, "lam_hi")
        _check_weight(self.lam_lo, "lam_lo")
        _check_weight(self.mu, "mu")
        if self.count_ref <= 0:
            raise ValueError("count_ref must be positive")

    def weights(self, occupancy, support):
        frac = np.minimum(np.asarray(occupancy, dtype=np.float64) / self.count_ref, 1.0)
        return self.lam_hi - (self.lam_hi - self.lam_lo) * frac, self.mu


@dataclass(frozen=True)
class MaskedLambda:
    """lam_in inside the particle support, lam_out outside."""

    lam_in: float
    lam_out: float
    mu: float = 1.0

    def __post_init__(self):
        _check_weight(self.lam_in, "lam_in")
        _check_weight(self.lam_out, "lam_out")
        _check_weight(self.mu, "mu")

    def weights(self, occupancy, support):
        return np.where(support, self.lam_in, self.lam_out), self.mu


@dataclass(frozen=True)
class BlendState:
    w: CellField
    v: CellField
    particles: ParticleSet | None = None
    step: int = 0


def _combine(w_hat: CellField, v_hat: CellField, lam, mu) -> tuple[CellField, CellField]:
    """Apply the convex combination; scalar weights 0 and 1 short-circuit exactly."""
    grid, t = w_hat.grid, w_hat.time
    warn = w_hat.stability_warning or v_hat.stability_warning

    def mix(a, wa, b):
        if np.isscalar(a) or np.ndim(a) == 0:
            if a == 1.0:
                return wa.values
            if a == 0.0:
                return b.values
        return a * wa.values + (1.0 - np.asarray(a)) * b.values

    w_new = CellField(grid, mix(lam, w_hat, v_hat), time=t, stability_warning=warn)
    v_new = CellField(grid, mix(mu, v_hat, w_hat), time=t, stability_warning=warn)
    return w_new, v_new


def blended_step_ee(state: BlendState, s1: str, s2: str, params, problem: Problem) -> BlendState:
    """One blended step with two grid schemes."""
    w_hat = eulerian_step(s1, state.w, problem, state.w.grid.dt)
    v_hat = eulerian_step(s2, state.v, problem, state.v.grid.dt)
    lam, mu = params.weights(None, None)
    w_new, v_new = _combine(w_hat, v_hat, lam, mu)
    return BlendState(w_new, v_new, state.particles, state.step + 1)


def blended_step_multiscale(state: BlendState, s1: str, params, problem: Problem,
                            ode_solver: str = "EE", speed_source: str = "W") -> BlendState:
    """One blended step with the particle solver on the second slot.

    Order per step: grid scheme on w, particle advection, mass deposition,
    convex combination, then mass correction toward the new v (skipped for
    mu == 1). Conservation-law particle speeds are read from w or v at the
    current time, per `speed_source`.
    """
    if state.particles is None:
        raise ValueError("multiscale step needs particles in the state")
    grid = state.w.grid
    ps = state.particles

    w_hat = eulerian_step(s1, state.w, problem, grid.dt)

    if problem.kind == "conservation-law":
        src = state.w if speed_source == "W" else state.v
        speeds = particle_speed_cl(ps, src, problem)
        ps = advect_particles(ps, speeds, grid.dt, ode_solver)
    else:
        ps = advect_particles(ps, problem.velocity, grid.dt, ode_solver)

    v_hat_field = reconstruct_density(ps, grid)
    v_hat = CellField(grid, v_hat_field.values, time=w_hat.time)

    lam, mu = params.weights(ps.occupancy(), support_mask(ps, grid))
    w_new, v_new = _combine(w_hat, v_hat, lam, mu)

    if not (np.isscalar(mu) and mu == 1.0):
        ps = update_masses(ps, v_new, v_hat, grid)

    return BlendState(w_new, v_new, ps, state.step + 1)


@dataclass(frozen=True)
class MultiBlendMatrix:
    """Row-stochastic weight matrix for blending L schemes at once."""

    weights: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.weights, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("weight matrix must be square")
        if np.any(m < 0.0) or np.any(m > 1.0):
            raise ValueError("weights must lie in [0, 1]")
        if np.max(np.abs(m.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("rows must sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "weights", m)


def multi_blend_step(states: Sequence[CellField], schemes: Sequence[str],
                     matrix: MultiBlendMatrix, problem: Problem) -> list[CellField]:
    """out_i = sum_j matrix[i, j] * S_j[state_j]."""
    if len(states) != len(schemes) or len(states) != matrix.weights.shape[0]:
        raise ValueError("states, schemes and matrix size must agree")
    stepped = [eulerian_step(s, st, problem, st.grid.dt) for s, st in zip(schemes, states)]
    grid, t = stepped[0].grid, stepped[0].time
    out = []
    for row in matrix.weights:
        vals = sum(row[j] * stepped[j].values for j in range(len(stepped)))
        out.append(CellField(grid, vals, time=t))
    return out


@dataclass(frozen=True)
class SimulationConfig:
    """Everything one run needs besides the problem and the grid."""

    s1: str
    s2: str | None = None               # None selects the particle solver
    params: object = field(default_factory=lambda: BlendParams(1.0, 1.0))
    n_particles: int = 0
    ode_solver: str = "EE"
    speed_source: str = "W"
    record: str = "final"               # "final" | "trajectory"
    seed_interval: tuple[float, float] | None = None   # localized particle seeding

    @property
    def multiscale(self) -> bool:
        return self.s2 is None


MAX_SNAPSHOTS = 512


@dataclass(frozen=True)
class RunReport:
    """Final fields plus the full-resolution mass and max histories."""

    w: CellField
    v: CellField
    particles: ParticleSet | None
    steps: np.ndarray
    times: np.ndarray
    mass_w: np.ndarray
    mass_v: np.ndarray
    max_w: np.ndarray
    snapshots: tuple[BlendState, ...] = ()


def initial_state(problem: Problem, grid: Grid1D, config: SimulationConfig) -> BlendState:
    u0 = project_function(problem.initial_datum, grid)
    particles = None
    if config.multiscale:
        if config.seed_interval is not None:
            particles = init_particles_localized(problem, grid, config.n_particles,
                                                 *config.seed_interval)
        else:
            particles = init_particles(problem, grid, config.n_particles)
    return BlendState(u0, u0, particles, 0)


def run_simulation(problem: Problem, grid: Grid1D, config: SimulationConfig,
                   state: BlendState | None = None) -> RunReport:
    """Drive the blended scheme over all time steps, recording mass/max series."""
    if state is None:
        state = initial_state(problem, grid, config)
    n = grid.n_steps
    mass_w = np.empty(n + 1)
    mass_v = np.empty(n + 1)
    max_w = np.empty(n + 1)
    mass_w[0], mass_v[0] = total_mass(state.w), total_mass(state.v)
    max_w[0] = float(np.max(state.w.values))

    stride = max(1, -(-(n + 1) // MAX_SNAPSHOTS))  # ceil division
    snapshots = [state] if config.record == "trajectory" else []

    for k in range(1, n + 1):
        if config.multiscale:
            state = blended_step_multiscale(state, config.s1, config.params, problem,
                                            config.ode_solver, config.speed_source)
        else:
            state = blended_step_ee(state, config.s1, config.s2, config.params, problem)
        if not (np.isfinite(state.w.values).all() and np.isfinite(state.v.values).all()):
            raise DivergedError(k)
        mass_w[k], mass_v[k] = total_mass(state.w), total_mass(state.v)
        max_w[k] = float(np.max(state.w.values))
        if config.record == "trajectory" and (k % stride == 0 or k == n):
            snapshots.append(state)

    return RunReport(
        w=state.w, v=state.v, particles=state.particles,
        steps=np.arange(n + 1), times=np.arange(n + 1) * grid.dt,
        mass_w=mass_w, mass_v=mass_v, max_w=max_w,
        snapshots=tuple(snapshots),
    )
