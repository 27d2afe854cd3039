"""Explicit one-step Eulerian solvers in conservative flux form.

Every scheme advances a CellField by one dt through
    u_i <- u_i - (dt/dx) * (F_{i+1/2} - F_{i-1/2}),
so total mass changes only through the outermost interfaces.

Scheme ids:
    UPW      donor-cell upwind, velocity split at cell centers (I order)
    LW       Lax-Wendroff, constant velocity only (II order)
    BW       Beam-Warming second-order upwind, constant velocity only (II order)
    RLW      two-step predictor-corrector Lax-Wendroff (II order)
    WENO2    third-order WENO reconstruction + SSP-RK3 in time (III order)
    GODUNOV  exact Riemann flux for scalar conservation laws (I order)
    EXACT    cell averages of the problem's exact solution at the new time
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .core import CellField, Grid1D, Problem, project_function

ADVECTION_SCHEMES = ("UPW", "LW", "BW", "RLW", "WENO2")
ALL_SCHEMES = ADVECTION_SCHEMES + ("GODUNOV", "EXACT")

# largest Courant number each scheme tolerates before the result is flagged
_CFL_LIMIT = {"UPW": 1.0, "LW": 1.0, "BW": 2.0, "RLW": 1.0, "WENO2": 1.0, "GODUNOV": 1.0}

_WENO_EPS = 1e-9


def _require_constant_velocity(a: np.ndarray, scheme: str) -> float:
    if np.max(a) - np.min(a) > 1e-13 * max(1.0, np.max(np.abs(a))):
        raise ValueError(f"{scheme} supports constant velocity only")
    return float(a[0])


def numerical_flux_godunov(u_left, u_right, f, critical_points: tuple[float, ...] = ()):
    """Godunov interface flux: min of f over [u_l, u_r] if u_l <= u_r, else max over [u_r, u_l].

    The extremum is taken over the endpoints plus any supplied critical points
    of f that fall inside the interval, which is exact for fluxes whose
    stationary points are known (u = 1/2 for the traffic flux u(1-u)).
    """
    ul = np.asarray(u_left, dtype=np.float64)
    ur = np.asarray(u_right, dtype=np.float64)
    fl, fr = f(ul), f(ur)
    lo = np.minimum(ul, ur)
    hi = np.maximum(ul, ur)
    fmin = np.minimum(fl, fr)
    fmax = np.maximum(fl, fr)
    for c in critical_points:
        inside = (lo <= c) & (c <= hi)
        fc = f(np.asarray(c, dtype=np.float64))
        fmin = np.where(inside, np.minimum(fmin, fc), fmin)
        fmax = np.where(inside, np.maximum(fmax, fc), fmax)
    out = np.where(ul <= ur, fmin, fmax)
    return out if out.ndim else float(out)


def _weno_edge(um1, u0, up1):
    """Third-order WENO value at the cell edge between u0 and up1, upwinded from u0.

    Two 2-cell candidate stencils {um1, u0} and {u0, up1} with linear weights
    1/3, 2/3 and Jiang-Shu smoothness indicators. Passing reversed arguments
    gives the mirrored (downwind-from-the-right) reconstruction.
    """
    p0 = -0.5 * um1 + 1.5 * u0
    p1 = 0.5 * u0 + 0.5 * up1
    b0 = (u0 - um1) ** 2
    b1 = (up1 - u0) ** 2
    a0 = (1.0 / 3.0) / (_WENO_EPS + b0) ** 2
    a1 = (2.0 / 3.0) / (_WENO_EPS + b1) ** 2
    return (a0 * p0 + a1 * p1) / (a0 + a1)


def _make_advection_stepper(scheme: str, grid: Grid1D, problem: Problem):
    """Build a values -> values map for one conservative step of an advection scheme."""
    dx, dt = grid.dx, grid.dt
    c = dt / dx
    centers = grid.cell_centers
    faces = grid.interfaces
    pad = problem.boundary.pad
    a_centers = np.broadcast_to(np.asarray(problem.velocity(centers), dtype=np.float64),
                                centers.shape).copy()
    a_faces = np.broadcast_to(np.asarray(problem.velocity(faces), dtype=np.float64),
                              faces.shape).copy()

    if scheme == "UPW":
        # ghost-cell velocities continue A(x) beyond the domain
        a_ext = np.broadcast_to(np.asarray(
            problem.velocity(np.concatenate(([centers[0] - dx], centers, [centers[-1] + dx]))),
            dtype=np.float64), (grid.n_cells + 2,))
        a_plus = np.maximum(a_ext[:-1], 0.0)
        a_minus = np.minimum(a_ext[1:], 0.0)

        def step(u):
            ue = pad(u, 1)
            flux = a_plus * ue[:-1] + a_minus * ue[1:]
            return u - c * (flux[1:] - flux[:-1])

        return step

    if scheme in ("LW", "BW"):
        a = _require_constant_velocity(a_centers, scheme)
        beta = a * c

        if scheme == "LW":
            def step(u):
                ue = pad(u, 1)
                flux = 0.5 * a * (ue[:-1] + ue[1:]) - 0.5 * a * beta * (ue[1:] - ue[:-1])
                return u - c * (flux[1:] - flux[:-1])
        elif a >= 0:
            def step(u):
                ue = pad(u, 2)
                # F_{i+1/2} = a*(u_i + (1-beta)/2*(u_i - u_{i-1})), upwind from the left
                flux = a * (ue[1:-2] + 0.5 * (1.0 - beta) * (ue[1:-2] - ue[:-3]))
                return u - c * (flux[1:] - flux[:-1])
        else:
            def step(u):
                ue = pad(u, 2)
                # mirrored stencil for a < 0, upwind from the right
                flux = a * (ue[2:-1] - 0.5 * (1.0 + beta) * (ue[3:] - ue[2:-1]))
                return u - c * (flux[1:] - flux[:-1])

        return step

    if scheme == "RLW":
        a_all = np.broadcast_to(np.asarray(
            problem.velocity(np.concatenate((
                [centers[0] - 2 * dx, centers[0] - dx], centers,
                [centers[-1] + dx, centers[-1] + 2 * dx]))),
            dtype=np.float64), (grid.n_cells + 4,))

        def step(u):
            # two-step predictor-corrector on g = A(x)u: backward-difference
            # predictor over dt, forward-difference corrector, averaged into
            # the conservative flux F_{i+1/2} = (g_i + g*_{i+1})/2. Equals LW
            # for constant velocity.
            ue = pad(u, 2)
            g = a_all * ue
            u_star = ue[1:] - c * (g[1:] - g[:-1])
            g_star = a_all[1:] * u_star
            flux = 0.5 * (g[1:-2] + g_star[1:-1])
            return u - c * (flux[1:] - flux[:-1])

        return step

    if scheme == "WENO2":
        def rhs(u):
            ue = pad(u, 2)
            # edge j-1/2 for j = 0..n: left cell is ue[1:-2], right cell ue[2:-1]
            left = _weno_edge(ue[:-3], ue[1:-2], ue[2:-1])
            right = _weno_edge(ue[3:], ue[2:-1], ue[1:-2])
            state = np.where(a_faces >= 0.0, left, right)
            flux = a_faces * state
            return -(flux[1:] - flux[:-1]) / dx

        def step(u):
            u1 = u + dt * rhs(u)
            u2 = 0.75 * u + 0.25 * (u1 + dt * rhs(u1))
            return u / 3.0 + (2.0 / 3.0) * (u2 + dt * rhs(u2))

        return step

    raise ValueError(f"unknown advection scheme {scheme!r}")


def _make_godunov_stepper(grid: Grid1D, problem: Problem):
    c = grid.dt / grid.dx
    pad = problem.boundary.pad
    f = problem.flux
    crit = problem.flux_critical_points

    def step(u):
        ue = pad(u, 1)
        flux = numerical_flux_godunov(ue[:-1], ue[1:], f, crit)
        return u - c * (flux[1:] - flux[:-1])

    return step


@lru_cache(maxsize=128)
def _stepper(scheme: str, grid: Grid1D, problem: Problem):
    if scheme == "GODUNOV":
        return _make_godunov_stepper(grid, problem)
    return _make_advection_stepper(scheme, grid, problem)


def _check_compatible(scheme: str, problem: Problem) -> None:
    if scheme not in ALL_SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if scheme == "GODUNOV" and problem.kind != "conservation-law":
        raise ValueError("GODUNOV requires a conservation-law problem")
    if scheme in ADVECTION_SCHEMES and problem.kind != "advection":
        raise ValueError(f"{scheme} requires an advection problem")
    if scheme == "EXACT" and problem.exact_solution is None:
        raise ValueError("EXACT requires a problem with an exact solution")


def eulerian_step(scheme: str, field: CellField, problem: Problem, dt: float) -> CellField:
    """Advance one conservative step; flags (but does not stop) CFL violations."""
    grid = field.grid
    if abs(dt - grid.dt) > 1e-14 * max(1.0, abs(grid.dt)):
        raise ValueError("dt must equal the grid time step")
    _check_compatible(scheme, problem)

    t_new = field.time + dt
    if scheme == "EXACT":
        out = project_function(lambda x: problem.exact_solution(x, t_new), grid)
        return CellField(grid, out.values, time=t_new, stability_warning=field.stability_warning)

    beta = dt * problem.speed_bound / grid.dx
    warn = field.stability_warning or beta > _CFL_LIMIT[scheme] + 1e-12
    new_values = _stepper(scheme, grid, problem)(field.values)
    return CellField(grid, new_values, time=t_new, stability_warning=warn)
