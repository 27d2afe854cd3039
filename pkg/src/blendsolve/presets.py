"""Named problems, initial data and grids used by the benchmark suite.

Each benchmark preset bundles a Problem, its reference Grid1D and the scheme
pairing it is normally run with. Initial-datum and velocity builders are also
used by the config-file front end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BoundaryPolicy, Grid1D, Problem, build_grid


# ---------------------------------------------------------------- initial data

def box(a: float, b: float, height: float = 1.0):
    def datum(x):
        x = np.asarray(x, dtype=np.float64)
        return np.where((x >= a) & (x <= b), height, 0.0)
    return datum


def raised_cosine(center: float, halfwidth: float):
    """Smooth compact bump 0.5*(1 + cos(pi*(x-center)/halfwidth)) on |x-center| < halfwidth."""
    def datum(x):
        x = np.asarray(x, dtype=np.float64)
        inside = np.abs(x - center) < halfwidth
        return np.where(inside, 0.5 * (1.0 + np.cos(np.pi * (x - center) / halfwidth)), 0.0)
    return datum


def sine_fourth_bump(a: float, b: float):
    """C^3 compact bump sin(pi*(x-a)/(b-a))**4 on [a, b]."""
    def datum(x):
        x = np.asarray(x, dtype=np.float64)
        s = np.sin(np.pi * (x - a) / (b - a))
        return np.where((x >= a) & (x <= b), s ** 4, 0.0)
    return datum


def growing_oscillation():
    """sin(exp(2x)/20): slow on the left, increasingly oscillatory to the right."""
    def datum(x):
        x = np.asarray(x, dtype=np.float64)
        return np.sin(np.exp(2.0 * x) / 20.0)
    return datum


# ---------------------------------------------------------------- velocity fields

def velocity_linear_x():
    return lambda x: np.asarray(x, dtype=np.float64)


def velocity_sine():
    return lambda x: np.sin(np.asarray(x, dtype=np.float64))


def velocity_constant(value: float):
    return lambda x: np.full_like(np.asarray(x, dtype=np.float64), value)


# ---------------------------------------------------------------- exact solutions

def exact_linear_x(datum):
    """Exact profile for velocity A(x) = x: characteristics x(t) = x0*exp(t)."""
    def exact(x, t):
        x = np.asarray(x, dtype=np.float64)
        return datum(x * np.exp(-t)) * np.exp(-t)
    return exact


def exact_translation(datum, speed: float):
    def exact(x, t):
        return datum(np.asarray(x, dtype=np.float64) - speed * t)
    return exact


def exact_sine_velocity(datum):
    """Exact profile for A(x) = sin(x): feet gamma = 2*arctan(exp(-t)*tan(x/2))."""
    def exact(x, t):
        x = np.asarray(x, dtype=np.float64)
        tau = np.tan(0.5 * x)
        gamma = 2.0 * np.arctan(np.exp(-t) * tau)
        stretch = 0.5 * tau * (1.0 + np.exp(-2.0 * t)) * np.sin(gamma) + np.exp(-t) * np.cos(gamma)
        return datum(gamma) * stretch
    return exact


def exact_traffic_half_box(x, t):
    """Riemann fan of the u(1-u) flux from 0.5 on [0, 2]: valid for 0 <= t <= 4.

    A shock from 0 up to 0.5 travels at speed 1/2; a rarefaction opens on
    [2, 2 + t]; the plateau between them closes exactly at t = 4.
    """
    x = np.asarray(x, dtype=np.float64)
    if t == 0.0:
        return np.where((x >= 0.0) & (x <= 2.0), 0.5, 0.0)
    fan = 0.5 * (1.0 - (x - 2.0) / t)
    out = np.where(x < 0.5 * t, 0.0,
                   np.where(x <= 2.0, 0.5,
                            np.where(x < 2.0 + t, fan, 0.0)))
    return out


# ---------------------------------------------------------------- benchmark cases

@dataclass(frozen=True)
class Preset:
    name: str
    problem: Problem
    grid: Grid1D
    s1: str
    s2: str | None            # None -> particle solver
    n_particles: int = 0
    ode_solver: str = "EE"
    speed_source: str = "W"


def _linear_profile_problem() -> Problem:
    datum = box(0.5, 1.5)
    return Problem(
        kind="advection",
        initial_datum=datum,
        velocity=velocity_linear_x(),
        exact_solution=exact_linear_x(datum),
        speed_bound=20.0,
        boundary=BoundaryPolicy("zero", "copy"),
    )


def preset_test1() -> Preset:
    return Preset("test1", _linear_profile_problem(),
                  build_grid(0.0, 20.0, 1200, 2.3, 3000), "RLW", "UPW")


def preset_test2() -> Preset:
    return Preset("test2", _linear_profile_problem(),
                  build_grid(0.0, 20.0, 1200, 2.3, 3000), "UPW", None, n_particles=6000)


def preset_test3() -> Preset:
    datum = growing_oscillation()
    problem = Problem(
        kind="advection",
        initial_datum=datum,
        velocity=velocity_sine(),
        exact_solution=exact_sine_velocity(datum),
        speed_bound=1.0,
        boundary=BoundaryPolicy("zero", "zero"),  # both ends are stagnation points
    )
    return Preset("test3", problem, build_grid(0.0, np.pi, 600, 1.0, 200),
                  "UPW", None, n_particles=600)


def preset_test4() -> Preset:
    problem = Problem(
        kind="conservation-law",
        initial_datum=box(0.0, 2.0, height=0.5),
        flux=lambda u: u * (1.0 - u),
        particle_speed=lambda u: 1.0 - np.asarray(u, dtype=np.float64),
        exact_solution=exact_traffic_half_box,
        speed_bound=1.0,
        boundary=BoundaryPolicy("zero", "copy"),
        flux_critical_points=(0.5,),
    )
    return Preset("test4", problem, build_grid(-0.2, 7.0, 100, 4.0, 200),
                  "GODUNOV", None, n_particles=500)


def preset_example1() -> Preset:
    datum = sine_fourth_bump(1.0, 2.0)
    problem = Problem(
        kind="advection",
        initial_datum=datum,
        velocity=velocity_constant(1.0),
        exact_solution=exact_translation(datum, 1.0),
        speed_bound=1.0,
        boundary=BoundaryPolicy("zero", "copy"),
    )
    return Preset("example1", problem, build_grid(0.0, 4.0, 161, 1.5, 120), "LW", "BW")


def preset_example2() -> Preset:
    datum = raised_cosine(2.0, 1.0)
    problem = Problem(
        kind="advection",
        initial_datum=datum,
        velocity=velocity_constant(1.0),
        exact_solution=exact_translation(datum, 1.0),
        speed_bound=1.0,
        boundary=BoundaryPolicy("zero", "copy"),
    )
    return Preset("example2", problem, build_grid(0.0, 20.0, 300, 10.0, 800), "UPW", "EXACT")


PRESETS = {
    "test1": preset_test1,
    "test2": preset_test2,
    "test3": preset_test3,
    "test4": preset_test4,
    "example1": preset_example1,
    "example2": preset_example2,
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}") from None
