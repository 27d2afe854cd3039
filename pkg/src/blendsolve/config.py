"""INI-style run configuration: parsing, validation, resolution, echo.

Sections: [problem], [grid], [schemes], [blend], [particles], [richardson],
[sweep], [output]. `key = value` lines, `#` or `;` comments. A run is fully
reproducible from its file alone: every default the run actually used is
echoed back into the effective-config text emitted with the results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blend import BlendParams, MaskedLambda, OccupancyLambda, SimulationConfig
from .core import BoundaryPolicy, Grid1D, Problem, build_grid
from .presets import (
    box,
    exact_linear_x,
    exact_sine_velocity,
    exact_translation,
    get_preset,
    growing_oscillation,
    raised_cosine,
    sine_fourth_bump,
    velocity_constant,
    velocity_linear_x,
    velocity_sine,
)
from .richardson import SearchConfig


class ConfigError(ValueError):
    def __init__(self, message: str, line: int = 0):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if line else message)


def parse_ini(text: str) -> dict[str, dict[str, tuple[str, int]]]:
    """Sections of key -> (value, line number). Duplicate keys are rejected."""
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if not current:
                raise ConfigError("empty section name", lineno)
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ConfigError("key outside any [section]", lineno)
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.split("#", 1)[0].strip()
        if key in sections[current]:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        sections[current][key] = (value, lineno)
    return sections


class _Section:
    """One section's keys with typed accessors that carry line numbers."""

    def __init__(self, name: str, data: dict[str, tuple[str, int]], echo: dict):
        self.name = name
        self.data = data
        self.echo = echo
        self.seen: set[str] = set()

    def has(self, key: str) -> bool:
        return key in self.data

    def raw(self, key: str, default: str | None = None) -> tuple[str, int]:
        self.seen.add(key)
        if key in self.data:
            value, line = self.data[key]
        else:
            if default is None:
                raise ConfigError(f"[{self.name}] missing required key {key!r}")
            value, line = default, 0
        self.echo[f"{self.name}.{key}"] = value
        return value, line

    def str(self, key: str, default: str | None = None, choices=None) -> str:
        value, line = self.raw(key, default)
        if choices and value not in choices:
            raise ConfigError(f"[{self.name}] {key} must be one of {sorted(choices)}, got {value!r}", line)
        return value

    def float(self, key: str, default: str | None = None, lo=None, hi=None) -> float:
        value, line = self.raw(key, default)
        try:
            out = float(value)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key} is not a number: {value!r}", line) from None
        if lo is not None and out < lo or hi is not None and out > hi:
            raise ConfigError(f"[{self.name}] {key} = {out} outside [{lo}, {hi}]", line)
        return out

    def int(self, key: str, default: str | None = None, lo=None) -> int:
        value, line = self.raw(key, default)
        try:
            out = int(value)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key} is not an integer: {value!r}", line) from None
        if lo is not None and out < lo:
            raise ConfigError(f"[{self.name}] {key} = {out} must be >= {lo}", line)
        return out

    def bool(self, key: str, default: str) -> bool:
        value, line = self.raw(key, default)
        if value.lower() in ("true", "yes", "1"):
            return True
        if value.lower() in ("false", "no", "0"):
            return False
        raise ConfigError(f"[{self.name}] {key} is not a boolean: {value!r}", line)

    def check_unknown(self):
        for key, (_, line) in self.data.items():
            if key not in self.seen:
                raise ConfigError(f"[{self.name}] unknown key {key!r}", line)


def _parse_values(spec: str, line: int) -> tuple[float, ...]:
    """Either 'start:stop:step' or a comma-separated list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range must be start:stop:step, got {spec!r}", line)
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"bad range {spec!r}", line) from None
        if step <= 0:
            raise ConfigError(f"range step must be positive, got {step}", line)
        return tuple(round(float(v), 12) for v in np.arange(start, stop + 1e-9, step))
    try:
        return tuple(float(p) for p in spec.split(","))
    except ValueError:
        raise ConfigError(f"bad value list {spec!r}", line) from None


def _build_initial(spec: str, line: int):
    name, _, args = spec.partition(":")
    vals = [float(a) for a in args.split(",")] if args else []
    if name == "box":
        if len(vals) == 2:
            return box(vals[0], vals[1])
        if len(vals) == 3:
            return box(vals[0], vals[1], vals[2])
    if name == "raised-cosine" and len(vals) == 2:
        return raised_cosine(vals[0], vals[1])
    if name == "sine-bump" and len(vals) == 2:
        return sine_fourth_bump(vals[0], vals[1])
    if name == "oscillating" and not vals:
        return growing_oscillation()
    raise ConfigError(f"unknown initial datum {spec!r}", line)


@dataclass
class RunConfig:
    """Everything a run/sweep/estimate needs, with the resolved-key echo."""

    problem: Problem
    grid: Grid1D
    sim: SimulationConfig
    richardson_s: float
    search: SearchConfig
    sweep_lams: tuple[float, ...]
    sweep_mus: tuple[float, ...] | None
    record: str
    particle_dump: bool
    echo: dict = field(default_factory=dict)

    def effective_ini(self) -> str:
        grouped: dict[str, list[str]] = {}
        for key, value in self.echo.items():
            sec, _, name = key.partition(".")
            grouped.setdefault(sec, []).append(f"{name} = {value}")
        blocks = [f"[{sec}]\n" + "\n".join(entries) for sec, entries in grouped.items()]
        return "\n\n".join(blocks) + "\n"


def resolve_config(text: str) -> RunConfig:
    sections = parse_ini(text)
    known = {"problem", "grid", "schemes", "blend", "particles", "richardson", "sweep", "output"}
    for name in sections:
        if name not in known:
            raise ConfigError(f"unknown section [{name}]")
    echo: dict = {}
    sec = {name: _Section(name, sections.get(name, {}), echo) for name in
           ("problem", "grid", "schemes", "blend", "particles", "richardson", "sweep", "output")}

    preset = None
    if sec["problem"].has("preset"):
        preset_name = sec["problem"].str("preset")
        preset = get_preset(preset_name) if preset_name else None

    if preset is not None:
        problem = preset.problem
        g = preset.grid
        grid = build_grid(
            sec["grid"].float("x_lo", str(g.x_lo)),
            sec["grid"].float("x_hi", str(g.x_hi)),
            sec["grid"].int("n_cells", str(g.n_cells), lo=3),
            sec["grid"].float("final_time", str(g.final_time)),
            sec["grid"].int("n_steps", str(g.n_steps), lo=1),
        )
        s1 = sec["schemes"].str("s1", preset.s1)
        s2 = sec["schemes"].str("s2", preset.s2 if preset.s2 else "particles")
        n_particles = sec["particles"].int("n_particles", str(preset.n_particles or 0), lo=0)
        ode_default, src_default = preset.ode_solver, preset.speed_source
    else:
        kind = sec["problem"].str("kind", choices={"advection", "conservation-law"})
        initial_spec, init_line = sec["problem"].raw("initial")
        datum = _build_initial(initial_spec, init_line)
        speed_bound = sec["problem"].float("speed_bound", lo=1e-300)
        bnd_raw, bnd_line = sec["problem"].raw("boundary", "zero,copy")
        try:
            boundary = BoundaryPolicy(*[b.strip() for b in bnd_raw.split(",")])
        except (TypeError, ValueError):
            raise ConfigError(f"boundary must be 'left,right' of zero|copy, got {bnd_raw!r}",
                              bnd_line) from None
        exact_mode = sec["problem"].str("exact", "auto", choices={"auto", "none"})
        velocity = flux = particle_speed = exact = None
        crit: tuple[float, ...] = ()
        if kind == "advection":
            vel_spec, vel_line = sec["problem"].raw("velocity")
            vname, _, varg = vel_spec.partition(":")
            if vname == "linear-x":
                velocity = velocity_linear_x()
                exact = exact_linear_x(datum)
            elif vname == "sine":
                velocity = velocity_sine()
                exact = exact_sine_velocity(datum)
            elif vname == "constant":
                speed = float(varg) if varg else 1.0
                velocity = velocity_constant(speed)
                exact = exact_translation(datum, speed)
            else:
                raise ConfigError(f"unknown velocity {vel_spec!r}", vel_line)
        else:
            flux_spec, flux_line = sec["problem"].raw("flux")
            if flux_spec == "lwr":
                flux = lambda u: u * (1.0 - u)
                particle_speed = lambda u: 1.0 - np.asarray(u, dtype=np.float64)
                crit = (0.5,)
            else:
                raise ConfigError(f"unknown flux {flux_spec!r}", flux_line)
        if exact_mode == "none":
            exact = None
        problem = Problem(kind=kind, initial_datum=datum, velocity=velocity, flux=flux,
                          particle_speed=particle_speed, exact_solution=exact,
                          speed_bound=speed_bound, boundary=boundary,
                          flux_critical_points=crit)
        grid = build_grid(
            sec["grid"].float("x_lo"), sec["grid"].float("x_hi"),
            sec["grid"].int("n_cells", lo=3),
            sec["grid"].float("final_time"), sec["grid"].int("n_steps", lo=1),
        )
        s1 = sec["schemes"].str("s1")
        s2 = sec["schemes"].str("s2", "particles")
        n_particles = sec["particles"].int("n_particles", "0", lo=0)
        ode_default, src_default = "EE", "W"

    multiscale = s2.lower() == "particles"
    if multiscale and n_particles < 2:
        raise ConfigError("[particles] n_particles must be >= 2 for the particle solver")

    policy_name = sec["blend"].str("policy", "constant",
                                   choices={"constant", "occupancy", "masked"})
    if policy_name == "constant":
        params = BlendParams(sec["blend"].float("lambda", "1.0", lo=0.0, hi=1.0),
                             sec["blend"].float("mu", "1.0", lo=0.0, hi=1.0))
    elif policy_name == "occupancy":
        params = OccupancyLambda(
            sec["blend"].float("lambda_hi", "1.0", lo=0.0, hi=1.0),
            sec["blend"].float("lambda_lo", "0.8", lo=0.0, hi=1.0),
            sec["blend"].float("occupancy_ref", "4.0", lo=1e-12),
            sec["blend"].float("mu", "1.0", lo=0.0, hi=1.0))
    else:
        params = MaskedLambda(
            sec["blend"].float("lambda_in", "0.0", lo=0.0, hi=1.0),
            sec["blend"].float("lambda_out", "1.0", lo=0.0, hi=1.0),
            sec["blend"].float("mu", "1.0", lo=0.0, hi=1.0))

    seed_interval = None
    if sec["particles"].has("seed_lo") or sec["particles"].has("seed_hi"):
        seed_interval = (sec["particles"].float("seed_lo"), sec["particles"].float("seed_hi"))
    ode_solver = sec["particles"].str("ode_solver", ode_default, choices={"EE", "RK4"})
    speed_source = sec["particles"].str("speed_source", src_default, choices={"W", "V"})

    record = sec["output"].str("record", "final", choices={"final", "trajectory"})
    particle_dump = sec["output"].bool("particle_dump", "false")

    sim = SimulationConfig(
        s1=s1, s2=None if multiscale else s2, params=params,
        n_particles=n_particles if multiscale else 0,
        ode_solver=ode_solver, speed_source=speed_source,
        record=record, seed_interval=seed_interval)

    richardson_s = sec["richardson"].float("s", "0.5", lo=1e-9, hi=0.5)
    search = SearchConfig(
        mode=sec["richardson"].str("mode", "partial-1d" if multiscale else "full-2d",
                                   choices={"full-2d", "partial-1d"}),
        coarse_step=sec["richardson"].float("coarse_step", "0.05", lo=1e-9, hi=1.0),
        refine_rounds=sec["richardson"].int("refine_rounds", "2", lo=0))

    lam_spec, lam_line = sec["sweep"].raw("lambda_values", "0:1:0.05")
    sweep_lams = _parse_values(lam_spec, lam_line)
    sweep_mus = None
    if sec["sweep"].has("mu_values"):
        mu_spec, mu_line = sec["sweep"].raw("mu_values")
        sweep_mus = _parse_values(mu_spec, mu_line)
    else:
        # mode-dependent default: partial for the particle solver, full lattice otherwise
        echo["sweep.mu_values"] = "1.0" if multiscale else lam_spec
    for vals, what in ((sweep_lams, "lambda_values"), (sweep_mus or (), "mu_values")):
        for v in vals:
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"[sweep] {what} entry {v} outside [0, 1]")

    for s in sec.values():
        if isinstance(s, _Section):
            s.check_unknown()

    return RunConfig(problem=problem, grid=grid, sim=sim, richardson_s=richardson_s,
                     search=search, sweep_lams=sweep_lams, sweep_mus=sweep_mus,
                     record=record, particle_dump=particle_dump, echo=echo)
