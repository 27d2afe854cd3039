"""Blended explicit solvers for 1-D advection and scalar conservation laws."""

from .core import (
    BoundaryPolicy,
    CellField,
    Grid1D,
    InvalidGridError,
    Problem,
    build_grid,
    courant_number,
    project_function,
    total_mass,
)
from .eulerian import eulerian_step, numerical_flux_godunov
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
from .blend import (
    BlendParams,
    BlendState,
    DivergedError,
    MaskedLambda,
    MultiBlendMatrix,
    OccupancyLambda,
    RunReport,
    SimulationConfig,
    blended_step_ee,
    blended_step_multiscale,
    multi_blend_step,
    run_simulation,
)
from .richardson import (
    CoarsePair,
    EstimateResult,
    SearchConfig,
    estimate_coupling,
    make_coarse_pair,
    node_correspondence,
    optimal_lambda_lwbw,
    richardson_indicator,
)

__version__ = "0.1.0"
