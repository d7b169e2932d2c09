"""Numerical laboratory for predator invasion fronts in diffusive
predator-prey systems."""

from .kinetics import (
    KineticModel,
    ModelConstants,
    Verdict,
    find_mu,
    find_v0,
    make_builtin,
    model_constants,
    persistence_condition,
    verify_assumptions,
    wave_constants,
)
from .pde import Grid1D, InitialData, SimConfig, default_config, run, scalar_run

__all__ = [
    "Grid1D",
    "InitialData",
    "KineticModel",
    "ModelConstants",
    "SimConfig",
    "Verdict",
    "default_config",
    "find_mu",
    "find_v0",
    "make_builtin",
    "model_constants",
    "persistence_condition",
    "run",
    "scalar_run",
    "verify_assumptions",
    "wave_constants",
]
