"""Simulate-then-analyse pipeline shared by the CLI and the sweep runner."""

from __future__ import annotations

import logging

from . import analysis as wa
from .config import RunConfig
from .kinetics import AssumptionReport, ModelConstants, model_constants, verify_assumptions
from .pde import Trajectory, run

log = logging.getLogger(__name__)


def check_model(cfg: RunConfig, n_samples: int = 201) -> tuple[ModelConstants, AssumptionReport]:
    const = model_constants(cfg.model)
    return const, verify_assumptions(cfg.model, const.mu, const.v0, n_samples)


def simulate(cfg: RunConfig, constants: ModelConstants | None = None) -> tuple[Trajectory, ModelConstants]:
    constants = constants or model_constants(cfg.model)
    return run(cfg.sim, cfg.model, mu=constants.mu), constants


def analyze(traj: Trajectory, cfg: RunConfig, constants: ModelConstants, level: float | None = None) -> dict:
    """Front trace, speed fit, moving-frame residual and persistence report.

    Raises FrontNotPresent when the predator front never forms.
    """
    a = cfg.analysis
    level = level if level is not None else (a.level if a.level is not None else 0.5 * constants.mu)
    trace = wa.trace_front(traj, wa.Species.PREDATOR, level)
    speed = wa.estimate_speed(trace, a.fit_window)
    clearance = wa.check_boundary_clearance(traj, trace, a.fit_window)
    persist = wa.persistence_check(
        traj,
        trace,
        constants,
        (a.offset, a.width),
        tol_mu=a.tol_mu_frac * constants.mu,
        delta_floor=a.delta_floor,
        tol_edge=a.tol_edge,
    )
    t_ref = a.profile_t_ref if a.profile_t_ref is not None else 0.8 * cfg.sim.t_end
    try:
        prof = wa.moving_frame_profile(traj, cfg.model, speed.c_measured, t_ref, a.profile_z_range, level=level)
        residual = prof.residual
    except (KeyError, wa.WindowError, wa.FrontNotPresent, ValueError) as exc:
        log.warning("moving-frame profile skipped: %s", exc)
        residual = None
    return {
        "frame": wa.FRAME_CONVENTION,
        "level": level,
        "constants": constants.as_dict(),
        "speed": speed.as_dict(),
        "c_star": constants.c_star,
        "boundary_clearance": clearance,
        "persistence": persist.as_dict(),
        "profile": {"t_ref": t_ref, "z_range": list(a.profile_z_range), "residual_linf": residual},
    }
