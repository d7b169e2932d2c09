"""Front tracking, speed fitting, moving-frame profiles and the persistence
checks behind an invasion front.

Frame convention: simulations launch a rightward front, so the prey-only
state (1, 0) sits ahead of the front at large x. The travelling-wave
coordinate used in the theory, z = x + ct, has the front moving left; the two
pictures are related by the reflection x -> -x. Profiles returned here live in
the simulation frame, xi = x - x_front, where a travelling profile satisfies

    Phi'' + c Phi' + Phi F = 0,   d Psi'' + c Psi' + Psi G = 0.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFitError, FrontNotPresent, WindowError
from .kinetics import KineticModel, ModelConstants
from .pde import FieldState, Trajectory

log = logging.getLogger(__name__)

FRAME_CONVENTION = "simulation frame: front moves toward +x; theory frame z = x + ct is its mirror image"
BOUNDARY_CLEARANCE = 50.0


class Species(str, enum.Enum):
    PREY = "prey"
    PREDATOR = "predator"


def front_position(state: FieldState, x: np.ndarray, species: Species | str = Species.PREDATOR, level: float = 0.5) -> float:
    """Rightmost level crossing, linearly interpolated between nodes.

    Predator: v falls through ``level`` moving right (v[i] >= level > v[i+1]).
    Prey: u rises back through ``level`` moving right (u[i] < level <= u[i+1]).
    """
    species = Species(species)
    if species is Species.PREDATOR:
        f = np.asarray(state.v, dtype=float)
        hits = np.flatnonzero((f[:-1] >= level) & (f[1:] < level))
    else:
        f = np.asarray(state.u, dtype=float)
        hits = np.flatnonzero((f[:-1] < level) & (f[1:] >= level))
    if hits.size == 0:
        raise FrontNotPresent(f"no {species.value} front at level {level} (t={state.t})")
    i = hits[-1]
    s = (f[i] - level) / (f[i] - f[i + 1])
    return float(x[i] + s * (x[i + 1] - x[i]))


@dataclass
class FrontTrace:
    species: Species
    level: float
    points: list[tuple[float, float]]

    @property
    def t(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def x(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


def trace_front(traj: Trajectory, species: Species | str = Species.PREDATOR, level: float = 0.5) -> FrontTrace:
    """Front position at every snapshot where the front exists."""
    species = Species(species)
    pts = []
    for s in traj.snapshots:
        try:
            pts.append((s.t, front_position(s, traj.x, species, level)))
        except FrontNotPresent:
            continue
    if not pts:
        raise FrontNotPresent(f"no {species.value} front at level {level} in any snapshot")
    return FrontTrace(species, level, pts)


@dataclass(frozen=True)
class SpeedEstimate:
    c_measured: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    n_points: int

    @property
    def trusted(self) -> bool:
        return self.r_squared >= 0.99

    def as_dict(self) -> dict:
        return {
            "c_measured": self.c_measured,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "n_points": self.n_points,
            "trusted": self.trusted,
        }


def estimate_speed(trace: FrontTrace, window: tuple[float, float] | None = None, min_points: int = 10) -> SpeedEstimate:
    """Ordinary least squares of front position against time."""
    t, x = trace.t, trace.x
    if window is None:
        window = (float(t[0]), float(t[-1]))
    sel = (t >= window[0] - 1e-9) & (t <= window[1] + 1e-9)
    t, x = t[sel], x[sel]
    if t.size < min_points:
        raise DegenerateFitError(f"only {t.size} front points in window {window}; need {min_points}")
    tm, xm = t.mean(), x.mean()
    stt = np.sum((t - tm) ** 2)
    if stt == 0:
        raise DegenerateFitError("all front times coincide")
    slope = np.sum((t - tm) * (x - xm)) / stt
    intercept = xm - slope * tm
    ss_res = np.sum((x - intercept - slope * t) ** 2)
    ss_tot = np.sum((x - xm) ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return SpeedEstimate(float(slope), float(intercept), float(min(max(r2, 0.0), 1.0)), tuple(window), int(t.size))


def check_boundary_clearance(traj: Trajectory, trace: FrontTrace, window: tuple[float, float]) -> float:
    """Smallest distance from the front to the right boundary within ``window``; warns below 50."""
    t, x = trace.t, trace.x
    sel = (t >= window[0]) & (t <= window[1])
    gap = float(traj.config.grid.x_max - x[sel].max()) if sel.any() else float("nan")
    if gap < BOUNDARY_CLEARANCE:
        log.warning("front within %.1f of the right boundary during the fit window", gap)
    return gap


# ----------------------------------------------------------------------------
# moving frame


def profile_residual(dz: float, phi: np.ndarray, psi: np.ndarray, c: float, model: KineticModel) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise residuals of the travelling-wave equations on interior nodes
    (simulation frame: Phi'' + c Phi' + Phi F and d Psi'' + c Psi' + Psi G)."""

    def d1(f):
        return (f[2:] - f[:-2]) / (2.0 * dz)

    def d2(f):
        return (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (dz * dz)

    p, q = phi[1:-1], psi[1:-1]
    r_phi = d2(phi) + c * d1(phi) + p * model.F(p, q)
    r_psi = model.d * d2(psi) + c * d1(psi) + q * model.G(p, q)
    return r_phi, r_psi


@dataclass
class Profile:
    z: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    c: float
    anchor: float
    residual: float

    def to_theory_frame(self) -> Profile:
        """Mirror to the z = x + ct convention (prey-only state at z -> -inf)."""
        return Profile(-self.z[::-1], self.phi[::-1].copy(), self.psi[::-1].copy(), self.c, -self.anchor, self.residual)


def moving_frame_profile(
    traj: Trajectory,
    model: KineticModel,
    c: float,
    t_ref: float,
    z_range: tuple[float, float] = (-100.0, 20.0),
    level: float | None = None,
    anchor: float | None = None,
) -> Profile:
    """Snapshot at ``t_ref`` expressed in z = x - x_front, restricted to ``z_range``.

    The front is located on the predator at ``level`` unless ``anchor`` is
    given. ``residual`` is the L-infinity norm of the travelling-wave residual.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    state = traj.at(t_ref)
    x = traj.x
    if anchor is None:
        anchor = front_position(state, x, Species.PREDATOR, 0.5 if level is None else level)
    z = x - anchor
    lo, hi = z_range
    if lo < z[0] or hi > z[-1]:
        raise WindowError(f"profile window {z_range} exceeds grid span [{z[0]:.3f}, {z[-1]:.3f}] around the front")
    sel = (z >= lo) & (z <= hi)
    zs, phi, psi = z[sel], state.u[sel].copy(), state.v[sel].copy()
    r_phi, r_psi = profile_residual(traj.config.grid.dx, phi, psi, c, model)
    res = float(max(np.abs(r_phi).max(), np.abs(r_psi).max()))
    return Profile(zs, phi, psi, c, float(anchor), res)


# ----------------------------------------------------------------------------
# persistence


@dataclass
class PersistenceReport:
    psi_trailing_min: float
    psi_trailing_max: float
    phi_trailing_min: float
    phi_trailing_max: float
    mu_check: bool
    phi_lower_check: bool
    phi_upper_check: bool
    psi_upper_check: bool
    window_geometry: tuple[float, float]
    window: tuple[float, float]
    t: float

    @property
    def persistent(self) -> bool:
        return self.mu_check and self.phi_lower_check and self.phi_upper_check and self.psi_upper_check

    def as_dict(self) -> dict:
        return {
            "psi_trailing_min": self.psi_trailing_min,
            "psi_trailing_max": self.psi_trailing_max,
            "phi_trailing_min": self.phi_trailing_min,
            "phi_trailing_max": self.phi_trailing_max,
            "mu_check": self.mu_check,
            "phi_lower_check": self.phi_lower_check,
            "phi_upper_check": self.phi_upper_check,
            "psi_upper_check": self.psi_upper_check,
            "persistent": self.persistent,
            "window_geometry": {"offset": self.window_geometry[0], "width": self.window_geometry[1]},
            "window": list(self.window),
            "t": self.t,
            "frame": FRAME_CONVENTION,
        }


def persistence_check(
    traj: Trajectory,
    front: FrontTrace | float,
    constants: ModelConstants,
    window_geometry: tuple[float, float] = (50.0, 100.0),
    tol_mu: float | None = None,
    delta_floor: float = 0.02,
    tol_edge: float = 1e-3,
) -> PersistenceReport:
    """Trailing-window proxies for the liminf/limsup bounds behind the front.

    The window is [x_f - offset - width, x_f - offset] on the final snapshot,
    with x_f the last traced front position (or the float passed in).
    ``tol_mu`` defaults to 5% of mu.
    """
    x_f = front.points[-1][1] if isinstance(front, FrontTrace) else float(front)
    offset, width = window_geometry
    lo, hi = x_f - offset - width, x_f - offset
    grid = traj.config.grid
    if lo < grid.x_min or hi > grid.x_max:
        raise WindowError(f"trailing window [{lo:.2f}, {hi:.2f}] leaves the grid [{grid.x_min}, {grid.x_max}]; use a longer domain")
    state = traj.snapshots[-1]
    x = traj.x
    sel = (x >= lo) & (x <= hi)
    phi, psi = state.u[sel], state.v[sel]
    tol_mu = 0.05 * constants.mu if tol_mu is None else tol_mu
    rep = PersistenceReport(
        psi_trailing_min=float(psi.min()),
        psi_trailing_max=float(psi.max()),
        phi_trailing_min=float(phi.min()),
        phi_trailing_max=float(phi.max()),
        mu_check=bool(psi.min() >= constants.mu - tol_mu),
        phi_lower_check=bool(phi.min() >= delta_floor),
        phi_upper_check=bool(phi.max() <= 1.0 - tol_edge),
        psi_upper_check=bool(psi.max() <= constants.v0 - tol_edge),
        window_geometry=(float(offset), float(width)),
        window=(float(lo), float(hi)),
        t=float(state.t),
    )
    return rep
