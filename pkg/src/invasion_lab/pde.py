"""Method-of-lines solver for the 1-D predator-prey system and its scalar
comparison equation w_t = d w_xx + w G(0, w).

Second-order central differences with zero-flux (mirrored ghost node)
boundaries, classic explicit RK4 in time with dt = cfl*dx^2/(2*max(1, d)).
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, CFLViolation
from .kinetics import KineticModel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    nx: int

    def __post_init__(self):
        if self.nx < 3:
            raise ValueError("nx must be at least 3")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @classmethod
    def from_spacing(cls, x_min: float, x_max: float, dx: float) -> Grid1D:
        nx = int(round((x_max - x_min) / dx)) + 1
        return cls(x_min, x_max, nx)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)


class InitialKind(str, enum.Enum):
    PREY_WITH_BUMP = "PreyCarryingWithBump"
    SCALAR_BUMP = "ScalarBump"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class InitialData:
    """Initial fields.

    For the bump kinds, v is flat at ``bump_height`` on [c - e/2, c + e/2],
    falls to zero along a cosine ramp on [c - e, c - e/2] and [c + e/2, c + e],
    and vanishes outside, where c is ``bump_center`` and e ``bump_half_width``.
    A ``bump_height`` of None resolves to mu/4 at run time.
    """

    kind: InitialKind = InitialKind.PREY_WITH_BUMP
    bump_center: float = 0.0
    bump_half_width: float = 5.0
    bump_height: float | None = None
    u: np.ndarray | None = field(default=None, repr=False, compare=False)
    v: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", InitialKind(self.kind))
        if self.kind is InitialKind.CUSTOM and (self.u is None or self.v is None):
            raise ValueError("Custom initial data needs both u and v arrays")
        if self.bump_half_width <= 0:
            raise ValueError("bump_half_width must be positive")


def bump(x: np.ndarray, center: float, half_width: float, height: float) -> np.ndarray:
    r = np.abs(np.asarray(x, dtype=float) - center)
    e = half_width
    ramp = 0.5 * height * (1.0 + np.cos(np.pi * (r - 0.5 * e) / (0.5 * e)))
    return np.where(r <= 0.5 * e, height, np.where(r <= e, ramp, 0.0))


def initial_fields(init: InitialData, grid: Grid1D, mu: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    x = grid.x
    if init.kind is InitialKind.CUSTOM:
        u = np.array(init.u, dtype=float)
        v = np.array(init.v, dtype=float)
        if u.shape != x.shape or v.shape != x.shape:
            raise ValueError("custom initial arrays must match the grid")
        return u, v
    height = init.bump_height
    if height is None:
        if mu is None:
            raise ValueError("bump_height unset and mu unknown")
        height = 0.25 * mu
    if mu is not None and not 0 < height < mu:
        raise ValueError(f"bump height {height} must lie in (0, mu={mu})")
    v = bump(x, init.bump_center, init.bump_half_width, height)
    u = np.ones_like(x) if init.kind is InitialKind.PREY_WITH_BUMP else np.zeros_like(x)
    return u, v


@dataclass(frozen=True)
class SimConfig:
    grid: Grid1D
    t_end: float = 100.0
    cfl: float = 0.4
    snapshot_every: float = 1.0
    initial: InitialData = field(default_factory=InitialData)

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if not self.snapshot_every > 0:
            raise ValueError("snapshot_every must be positive")

    def dt_max(self, d: float) -> float:
        return self.cfl * self.grid.dx**2 / (2.0 * max(1.0, d))


def default_config(**overrides) -> SimConfig:
    """Desk-scale geometry: x in [-100, 300], dx = 0.2, cfl 0.4, t_end 100."""
    grid = Grid1D.from_spacing(-100.0, 300.0, overrides.pop("dx", 0.2))
    return SimConfig(grid=grid, **overrides)


@dataclass
class FieldState:
    t: float
    u: np.ndarray
    v: np.ndarray


@dataclass
class Trajectory:
    config: SimConfig
    snapshots: list[FieldState]
    clamped_mass: float = 0.0

    @property
    def x(self) -> np.ndarray:
        return self.config.grid.x

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    def at(self, t: float, atol: float = 1e-9) -> FieldState:
        for s in self.snapshots:
            if abs(s.t - t) <= atol:
                return s
        raise KeyError(f"no snapshot at t={t}")


# ----------------------------------------------------------------------------
# spatial operators


def laplacian_1d(f: np.ndarray, dx: float) -> np.ndarray:
    """Central second difference, zero-flux ends via mirrored ghost nodes."""
    out = np.empty_like(f)
    out[1:-1] = f[:-2] - 2.0 * f[1:-1] + f[2:]
    out[0] = 2.0 * (f[1] - f[0])
    out[-1] = 2.0 * (f[-2] - f[-1])
    out /= dx * dx
    return out


def _check_finite(arr: np.ndarray, what: str, t: float | None = None):
    bad = ~np.isfinite(arr)
    if bad.any():
        node = int(np.flatnonzero(bad.ravel())[0])
        raise BlowUpError(f"non-finite {what} at node {node}" + (f", t={t}" if t is not None else ""), t=t, node=node)


def rhs(state: FieldState, model: KineticModel, dx: float) -> tuple[np.ndarray, np.ndarray]:
    """Semi-discrete rates (u_xx + u F, d v_xx + v G)."""
    u = np.maximum(state.u, 0.0)
    v = np.maximum(state.v, 0.0)
    f = model.F(u, v)
    g = model.G(u, v)
    _check_finite(f, "F", state.t)
    _check_finite(g, "G", state.t)
    return laplacian_1d(state.u, dx) + u * f, model.d * laplacian_1d(state.v, dx) + v * g


def _system_rhs(model, dx, y):
    u, v = y
    du, dv = rhs(FieldState(0.0, u, v), model, dx)
    return np.stack((du, dv))


def _scalar_rhs(model, dx, y):
    w = y[0]
    wp = np.maximum(w, 0.0)
    g = model.g0(wp)
    _check_finite(g, "g")
    return (model.d * laplacian_1d(w, dx) + wp * g)[None, :]


def _rk4(fun, y, dt):
    k1 = fun(y)
    k2 = fun(y + 0.5 * dt * k1)
    k3 = fun(y + 0.5 * dt * k2)
    k4 = fun(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _clamp(y: np.ndarray) -> float:
    neg = y < 0
    if not neg.any():
        return 0.0
    mass = float(-y[neg].sum())
    y[neg] = 0.0
    return mass


def _dt_limit(dx: float, d: float) -> float:
    return dx * dx / (2.0 * max(1.0, d))


def step_rk4(state: FieldState, model: KineticModel, dt: float, dx: float) -> FieldState:
    """One RK4 step of the full system; refuses dt above dx^2/(2 max(1,d))."""
    if dt > _dt_limit(dx, model.d) * (1 + 1e-12):
        raise CFLViolation(f"dt={dt} exceeds stability bound {_dt_limit(dx, model.d)}")
    y = _rk4(lambda z: _system_rhs(model, dx, z), np.stack((state.u, state.v)), dt)
    _check_finite(y, "field", state.t + dt)
    _clamp(y)
    return FieldState(state.t + dt, y[0], y[1])


def _integrate(config: SimConfig, model: KineticModel, y0: np.ndarray, fun) -> tuple[list, float]:
    dx = config.grid.dx
    dt_max = config.dt_max(model.d)
    if dt_max > _dt_limit(dx, model.d) * (1 + 1e-12):
        raise CFLViolation("configured cfl exceeds the stability bound")
    n_snap = int(math.floor(config.t_end / config.snapshot_every + 1e-9))
    marks = [k * config.snapshot_every for k in range(1, n_snap + 1)]
    if not marks or config.t_end - marks[-1] > 1e-9 * config.t_end:
        marks.append(config.t_end)
    else:
        marks[-1] = config.t_end

    y = y0.copy()
    out = [y.copy()]
    t_prev = 0.0
    clamped = 0.0
    for t_mark in marks:
        span = t_mark - t_prev
        n = max(1, math.ceil(span / dt_max - 1e-12))
        dt = span / n
        for i in range(n):
            try:
                y = _rk4(fun, y, dt)
            except BlowUpError as exc:
                t_bad = t_prev + i * dt
                raise BlowUpError(f"numerical blow-up near t={t_bad:.6g}: {exc}", t=t_bad, node=exc.node) from None
            if not np.isfinite(y).all():
                bad = int(np.flatnonzero(~np.isfinite(y).any(axis=0))[0])
                t_bad = t_prev + (i + 1) * dt
                raise BlowUpError(f"numerical blow-up at t={t_bad:.6g}, node {bad}", t=t_bad, node=bad)
            clamped += _clamp(y)
        t_prev = t_mark
        out.append(y.copy())
    if clamped > 0:
        log.debug("clamped negative mass %.3e over the run", clamped)
    return list(zip([0.0] + marks, out)), clamped


def run(config: SimConfig, model: KineticModel, mu: float | None = None) -> Trajectory:
    """Integrate the full system; snapshots at every ``snapshot_every`` and at t_end."""
    if mu is None and config.initial.bump_height is None and config.initial.kind is not InitialKind.CUSTOM:
        from .kinetics import find_mu

        mu = find_mu(model)
    u0, v0 = initial_fields(config.initial, config.grid, mu)
    dx = config.grid.dx
    pairs, clamped = _integrate(config, model, np.stack((u0, v0)), lambda y: _system_rhs(model, dx, y))
    snaps = [FieldState(t, y[0].copy(), y[1].copy()) for t, y in pairs]
    return Trajectory(config, snaps, clamped)


def scalar_run(config: SimConfig, model: KineticModel, mu: float | None = None) -> Trajectory:
    """Integrate w_t = d w_xx + w G(0, w) from the v-component of the initial data.

    The returned snapshots carry w in ``v`` and u identically zero.
    """
    if mu is None and config.initial.bump_height is None and config.initial.kind is not InitialKind.CUSTOM:
        from .kinetics import find_mu

        mu = find_mu(model)
    _, w0 = initial_fields(config.initial, config.grid, mu)
    dx = config.grid.dx
    pairs, clamped = _integrate(config, model, w0[None, :], lambda y: _scalar_rhs(model, dx, y))
    zeros = np.zeros(config.grid.nx)
    snaps = [FieldState(t, zeros.copy(), y[0].copy()) for t, y in pairs]
    return Trajectory(config, snaps, clamped)
