"""Dynamical-systems side of the persistence argument.

* the travelling-wave ODE as a 4-D first-order system and its shooting
  diagnostics from the prey-only state;
* the limit phase plane  psi' = chi,  d chi' = c chi - psi G(0, psi),
  its regions A1..A6 and the a-priori bounds theta_- <= chi <= theta_+;
* the Riccati variable varpi = phi'/phi, its bounds pi_-, pi_+ and the
  closed-form solution of varpi' = c varpi - varpi^2 + m that blows up
  at a finite z2;
* the constant-coefficient equation w'' - c w' + F(0,mu) w = 0 satisfied by
  the rescaled prey limit, in its oscillatory / node / degenerate regimes.

Everything here uses the theory frame z = x + ct, prey-only state at z -> -inf.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import BlowUpError, InvasionLabError
from .kinetics import KineticModel

TOL_EQ = 1e-8
TOL_REGIME = 1e-9


# ----------------------------------------------------------------------------
# travelling-wave system


@dataclass(frozen=True)
class TWState:
    phi: float
    dphi: float
    psi: float
    dpsi: float

    def as_array(self) -> np.ndarray:
        return np.array([self.phi, self.dphi, self.psi, self.dpsi], dtype=float)


def tw_rhs(state, c: float, model: KineticModel) -> np.ndarray:
    """(phi', c phi' - phi F, psi', (c psi' - psi G)/d)."""
    phi, dphi, psi, dpsi = state.as_array() if isinstance(state, TWState) else np.asarray(state, dtype=float)
    f = float(model.F(phi, psi))
    g = float(model.G(phi, psi))
    if not (math.isfinite(f) and math.isfinite(g)):
        raise BlowUpError(f"non-finite kinetics at phi={phi}, psi={psi}")
    return np.array([dphi, c * dphi - phi * f, dpsi, (c * dpsi - psi * g) / model.d])


def _rk4_step(fun, y, h):
    k1 = fun(y)
    k2 = fun(y + 0.5 * h * k1)
    k3 = fun(y + 0.5 * h * k2)
    k4 = fun(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _march(fun, y0, z_span, dz, stop):
    """Fixed-step RK4 from z_span[0] toward z_span[1] (either direction).

    ``stop(y)`` returns a reason string to terminate early, or None.
    """
    if not dz > 0:
        raise ValueError("dz must be positive")
    z0, z1 = z_span
    n = max(1, int(math.ceil(abs(z1 - z0) / dz - 1e-9)))
    h = (z1 - z0) / n
    zs = [z0]
    ys = [np.asarray(y0, dtype=float)]
    reason = stop(ys[0])
    y = ys[0]
    for k in range(1, n + 1):
        if reason is not None:
            break
        y = _rk4_step(fun, y, h)
        zs.append(z0 + k * h)
        ys.append(y)
        if not np.isfinite(y).all():
            reason = "NonFinite"
        else:
            reason = stop(y)
    return np.array(zs), np.array(ys), reason or "Completed"


@dataclass
class TWTrajectory:
    z: np.ndarray
    states: np.ndarray  # columns phi, dphi, psi, dpsi
    reason: str
    escape_z: float | None


def integrate_tw(ic, c: float, model: KineticModel, z_span: tuple[float, float], dz: float, v0: float) -> TWTrajectory:
    """RK4 on the 4-D travelling-wave system; stops when leaving
    [-0.1, 1.5] x R x [-0.1, 2 v0] x R and reports where."""
    y0 = ic.as_array() if isinstance(ic, TWState) else np.asarray(ic, dtype=float)

    def stop(y):
        if not (-0.1 <= y[0] <= 1.5 and -0.1 <= y[2] <= 2.0 * v0):
            return "Escape"
        return None

    z, ys, reason = _march(lambda y: tw_rhs(y, c, model), y0, z_span, dz, stop)
    return TWTrajectory(z, ys, reason, float(z[-1]) if reason != "Completed" else None)


def tw_jacobian(model: KineticModel, c: float, state=(1.0, 0.0, 0.0, 0.0), h: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian of ``tw_rhs``."""
    y = np.asarray(state, dtype=float)
    J = np.empty((4, 4))
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        J[:, j] = (tw_rhs(y + e, c, model) - tw_rhs(y - e, c, model)) / (2 * h)
    return J


def shoot_from_prey_state(model: KineticModel, c: float, lambda1: float, eps: float = 1e-6) -> TWState:
    """Initial point displaced by ``eps`` from (1,0,0,0) along the eigenvector
    of the linearisation for the eigenvalue lambda_1 (psi component positive)."""
    J = tw_jacobian(model, c)
    w, V = np.linalg.eig(J)
    k = int(np.argmin(np.abs(w - lambda1)))
    vec = np.real(V[:, k])
    if abs(vec[2]) < 1e-14:
        raise InvasionLabError("lambda_1 eigenvector has no predator component")
    vec = vec / vec[2]
    y = np.array([1.0, 0.0, 0.0, 0.0]) + eps * vec
    return TWState(*y)


# ----------------------------------------------------------------------------
# limit phase plane


@dataclass(frozen=True)
class PlaneState:
    psi_inf: float
    chi_inf: float


class Region(str, enum.Enum):
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    A4 = "A4"
    A5 = "A5"
    A6 = "A6"
    OTHER = "Other"


def classify_region(p: PlaneState | tuple, mu: float, tol_eq: float = TOL_EQ) -> Region:
    psi, chi = (p.psi_inf, p.chi_inf) if isinstance(p, PlaneState) else p
    on_mu = abs(psi - mu) <= tol_eq
    flat = abs(chi) <= tol_eq
    if on_mu:
        return Region.A6 if flat else (Region.A2 if chi > 0 else Region.A4)
    if psi > mu:
        return Region.A3 if flat else (Region.A1 if chi > 0 else Region.A5)
    return Region.OTHER


def plane_rhs(y, c: float, model: KineticModel) -> np.ndarray:
    psi, chi = y
    return np.array([chi, (c * chi - psi * float(model.G(0.0, psi))) / model.d])


@dataclass(frozen=True)
class ThetaBounds:
    theta_minus: float
    theta_plus: float
    eta_minus: float
    eta_plus: float

    @property
    def degenerate(self) -> bool:
        return not (self.theta_minus < 0 < self.theta_plus)

    @property
    def scale(self) -> float:
        return max(abs(self.theta_minus), abs(self.theta_plus))


def theta_bounds(model: KineticModel, c: float, v0: float, n_grid: int = 2001) -> ThetaBounds:
    """min/max of eta G(0, eta)/c over [0, v0]: grid search, then bounded
    golden-section refinement around the best grid node."""
    if not c > 0:
        raise ValueError("c must be positive")
    eta = np.linspace(0.0, v0, n_grid)
    h = lambda e: float(e * model.g0(e) / c)  # noqa: E731
    vals = eta * model.g0(eta) / c
    step = eta[1] - eta[0]

    def refine(i, sign):
        lo, hi = max(0.0, eta[i] - step), min(v0, eta[i] + step)
        best_e, best = eta[i], vals[i]
        res = minimize_scalar(lambda e: sign * h(e), bounds=(lo, hi), method="bounded", options={"xatol": 1e-9})
        cand = h(float(res.x))
        if sign * cand < sign * best:
            best_e, best = float(res.x), cand
        return float(best_e), float(best)

    e_min, t_min = refine(int(np.argmin(vals)), 1.0)
    e_max, t_max = refine(int(np.argmax(vals)), -1.0)
    return ThetaBounds(t_min, t_max, e_min, e_max)


@dataclass
class PlaneTrajectory:
    z: np.ndarray
    psi: np.ndarray
    chi: np.ndarray
    reason: str

    def regions(self, mu: float, tol_eq: float = TOL_EQ) -> list[Region]:
        return [classify_region((p, q), mu, tol_eq) for p, q in zip(self.psi, self.chi)]


def integrate_plane(
    ic: PlaneState | tuple,
    c: float,
    model: KineticModel,
    z_span: tuple[float, float],
    dz: float,
    v0: float,
    theta: ThetaBounds | None = None,
) -> PlaneTrajectory:
    """Fixed-step RK4 on the limit plane; z_span may run backward.

    Terminates with reason "Escape" once psi > 2 v0 or |chi| exceeds ten
    times the theta scale.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    y0 = (ic.psi_inf, ic.chi_inf) if isinstance(ic, PlaneState) else ic
    theta = theta or theta_bounds(model, c, v0)
    chi_cap = 10.0 * theta.scale

    def stop(y):
        return "Escape" if (y[0] > 2.0 * v0 or abs(y[1]) > chi_cap) else None

    z, ys, reason = _march(lambda y: plane_rhs(y, c, model), y0, z_span, dz, stop)
    return PlaneTrajectory(z, ys[:, 0], ys[:, 1], reason)


# ----------------------------------------------------------------------------
# Riccati variable


@dataclass(frozen=True)
class RiccatiBounds:
    m: float
    pi_plus: float
    pi_minus: float

    @property
    def sqrt_disc(self) -> float:
        return self.pi_plus - self.pi_minus


def riccati_roots(c: float, m: float) -> RiccatiBounds:
    """Roots of rho^2 - c rho - m = 0."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    s = math.sqrt(c * c + 4.0 * m)
    return RiccatiBounds(m, 0.5 * (c + s), 0.5 * (c - s))


def riccati_bounds(model: KineticModel, c: float, v0: float, n: int = 201) -> RiccatiBounds:
    """m = max(0, -min F) over [0,1] x [0,v0] on an n x n grid, with pi_+-."""
    U, V = np.meshgrid(np.linspace(0.0, 1.0, n), np.linspace(0.0, v0, n), indexing="ij")
    m = max(0.0, -float(np.min(model.F(U, V))))
    return riccati_roots(c, m)


@dataclass
class RiccatiProfile:
    z: np.ndarray
    varpi: np.ndarray
    ode_residual: np.ndarray
    max_abs: float
    pi_plus: float
    left_value: float

    @property
    def bounded(self) -> bool:
        return self.max_abs <= self.pi_plus


def integrate_riccati(z: np.ndarray, phi: np.ndarray, psi: np.ndarray, c: float, model: KineticModel, bounds: RiccatiBounds) -> RiccatiProfile:
    """varpi = phi'/phi along a sampled profile given in the theory frame.

    varpi is formed from central differences of log(phi); its ODE residual
    varpi' - (c varpi - varpi^2 - F) is returned for consistency checks.
    The value at the left end (z -> -inf side) is reported, not assumed zero.
    """
    phi = np.asarray(phi, dtype=float)
    if np.any(phi <= 0):
        raise ValueError("profile has phi <= 0; varpi undefined")
    dz = np.diff(z)
    if not np.allclose(dz, dz[0]):
        raise ValueError("profile must be uniformly sampled")
    h = float(dz[0])
    lp = np.log(phi)
    w = np.gradient(lp, h, edge_order=2)
    wp = np.gradient(w, h, edge_order=2)
    resid = wp - (c * w - w * w - model.F(phi, np.asarray(psi, dtype=float)))
    return RiccatiProfile(np.asarray(z), w, resid[2:-2], float(np.max(np.abs(w))), bounds.pi_plus, float(w[0]))


def riccati_blowup_z2(z1: float, w1: float, c: float, m: float) -> float:
    """Blow-up point of varpi' = c varpi - varpi^2 + m, varpi(z1) = w1 <= -pi_+."""
    rb = riccati_roots(c, m)
    if w1 > -rb.pi_plus:
        raise ValueError(f"w1={w1} must be <= -pi_+ = {-rb.pi_plus}")
    return z1 + math.log((rb.pi_plus - w1) / (rb.pi_minus - w1)) / rb.sqrt_disc


def riccati_closed_form(z, z2: float, c: float, m: float):
    """(pi_+ - pi_- E)/(1 - E) with E = exp(-sqrt(c^2+4m)(z - z2)), valid for z < z2."""
    rb = riccati_roots(c, m)
    E = np.exp(-rb.sqrt_disc * (np.asarray(z, dtype=float) - z2))
    return (rb.pi_plus - rb.pi_minus * E) / (1.0 - E)


def riccati_rk4(z1: float, w1: float, c: float, m: float, z_end: float, h_rel: float = 1e-3, h_max: float = 1e-3):
    """RK4 on varpi' = c varpi - varpi^2 + m from (z1, w1) up to z_end or |varpi| > 1e6.

    The step is min(h_max, h_rel/|varpi|), so it shrinks toward a blow-up.
    Returns (z array, varpi array, blew_up flag).
    """
    f = lambda w: c * w - w * w + m  # noqa: E731
    zs, ws = [z1], [w1]
    z, w = z1, w1
    while z < z_end:
        h = min(h_max, h_rel / max(abs(w), 1.0), z_end - z)
        k1 = f(w)
        k2 = f(w + 0.5 * h * k1)
        k3 = f(w + 0.5 * h * k2)
        k4 = f(w + h * k3)
        w = w + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        z += h
        zs.append(z)
        ws.append(w)
        if abs(w) > 1e6 or not math.isfinite(w):
            return np.array(zs), np.array(ws), True
    return np.array(zs), np.array(ws), False


# ----------------------------------------------------------------------------
# linear modes of the rescaled prey limit


class Regime(str, enum.Enum):
    OSCILLATORY = "Oscillatory"
    NODE = "Node"
    DEGENERATE = "Degenerate"
    NEUTRAL = "Neutral"  # F(0, mu) = 0


@dataclass(frozen=True)
class LinearMode:
    c: float
    f0mu: float
    c0: float
    eta_plus: tuple[float, float]  # (real, imag)
    eta_minus: tuple[float, float]
    regime: Regime

    def as_dict(self) -> dict:
        return {
            "c": self.c,
            "f0mu": self.f0mu,
            "c0": self.c0,
            "eta_plus": {"re": self.eta_plus[0], "im": self.eta_plus[1]},
            "eta_minus": {"re": self.eta_minus[0], "im": self.eta_minus[1]},
            "regime": self.regime.value,
        }


def linear_mode(c: float, f0mu: float, tol: float = TOL_REGIME) -> LinearMode:
    """Roots eta_+- of eta^2 - c eta + F(0,mu) = 0 and the regime by sign of c - c0."""
    if f0mu < -tol:
        raise ValueError("F(0, mu) < 0: no linear-mode analysis")
    if abs(f0mu) <= tol:
        return LinearMode(c, f0mu, 0.0, (c, 0.0), (0.0, 0.0), Regime.NEUTRAL)
    c0 = 2.0 * math.sqrt(f0mu)
    disc = c * c - 4.0 * f0mu
    if abs(c - c0) <= tol:
        return LinearMode(c, f0mu, c0, (0.5 * c, 0.0), (0.5 * c, 0.0), Regime.DEGENERATE)
    if c < c0:
        im = 0.5 * math.sqrt(-disc)
        return LinearMode(c, f0mu, c0, (0.5 * c, im), (0.5 * c, -im), Regime.OSCILLATORY)
    s = math.sqrt(disc)
    # product of roots is f0mu; avoids cancellation in the small root
    ep = 0.5 * (c + s)
    return LinearMode(c, f0mu, c0, (ep, 0.0), (f0mu / ep, 0.0), Regime.NODE)


def _check_kappa(mode: LinearMode, kappa: float):
    if mode.regime in (Regime.NODE, Regime.NEUTRAL) and not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa={kappa} outside [0, 1]: positivity of the limit forces kappa in [0, 1]")
    if mode.regime is Regime.DEGENERATE and kappa != 0.0:
        raise ValueError(f"kappa_2={kappa} != 0: positivity of the limit forces kappa_2 = 0")


def omega_inf(z, mode: LinearMode, kappa: float = 0.0):
    """Solution with value 1 at z = 0 in the given regime.

    Oscillatory: e^{a z}(cos(b z) + kappa sin(b z)), eta_+ = a + ib;
    Node: kappa e^{eta_- z} + (1 - kappa) e^{eta_+ z};
    Degenerate: e^{eta_+ z}(1 + kappa z);
    Neutral (F(0,mu) = 0): kappa + (1 - kappa) e^{c z}.
    """
    _check_kappa(mode, kappa)
    z = np.asarray(z, dtype=float)
    a, b = mode.eta_plus
    if mode.regime is Regime.OSCILLATORY:
        return np.exp(a * z) * (np.cos(b * z) + kappa * np.sin(b * z))
    if mode.regime is Regime.NODE:
        return kappa * np.exp(mode.eta_minus[0] * z) + (1 - kappa) * np.exp(a * z)
    if mode.regime is Regime.DEGENERATE:
        return np.exp(a * z) * (1 + kappa * z)
    return kappa + (1 - kappa) * np.exp(mode.c * z)


def omega_inf_prime(z, mode: LinearMode, kappa: float = 0.0):
    _check_kappa(mode, kappa)
    z = np.asarray(z, dtype=float)
    a, b = mode.eta_plus
    if mode.regime is Regime.OSCILLATORY:
        e = np.exp(a * z)
        return e * (a * (np.cos(b * z) + kappa * np.sin(b * z)) + b * (kappa * np.cos(b * z) - np.sin(b * z)))
    if mode.regime is Regime.NODE:
        em = mode.eta_minus[0]
        return kappa * em * np.exp(em * z) + (1 - kappa) * a * np.exp(a * z)
    if mode.regime is Regime.DEGENERATE:
        return np.exp(a * z) * (a * (1 + kappa * z) + kappa)
    return (1 - kappa) * mode.c * np.exp(mode.c * z)


def sign_change_exists(
    mode: LinearMode, kappa: float = 0.0, z_range: tuple[float, float] = (0.0, 50.0), step: float = 1e-2
) -> float | None:
    """First z in ``z_range`` (scanning upward) where omega_inf turns negative,
    refined to the zero crossing; None when omega_inf stays nonnegative."""
    n = int(math.ceil((z_range[1] - z_range[0]) / step)) + 1
    z = np.linspace(z_range[0], z_range[1], n)
    w = omega_inf(z, mode, kappa)
    neg = np.flatnonzero(w < 0)
    if neg.size == 0:
        return None
    i = int(neg[0])
    if i == 0:
        return float(z[0])
    return float(brentq(lambda s: float(omega_inf(s, mode, kappa)), z[i - 1], z[i], xtol=1e-14))
