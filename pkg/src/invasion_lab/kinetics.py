"""Kinetic models for the diffusive predator-prey system

    u_t = u_xx + u F(u, v),
    v_t = d v_xx + v G(u, v),

together with the closed-form constants that govern predator invasion
(predator-only level mu, predator ceiling v0, linear speed c*, decay rate
lambda_1, the persistence verdict from the sign of F(0, mu)) and a sampling
audit of the structural hypotheses on F and G.

All evaluators are vectorised: ``F(u, v)`` and ``G(u, v)`` accept scalars or
numpy arrays and broadcast.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import AssumptionViolation, ModelSpecError, NotMonostableError, SpeedBelowMinimum

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]

ROOT_TOL = 1e-12
TOL_ZERO = 1e-9
MU_EXCLUSION = 1e-6


@dataclass(frozen=True)
class KineticModel:
    name: str
    d: float
    params: dict
    F: Evaluator = field(repr=False, compare=False)
    G: Evaluator = field(repr=False, compare=False)
    check_box: tuple[float, float] | None = None  # (u_hi, v_hi); None -> [0,1]x[0,1.1*v0]

    def __post_init__(self):
        if not (self.d > 0 and math.isfinite(self.d)):
            raise ModelSpecError(f"diffusion ratio d must be positive, got {self.d}", key="d")

    def spec(self) -> dict:
        """JSON-ready model description, ``{"name": ..., "params": {...}}``."""
        return {"name": self.name, "params": dict(self.params)}

    def g0(self, w):
        """Predator kinetics without prey, g(w) = G(0, w)."""
        return self.G(np.zeros_like(np.asarray(w, dtype=float)), w)

    def scaled(self, f_scale: float = 1.0, g_scale: float = 1.0) -> KineticModel:
        """Copy of the model with F and/or G multiplied by positive constants."""
        if f_scale <= 0 or g_scale <= 0:
            raise ValueError("scale factors must be positive")
        F, G = self.F, self.G
        return KineticModel(
            name=f"{self.name}*scaled",
            d=self.d,
            params=dict(self.params, f_scale=f_scale, g_scale=g_scale),
            F=lambda u, v: f_scale * F(u, v),
            G=lambda u, v: g_scale * G(u, v),
            check_box=self.check_box,
        )


# ----------------------------------------------------------------------------
# built-in models

_BUILTINS: dict[str, tuple[dict, dict, Callable[[dict], tuple[Evaluator, Evaluator]]]] = {}

_POSITIVE = "positive"
_NONNEG = "nonnegative"
_AT_LEAST_ONE = ">= 1"


def register_builtin(name: str, defaults: dict, constraints: dict):
    """Register a model factory ``factory(params) -> (F, G)`` under ``name``.

    ``constraints`` maps each parameter to "positive", "nonnegative" or ">= 1".
    The diffusion ratio ``d`` is always accepted and must be positive.
    """

    def deco(factory):
        _BUILTINS[name] = (dict(defaults), dict(constraints), factory)
        return factory

    return deco


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


@register_builtin(
    "lotka_volterra",
    defaults={"a": 0.5, "r": 1.0, "b": 1.0, "d": 1.0},
    constraints={"a": _POSITIVE, "r": _POSITIVE, "b": _POSITIVE},
)
def _lotka_volterra(p):
    a, r, b = p["a"], p["r"], p["b"]

    def F(u, v):
        return 1.0 - u - a * v

    def G(u, v):
        return r * (1.0 - v + b * u)

    return F, G


@register_builtin(
    "leslie_gower",
    defaults={"a": 0.5, "e1": 0.4, "r": 1.0, "e2": 0.4, "d": 1.0},
    constraints={"a": _POSITIVE, "e1": _POSITIVE, "r": _POSITIVE, "e2": _POSITIVE},
)
def _leslie_gower(p):
    a, e1, r, e2 = p["a"], p["e1"], p["r"], p["e2"]

    def F(u, v):
        return 1.0 - u - a * v / (u + e1)

    def G(u, v):
        return r * (1.0 - v / (u + e2))

    return F, G


def sigma_eps(u, eps: float):
    """Regularised prey level: u for u >= eps, u + eps*exp(1/(u - eps)) below."""
    u = np.asarray(u, dtype=float)
    below = u < eps
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        tail = eps * np.exp(1.0 / np.where(below, u - eps, -1.0))
    out = np.where(below, u + tail, u)
    return out if out.ndim else float(out)


@register_builtin(
    "holling_tanner_reg",
    defaults={"alpha": 1.0, "beta1": 0.0, "beta2": 0.0, "m_exp": 2.0, "r": 1.0, "eps": 0.25, "d": 1.0},
    constraints={
        "alpha": _POSITIVE,
        "beta1": _NONNEG,
        "beta2": _NONNEG,
        "m_exp": _AT_LEAST_ONE,
        "r": _POSITIVE,
        "eps": _POSITIVE,
    },
)
def _holling_tanner_reg(p):
    alpha, b1, b2, m, r, eps = p["alpha"], p["beta1"], p["beta2"], p["m_exp"], p["r"], p["eps"]

    def F(u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        # 0**0 == 1 in numpy, which is the m == 1 limit
        return 1.0 - u - alpha * u ** (m - 1.0) * v / (1.0 + b1 * u**m + b2 * v**m)

    def G(u, v):
        return r * (1.0 - v / sigma_eps(u, eps))

    return F, G


def make_builtin(name: str, params: dict | None = None) -> KineticModel:
    """Build one of the registered models; missing parameters take defaults."""
    if name not in _BUILTINS:
        raise ModelSpecError(f"unknown model {name!r}; choose from {builtin_names()}", key="name")
    defaults, constraints, factory = _BUILTINS[name]
    params = dict(params or {})
    unknown = sorted(set(params) - set(defaults))
    if unknown:
        raise ModelSpecError(f"unknown parameter {unknown[0]!r} for model {name}", key=unknown[0])
    merged = dict(defaults)
    for key, value in params.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ModelSpecError(f"parameter {key!r} must be a number, got {value!r}", key=key)
        merged[key] = float(value)
    for key, value in merged.items():
        if not math.isfinite(value):
            raise ModelSpecError(f"parameter {key!r} must be finite", key=key)
        rule = constraints.get(key, _POSITIVE if key == "d" else None)
        bad = (
            (rule == _POSITIVE and not value > 0)
            or (rule == _NONNEG and not value >= 0)
            or (rule == _AT_LEAST_ONE and not value >= 1)
        )
        if bad:
            raise ModelSpecError(f"parameter {key!r} must be {rule}, got {value}", key=key)
    F, G = factory(merged)
    return KineticModel(name=name, d=merged["d"], params=merged, F=F, G=G)


def model_from_spec(spec: dict) -> KineticModel:
    if not isinstance(spec, dict) or "name" not in spec:
        raise ModelSpecError("model spec must be an object with a 'name' key", key="name")
    return make_builtin(spec["name"], spec.get("params", {}))


# ----------------------------------------------------------------------------
# constants


class Verdict(str, enum.Enum):
    PERSISTENT = "Persistent"
    INCONCLUSIVE = "Inconclusive"
    CONDITION_FAILS = "ConditionFails"


def _bisect(f, lo: float, hi: float, ftol: float, xtol: float = 0.0) -> float:
    flo = f(lo)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= ftol or mid in (lo, hi) or (hi - lo) <= xtol:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_mu(model: KineticModel, v_hi: float | None = None) -> float:
    """Positive root of v -> G(0, v), bracketed by a doubling scan from v = 0."""
    v_hi = v_hi if v_hi is not None else (model.check_box[1] if model.check_box else 1.0)
    g = lambda v: float(model.G(0.0, v))  # noqa: E731
    if not g(0.0) > 0:
        raise AssumptionViolation("Assumption (a) violated: G(0,0) must be positive")
    prev = 0.0
    v = v_hi * 2.0**-30
    limit = v_hi * 2.0**10
    while v <= limit:
        if g(v) < 0:
            return _bisect(g, prev, v, ROOT_TOL)
        if g(v) == 0:
            return v
        prev, v = v, 2.0 * v
    raise AssumptionViolation("Assumption (a) violated: no positive root of G(0,·)")


def _max_over_u(model: KineticModel, v: float, n_u: int) -> float:
    u = np.linspace(0.0, 1.0, n_u)
    return float(np.max(model.G(u, np.full_like(u, v))))


def find_v0(model: KineticModel, mu: float, margin: float = 0.1, n_u: int = 201) -> float:
    """Predator ceiling: smallest v >= mu where max_u G(u, v) <= 0, times (1 + margin)."""
    if n_u < 201:
        raise ValueError("need at least 201 samples in u")
    h = lambda v: _max_over_u(model, v, n_u)  # noqa: E731
    if h(mu) <= 0:
        v_b = mu
    else:
        lo, hi = mu, 2.0 * mu
        while h(hi) > 0:
            lo, hi = hi, 2.0 * hi
            if hi > 2.0**10 * mu:
                raise AssumptionViolation("Assumption (b) violated: predator ceiling not found")
        while hi - lo > 1e-9:
            mid = 0.5 * (lo + hi)
            if h(mid) > 0:
                lo = mid
            else:
                hi = mid
        v_b = hi
    v0 = (1.0 + margin) * v_b
    if not _max_over_u(model, v0, 1001) < 0:
        raise AssumptionViolation("Assumption (b) violated: G(u, v0) not strictly negative")
    return v0


def c_star(model: KineticModel) -> float:
    g10 = float(model.G(1.0, 0.0))
    if not g10 > 0:
        raise NotMonostableError("model not monostable at prey-only state: G(1,0) <= 0")
    return 2.0 * math.sqrt(model.d * g10)


def wave_constants(model: KineticModel, c: float | None = None) -> tuple[float, float | None]:
    """Return (c*, lambda_1(c)); lambda_1 is None when c is not given.

    lambda_1 is the smaller root of d*l^2 - c*l + G(1,0) = 0.
    """
    cs = c_star(model)
    if c is None:
        return cs, None
    if c < cs:
        raise SpeedBelowMinimum(f"lambda_1 undefined: c = {c} < c* = {cs}")
    g10 = float(model.G(1.0, 0.0))
    disc = c * c - 4.0 * model.d * g10
    if disc < 16.0 * np.finfo(float).eps * c * c:  # c == c* up to round-off
        disc = 0.0
    return cs, (c - math.sqrt(disc)) / (2.0 * model.d)


def classify_f0mu(f0mu: float, tol_zero: float = TOL_ZERO) -> Verdict:
    if f0mu > tol_zero:
        return Verdict.PERSISTENT
    if f0mu < -tol_zero:
        return Verdict.CONDITION_FAILS
    return Verdict.INCONCLUSIVE


def persistence_condition(
    model: KineticModel, mu: float, tol_zero: float = TOL_ZERO
) -> tuple[Verdict, float, float | None]:
    """Classify by the sign of F(0, mu); returns (verdict, F(0, mu), c0)."""
    f0mu = float(model.F(0.0, mu))
    verdict = classify_f0mu(f0mu, tol_zero)
    c0 = 2.0 * math.sqrt(f0mu) if verdict is Verdict.PERSISTENT else None
    return verdict, f0mu, c0


@dataclass(frozen=True)
class ModelConstants:
    mu: float
    v0: float
    c_star: float
    f0mu: float
    c0: float | None
    classification: Verdict

    def as_dict(self) -> dict:
        return {
            "mu": self.mu,
            "v0": self.v0,
            "c_star": self.c_star,
            "f0mu": self.f0mu,
            "c0": self.c0,
            "classification": self.classification.value,
        }


def model_constants(model: KineticModel, margin: float = 0.1) -> ModelConstants:
    mu = find_mu(model)
    v0 = find_v0(model, mu, margin=margin)
    verdict, f0mu, c0 = persistence_condition(model, mu)
    return ModelConstants(mu=mu, v0=v0, c_star=c_star(model), f0mu=f0mu, c0=c0, classification=verdict)


# ----------------------------------------------------------------------------
# assumption audit


class Witness(NamedTuple):
    item: str  # "a", "b" or "c"
    check: str
    point: tuple[float, float]
    value: float


@dataclass
class AssumptionReport:
    holds_a: bool
    holds_b: bool
    holds_c: bool
    witnesses: list[Witness]
    grid_resolution: tuple[int, int]

    @property
    def all_hold(self) -> bool:
        return self.holds_a and self.holds_b and self.holds_c

    def as_dict(self, max_witnesses: int = 20) -> dict:
        counts = {k: sum(w.item == k for w in self.witnesses) for k in "abc"}
        return {
            "all_hold": self.all_hold,
            "holds_a": self.holds_a,
            "holds_b": self.holds_b,
            "holds_c": self.holds_c,
            "violation_counts": counts,
            "witnesses": [
                {"item": w.item, "check": w.check, "point": list(w.point), "value": w.value}
                for w in self.witnesses[:max_witnesses]
            ],
            "grid_resolution": list(self.grid_resolution),
        }


def verify_assumptions(
    model: KineticModel, mu: float, v0: float, n_samples: int = 201, atol: float = 1e-12
) -> AssumptionReport:
    """Grid audit of hypotheses (a)-(c) on F and G.

    Strict inequalities are tested exactly; the non-strict sandwich
    G(1,0) >= G(u,v) >= G(0,v) allows ``atol`` of round-off.
    """
    if n_samples < 101:
        raise ValueError("n_samples must be at least 101 per axis")
    wit: list[Witness] = []

    def record(item, check, uu, vv, vals, bad):
        for i in np.flatnonzero(bad):
            wit.append(Witness(item, check, (float(uu.flat[i]), float(vv.flat[i])), float(vals.flat[i])))

    # (a) G(0,v)(v - mu) < 0 away from mu
    v = np.linspace(0.0, 2.0 * v0, n_samples)
    v = v[np.abs(v - mu) > MU_EXCLUSION]
    prod = model.G(np.zeros_like(v), v) * (v - mu)
    record("a", "G(0,v)(v-mu) < 0", np.zeros_like(v), v, prod, ~(prod < 0))

    # (b) negativity on v = v0 and sandwich on the box
    u = np.linspace(0.0, 1.0, n_samples)
    gv0 = model.G(u, np.full_like(u, v0))
    record("b", "G(u,v0) < 0", u, np.full_like(u, v0), gv0, ~(gv0 < 0))
    U, V = np.meshgrid(u, np.linspace(0.0, v0, n_samples), indexing="ij")
    Guv = model.G(U, V)
    g10 = float(model.G(1.0, 0.0))
    record("b", "G(1,0) >= G(u,v)", U, V, Guv - g10, Guv > g10 + atol)
    G0v = model.G(np.zeros_like(V), V)
    record("b", "G(u,v) >= G(0,v)", U, V, Guv - G0v, Guv < G0v - atol)

    # (c)
    f10 = float(model.F(1.0, 0.0))
    if abs(f10) > ROOT_TOL:
        wit.append(Witness("c", "F(1,0) = 0", (1.0, 0.0), f10))
    uc = u[u < 1.0]
    fu0 = model.F(uc, np.zeros_like(uc))
    record("c", "F(u,0) > 0", uc, np.zeros_like(uc), fu0, ~(fu0 > 0))
    vc = np.linspace(0.0, v0, n_samples)[1:]
    f1v = model.F(np.ones_like(vc), vc)
    record("c", "F(1,v) < 0", np.ones_like(vc), vc, f1v, ~(f1v < 0))

    items = {w.item for w in wit}
    return AssumptionReport(
        holds_a="a" not in items,
        holds_b="b" not in items,
        holds_c="c" not in items,
        witnesses=wit,
        grid_resolution=(n_samples, n_samples),
    )


def check_finite_on_box(model: KineticModel, v0: float, n: int = 101) -> bool:
    u_hi, v_hi = model.check_box if model.check_box else (1.0, 1.1 * v0)
    U, V = np.meshgrid(np.linspace(0, u_hi, n), np.linspace(0, v_hi, n), indexing="ij")
    return bool(np.all(np.isfinite(model.F(U, V))) and np.all(np.isfinite(model.G(U, V))))
