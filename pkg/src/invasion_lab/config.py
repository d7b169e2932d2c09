"""Run configuration: JSON schema validation, defaults and the config hash.

A run config is a JSON object with sections ``model``, ``sim``, ``analysis``
and optionally ``output``; only ``model`` is required. The documented
schema lives in ``schemas/run_config.schema.json``.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import ConfigError
from .kinetics import KineticModel, model_from_spec
from .pde import Grid1D, InitialData, SimConfig

SIM_DEFAULTS = {
    "x_min": -100.0,
    "x_max": 300.0,
    "dx": 0.2,
    "t_end": 100.0,
    "cfl": 0.4,
    "snapshot_every": 1.0,
    "initial": {
        "kind": "PreyCarryingWithBump",
        "bump_center": 0.0,
        "bump_half_width": 5.0,
        "bump_height": None,
    },
}

ANALYSIS_DEFAULTS = {
    "level": None,  # None -> mu/2 for the predator front
    "fit_window": [40.0, 90.0],
    "offset": 50.0,
    "width": 100.0,
    "tol_mu_frac": 0.05,
    "delta_floor": 0.02,
    "tol_edge": 1e-3,
    "profile_t_ref": None,  # None -> 80% of t_end
    "profile_z_range": [-100.0, 20.0],
}


def _schema(name: str) -> dict:
    return json.loads(resources.files("invasion_lab").joinpath("schemas", name).read_text())


def validate(doc: dict, schema_name: str = "run_config.schema.json") -> None:
    try:
        jsonschema.validate(doc, _schema(schema_name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(resolved: dict) -> str:
    return hashlib.sha256(canonical_json(resolved).encode()).hexdigest()


def _merge(defaults: dict, given: dict) -> dict:
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _floatify(obj):
    if isinstance(obj, dict):
        return {k: _floatify(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_floatify(v) for v in obj]
    if isinstance(obj, int) and not isinstance(obj, bool):
        return float(obj)
    return obj


@dataclass(frozen=True)
class AnalysisConfig:
    level: float | None
    fit_window: tuple[float, float]
    offset: float
    width: float
    tol_mu_frac: float
    delta_floor: float
    tol_edge: float
    profile_t_ref: float | None
    profile_z_range: tuple[float, float]


@dataclass(frozen=True)
class RunConfig:
    model: KineticModel
    sim: SimConfig
    analysis: AnalysisConfig
    resolved: dict
    hash: str


def resolve(doc: dict) -> RunConfig:
    """Validate ``doc``, fill defaults, build the model and solver config."""
    validate(doc)
    model = model_from_spec(doc["model"])  # raises ModelSpecError naming the key
    resolved = {
        "model": model.spec(),
        "sim": _merge(SIM_DEFAULTS, doc.get("sim", {})),
        "analysis": _merge(ANALYSIS_DEFAULTS, doc.get("analysis", {})),
    }
    resolved = _floatify(resolved)
    s, a = resolved["sim"], resolved["analysis"]
    try:
        grid = Grid1D.from_spacing(s["x_min"], s["x_max"], s["dx"])
        init = s["initial"]
        sim = SimConfig(
            grid=grid,
            t_end=s["t_end"],
            cfl=s["cfl"],
            snapshot_every=s["snapshot_every"],
            initial=InitialData(
                kind=init["kind"],
                bump_center=init["bump_center"],
                bump_half_width=init["bump_half_width"],
                bump_height=init["bump_height"],
            ),
        )
    except ValueError as exc:
        raise ConfigError(f"config error in sim: {exc}") from None
    if a["fit_window"][0] >= a["fit_window"][1]:
        raise ConfigError("config error in analysis: fit_window must be increasing")
    analysis = AnalysisConfig(
        level=a["level"],
        fit_window=tuple(a["fit_window"]),
        offset=a["offset"],
        width=a["width"],
        tol_mu_frac=a["tol_mu_frac"],
        delta_floor=a["delta_floor"],
        tol_edge=a["tol_edge"],
        profile_t_ref=a["profile_t_ref"],
        profile_z_range=tuple(a["profile_z_range"]),
    )
    return RunConfig(model, sim, analysis, resolved, config_hash(resolved))


def load(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
