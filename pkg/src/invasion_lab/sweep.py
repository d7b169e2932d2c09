"""Deterministic cartesian parameter sweeps.

Each grid point is an independent job (model constants, assumption audit and
optionally a simulation plus analysis). Jobs may run in worker processes;
rows are merged by their pre-assigned index so the CSV does not depend on
completion order or on the number of workers. Wall-clock runtimes go to a
separate JSON file to keep the CSV byte-reproducible.
"""

from __future__ import annotations

import copy
import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import io
from .config import resolve, validate
from .errors import ConfigError, InvasionLabError
from .kinetics import model_constants, verify_assumptions
from .pipeline import analyze, simulate

DEFAULT_CAP = 10_000

RESULT_COLUMNS = [
    "mu",
    "v0",
    "c_star",
    "f0mu",
    "classification",
    "assumptions_hold",
    "c_measured",
    "r_squared",
    "mu_check",
    "phi_lower_check",
    "phi_upper_check",
    "psi_upper_check",
    "status",
]


@dataclass(frozen=True)
class SweepConfig:
    base: dict
    axes: list[tuple[str, list[float]]]
    jobs: int = 1
    cap: int = DEFAULT_CAP
    simulate: bool = True

    @classmethod
    def from_dict(cls, doc: dict) -> SweepConfig:
        validate(doc, "sweep_config.schema.json")
        sc = cls(
            base=doc["base"],
            axes=[(p, list(v)) for p, v in doc["axes"]],
            jobs=doc.get("jobs", 1),
            cap=doc.get("cap", DEFAULT_CAP),
            simulate=doc.get("simulate", True),
        )
        size = 1
        for _, values in sc.axes:
            size *= len(values)
        if size > sc.cap:
            raise ConfigError(f"sweep has {size} points, above the cap of {sc.cap}")
        resolved = resolve(sc.base).resolved
        for path, _ in sc.axes:
            _set_path(copy.deepcopy(resolved), path, 0.0)
        return sc

    def points(self) -> list[dict]:
        """Resolved per-point configs in lexicographic (row-major) order."""
        base = resolve(self.base).resolved
        out = []
        for combo in itertools.product(*(vals for _, vals in self.axes)):
            doc = copy.deepcopy(base)
            for (path, _), val in zip(self.axes, combo):
                _set_path(doc, path, float(val))
            out.append(doc)
        return out


def _set_path(doc: dict, path: str, value) -> None:
    keys = path.split(".")
    node = doc
    for k in keys[:-1]:
        if not isinstance(node, dict) or k not in node:
            raise ConfigError(f"sweep path {path!r} does not resolve")
        node = node[k]
    if not isinstance(node, dict) or keys[-1] not in node:
        raise ConfigError(f"sweep path {path!r} does not resolve")
    node[keys[-1]] = value


def run_point(doc: dict, do_simulate: bool) -> tuple[dict, float]:
    """Evaluate one sweep point; failures are recorded, never raised."""
    t0 = time.perf_counter()
    row = dict.fromkeys(RESULT_COLUMNS)
    try:
        cfg = resolve(doc)
        const = model_constants(cfg.model)
        rep = verify_assumptions(cfg.model, const.mu, const.v0)
        row.update(
            mu=const.mu,
            v0=const.v0,
            c_star=const.c_star,
            f0mu=const.f0mu,
            classification=const.classification.value,
            assumptions_hold=rep.all_hold,
        )
        if do_simulate:
            traj, _ = simulate(cfg, const)
            res = analyze(traj, cfg, const)
            p = res["persistence"]
            row.update(
                c_measured=res["speed"]["c_measured"],
                r_squared=res["speed"]["r_squared"],
                mu_check=p["mu_check"],
                phi_lower_check=p["phi_lower_check"],
                phi_upper_check=p["phi_upper_check"],
                psi_upper_check=p["psi_upper_check"],
            )
        row["status"] = "ok"
    except (InvasionLabError, ValueError, FloatingPointError) as exc:
        row["status"] = f"error: {type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
    return row, time.perf_counter() - t0


def _run_star(args):
    return run_point(*args)


def run_sweep(sc: SweepConfig, jobs: int | None = None) -> tuple[list[dict], list[float]]:
    jobs = jobs or sc.jobs
    points = sc.points()
    tasks = [(doc, sc.simulate) for doc in points]
    if jobs <= 1:
        results = [run_point(*t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_star, tasks))
    rows, runtimes = [], []
    for idx, (doc, (row, rt)) in enumerate(zip(points, results)):
        params = {path: _get_path(doc, path) for path, _ in sc.axes}
        rows.append({"index": idx, **params, **row})
        runtimes.append(rt)
    return rows, runtimes


def _get_path(doc: dict, path: str):
    node = doc
    for k in path.split("."):
        node = node[k]
    return node


def write_sweep(path: str | Path, sc: SweepConfig, rows: list[dict], runtimes: list[float]) -> None:
    header = ["index"] + [p for p, _ in sc.axes] + RESULT_COLUMNS
    io.write_csv(path, header, ([r[h] for h in header] for r in rows))
    io.write_json(Path(str(path) + ".runtime.json"), {"runtime_seconds": runtimes})
