"""CSV and JSON persistence.

CSV files are UTF-8 with ``\\n`` line endings and floats written with
``repr`` (shortest round-trip form). JSON reports use sorted keys.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .errors import InvasionLabError
from .pde import FieldState, SimConfig, Trajectory


class HashMismatch(InvasionLabError):
    pass


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    return str(value)


def write_csv(path: str | Path, header: list[str], rows) -> str:
    """Write rows and return the sha256 of the bytes written."""
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    data = ("\n".join(lines) + "\n").encode("utf-8")
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8", newline="\n")


def sidecar_path(csv_path: str | Path) -> Path:
    return Path(str(csv_path) + ".json")


def file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_trajectory(path: str | Path, traj: Trajectory, resolved_config: dict, cfg_hash: str, extra: dict | None = None) -> Path:
    """Long-format ``t,x,u,v`` CSV plus a JSON sidecar carrying the config hash."""
    x = [float(v) for v in traj.x]

    def rows():
        for s in traj.snapshots:
            t = float(s.t)
            for xi, ui, vi in zip(x, s.u.tolist(), s.v.tolist()):
                yield (t, xi, ui, vi)

    digest = write_csv(path, ["t", "x", "u", "v"], rows())
    side = {
        "config": resolved_config,
        "config_hash": cfg_hash,
        "data_sha256": digest,
        "n_snapshots": len(traj.snapshots),
        "nx": traj.config.grid.nx,
        "clamped_mass": traj.clamped_mass,
    }
    if extra:
        side.update(extra)
    sp = sidecar_path(path)
    write_json(sp, side)
    return sp


def read_trajectory(path: str | Path, sim: SimConfig, expected_hash: str | None = None) -> tuple[Trajectory, dict]:
    """Load a trajectory written by ``write_trajectory``.

    Refuses the file if its bytes or the config hash disagree with the sidecar.
    """
    sp = sidecar_path(path)
    try:
        side = json.loads(sp.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise HashMismatch(f"missing or unreadable sidecar {sp}: {exc}") from None
    if file_sha256(path) != side.get("data_sha256"):
        raise HashMismatch(f"{path} does not match the data hash recorded in {sp.name}")
    if expected_hash is not None and expected_hash != side.get("config_hash"):
        raise HashMismatch(f"config hash {expected_hash[:12]} differs from sidecar hash {str(side.get('config_hash'))[:12]}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    nx = int(side["nx"])
    if data.shape[0] % nx:
        raise HashMismatch("row count is not a multiple of nx")
    blocks = data.reshape(-1, nx, 4)
    snaps = [FieldState(float(b[0, 0]), b[:, 2].copy(), b[:, 3].copy()) for b in blocks]
    return Trajectory(sim, snaps, float(side.get("clamped_mass", 0.0))), side
