"""Command-line front end.

Exit codes: 0 success, 2 config error, 3 assumption failure,
4 analysis error, 5 numerical blow-up.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import config as cfgmod
from . import io
from .errors import (
    AssumptionViolation,
    BlowUpError,
    CFLViolation,
    ConfigError,
    DegenerateFitError,
    FrontNotPresent,
    ModelSpecError,
    WindowError,
)
from .io import HashMismatch
from .kinetics import Verdict
from .phase import (
    PlaneState,
    classify_region,
    integrate_plane,
    linear_mode,
    sign_change_exists,
    theta_bounds,
)
from .pipeline import analyze, check_model, simulate
from .sweep import SweepConfig, run_sweep, write_sweep

EXIT_OK, EXIT_CONFIG, EXIT_ASSUMPTION, EXIT_ANALYSIS, EXIT_BLOWUP = 0, 2, 3, 4, 5

log = logging.getLogger("invasion_lab")


def _emit(obj, out: str | None) -> None:
    text = io.dumps(obj)
    if out:
        io.write_json(out, obj)
    sys.stdout.write(text)


def _resolve(path: str | None) -> cfgmod.RunConfig:
    if not path:
        raise ConfigError("--config is required")
    return cfgmod.resolve(cfgmod.load(path))


def cmd_check_model(args) -> int:
    cfg = _resolve(args.config)
    const, report = check_model(cfg)
    _emit({"model": cfg.model.spec(), "constants": const.as_dict(), "assumptions": report.as_dict()}, args.out)
    if const.classification is Verdict.INCONCLUSIVE:
        print("warning: F(0,mu) = 0; persistence cannot be decided", file=sys.stderr)
    elif const.classification is Verdict.CONDITION_FAILS:
        print("warning: F(0,mu) < 0; the persistence criterion does not apply", file=sys.stderr)
    return EXIT_OK if report.all_hold else EXIT_ASSUMPTION


def cmd_simulate(args) -> int:
    cfg = _resolve(args.config)
    traj, const = simulate(cfg)
    out = args.out or "trajectory.csv"
    io.write_trajectory(out, traj, cfg.resolved, cfg.hash, {"constants": const.as_dict()})
    print(f"wrote {out} ({len(traj.snapshots)} snapshots, config {cfg.hash[:12]})", file=sys.stderr)
    return EXIT_OK


def cmd_analyze(args) -> int:
    import json

    side = json.loads(io.sidecar_path(args.trajectory).read_text()) if io.sidecar_path(args.trajectory).exists() else None
    if args.config:
        cfg = _resolve(args.config)
    elif side is not None:
        cfg = cfgmod.resolve(side["config"])
    else:
        raise ConfigError("no --config and no sidecar next to the trajectory")
    traj, _ = io.read_trajectory(args.trajectory, cfg.sim, expected_hash=cfg.hash)
    const, _ = check_model(cfg)
    report = analyze(traj, cfg, const, level=args.level)
    _emit(report, args.out)
    return EXIT_OK


def cmd_phase(args) -> int:
    cfg = _resolve(args.config)
    const, _ = check_model(cfg)
    c = args.c if args.c is not None else const.c_star
    theta = theta_bounds(cfg.model, c, const.v0)
    ic = PlaneState(const.mu if args.psi0 is None else args.psi0, args.chi0)
    tr = integrate_plane(ic, c, cfg.model, (0.0, args.z_end), args.dz, const.v0, theta)
    out = args.out or "phase.csv"
    rows = ((float(z), float(p), float(q), classify_region((p, q), const.mu).value) for z, p, q in zip(tr.z, tr.psi, tr.chi))
    io.write_csv(out, ["z", "psi_inf", "chi_inf", "region"], rows)
    print(
        io.dumps({"reason": tr.reason, "n": len(tr.z), "theta_minus": theta.theta_minus, "theta_plus": theta.theta_plus}),
        end="",
    )
    return EXIT_OK


def cmd_mode(args) -> int:
    if args.c is None or args.f0mu is None:
        raise ConfigError("mode needs --c and --f0mu")
    try:
        mode = linear_mode(args.c, args.f0mu)
        z0 = sign_change_exists(mode, args.kappa, (args.z_lo, args.z_hi))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rep = mode.as_dict()
    rep.update(kappa=args.kappa, z_range=[args.z_lo, args.z_hi], first_sign_change=z0)
    _emit(rep, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    sc = SweepConfig.from_dict(cfgmod.load(args.config))
    rows, runtimes = run_sweep(sc, jobs=args.jobs)
    out = args.out or "sweep.csv"
    write_sweep(out, sc, rows, runtimes)
    print(f"wrote {out} ({len(rows)} rows)", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="invasion-lab", description="Predator invasion numerical laboratory")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        sp.add_argument("--config")
        sp.add_argument("--out")
        return sp

    add("check-model", cmd_check_model, "constants and assumption audit")
    add("simulate", cmd_simulate, "run the PDE and write a long-format CSV")
    sp = add("analyze", cmd_analyze, "front speed and persistence report for a trajectory")
    sp.add_argument("trajectory")
    sp.add_argument("--level", type=float)
    sp = add("phase", cmd_phase, "integrate the limit phase plane")
    sp.add_argument("--c", type=float)
    sp.add_argument("--psi0", type=float)
    sp.add_argument("--chi0", type=float, default=0.0)
    sp.add_argument("--z-end", type=float, default=20.0)
    sp.add_argument("--dz", type=float, default=1e-2)
    sp = add("mode", cmd_mode, "linear-mode regime of the rescaled prey limit")
    sp.add_argument("--c", type=float)
    sp.add_argument("--f0mu", type=float)
    sp.add_argument("--kappa", type=float, default=0.0)
    sp.add_argument("--z-lo", type=float, default=0.0)
    sp.add_argument("--z-hi", type=float, default=50.0)
    sp = add("sweep", cmd_sweep, "cartesian parameter sweep to CSV")
    sp.add_argument("--jobs", type=int)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ModelSpecError, CFLViolation) as exc:
        key = getattr(exc, "key", None)
        print(f"error: {exc}" + (f" [key: {key}]" if key else ""), file=sys.stderr)
        return EXIT_CONFIG
    except AssumptionViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except (FrontNotPresent, WindowError, DegenerateFitError, HashMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except BlowUpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
