import time

import pytest

from invasion_lab.kinetics import make_builtin, model_constants
from invasion_lab.pde import default_config, run

_AC_LINES: list[str] = []


def record_criterion(name: str, ok: bool, detail: str) -> None:
    _AC_LINES.append(f"{name:<6} {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if _AC_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _AC_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def lv():
    return make_builtin("lotka_volterra", {"a": 0.5, "r": 1, "b": 1, "d": 1})


@pytest.fixture(scope="session")
def lv_constants(lv):
    return model_constants(lv)


def _timed_run(model, cfg, mu):
    t0 = time.perf_counter()
    traj = run(cfg, model, mu=mu)
    return traj, time.perf_counter() - t0


@pytest.fixture(scope="session")
def lv_default_run(lv, lv_constants):
    """Default desk-scale Lotka-Volterra front run (dx = 0.2), with its runtime."""
    return _timed_run(lv, default_config(), lv_constants.mu)


@pytest.fixture(scope="session")
def lv_coarse_run(lv, lv_constants):
    return _timed_run(lv, default_config(dx=0.4), lv_constants.mu)


@pytest.fixture(scope="session")
def lv_fine_run(lv, lv_constants):
    return _timed_run(lv, default_config(dx=0.1), lv_constants.mu)
