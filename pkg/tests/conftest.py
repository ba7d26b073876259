"""Shared fixtures and the acceptance-criterion reporting hook."""

import os

import pytest

ACCEPTANCE_RESULTS = []


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}: {detail}")


THRESHOLD_GRID = [64, 91, 128, 181, 256, 362, 512, 724, 1024, 1448, 2048, 2896, 4096]


@pytest.fixture(scope="session")
def threshold_sweeps():
    """Cross-edges sweeps for the three k schedules on the 64..4096 grid.

    Shared between the threshold-contrast criterion and the exponent
    direction invariant; this is the long-running part of the suite.
    """
    from netcons.experiments import KSchedule, SweepSpec, sweep_running_time

    jobs = os.cpu_count() or 1
    sweeps = {}
    for schedule in (KSchedule("const", 3), KSchedule("loglog"), KSchedule("sqrt")):
        spec = SweepSpec(
            protocol="cross-edges",
            n_grid=THRESHOLD_GRID,
            k_schedule=schedule,
            reps=10,
            base_seed=20_26,
            jobs=jobs,
        )
        sweeps[str(schedule)] = (spec, sweep_running_time(spec))
    return sweeps
