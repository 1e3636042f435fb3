import os
import time
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from nepv.dense import solve_all
from nepv.problems import example_2x2, gen_random

settings.register_profile(
    "ci", max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))


@lru_cache(maxsize=None)
def dense_random(n, m, seed):
    """Seeded problem, its g, the dense solution and the wall time of ``solve_all``."""
    p, g = gen_random(n, m, seed)
    t0 = time.perf_counter()
    sol = solve_all(p, g=g)
    return p, g, sol, time.perf_counter() - t0


@pytest.fixture
def ex2():
    p, g = example_2x2()
    return p, g


@pytest.fixture(scope="session")
def ex2_solution():
    p, g = example_2x2()
    return p, solve_all(p, g=g)


SUITE_BUDGET_S = 300.0


def pytest_sessionstart(session):
    session.config._nepv_t0 = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    from _support import ACCEPTANCE_LINES

    if not ACCEPTANCE_LINES:
        return
    elapsed = time.perf_counter() - config._nepv_t0
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
        terminalreporter.write_line(line)
    verdict = "PASS" if elapsed < SUITE_BUDGET_S else "FAIL"
    terminalreporter.write_line(f"{verdict} suite wall time {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)")


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - session.config._nepv_t0
    if elapsed >= SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1
