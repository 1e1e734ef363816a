from __future__ import annotations

import time

import pytest
from hypothesis import HealthCheck, settings

from fracocp.catalog import EXAMPLE2_BRACKET, example2
from fracocp.focp import solve_fractional_conditions
from fracocp.reduction import solve_reduced
from fracocp.tpbvp import SolverConfig

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def example2_runs():
    """Both pipelines on the free-horizon example (alpha=0.5, N=2), solved once per session."""
    problem = example2(0.5)
    config = SolverConfig(nodes=1001)
    start = time.perf_counter()
    frac = solve_fractional_conditions(problem, 2, config, T_bracket=EXAMPLE2_BRACKET)
    red = solve_reduced(problem, 2, config, T_bracket=EXAMPLE2_BRACKET)
    return {"frac": frac, "reduced": red, "elapsed": time.perf_counter() - start}


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
