"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``PASS``/``FAIL`` line; the lines are also collected and
repeated in the terminal summary (see ``conftest.py``).
"""

from __future__ import annotations

import time

import numpy as np

from fracocp.approximator import (
    Grid,
    approximate_rl_derivative,
    moment_integration_error,
    running_max_abs,
)
from fracocp.catalog import example1, example1_exact, lq_exact, lq_problem, test_function
from fracocp.cli import trajectory_discrepancy
from fracocp.expansion import build_scheme, truncation_error_bound
from fracocp.focp import solve_fractional_conditions
from fracocp.operators import (
    caputo_derivative_left,
    check_calculus_properties,
    power_derivative,
    power_integral,
    rl_derivative_left,
    rl_integral_left,
)
from fracocp.reduction import solve_reduced
from fracocp.special import rgamma
from fracocp.tpbvp import SolverConfig

from helpers import exp2, power

RESULTS: list[str] = []
ALPHAS = [round(0.1 * k, 1) for k in range(1, 10)]
GRID = Grid(0.0, 1.0, 101)


def report(k: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_criterion_1_coefficient_identities():
    with Timer() as tm:
        worst_c = worst_l = 0.0
        for alpha in ALPHAS:
            for N in range(2, 13):
                leg = build_scheme(alpha, 2, N).legacy
                worst_c = max(worst_c, abs(leg.A + sum(leg.C.values()) - rgamma(1 - alpha)))
                lin = leg.A + leg.B + sum(c * (p - 1) / p for p, c in leg.C.items())
                worst_l = max(worst_l, abs(lin - rgamma(2 - alpha)))
    ok = worst_c <= 1e-12 and worst_l <= 1e-12 and tm.elapsed < 1.0
    report(1, ok, f"constant {worst_c:.2e}, linear {worst_l:.2e}, {tm.elapsed:.2f} s")


def test_criterion_2_oracle_agreement():
    t = np.array([0.25, 0.5, 1.0])
    worst = 0.0
    with Timer() as tm:
        for alpha in ALPHAS:
            for beta in (1, 2, 3, 4):
                x = power(beta)
                worst = max(
                    worst,
                    np.max(np.abs(rl_integral_left(x, alpha, 0.0, t) - power_integral(beta, alpha, t))),
                    np.max(np.abs(rl_derivative_left(x, alpha, 0.0, t) - power_derivative(beta, alpha, t))),
                    np.max(np.abs(caputo_derivative_left(x, alpha, 0.0, t) - power_derivative(beta, alpha, t))),
                )
    ok = worst <= 1e-6 and tm.elapsed < 5.0
    report(2, ok, f"max deviation {worst:.2e}, {tm.elapsed:.2f} s")


def _max_error(name: str, n: int, N: int) -> float:
    fn = test_function(name)
    run = approximate_rl_derivative(fn.sampled, build_scheme(0.5, n, N), GRID, fn.oracle(0.5))
    return run.max_abs_error


def test_criterion_3_convergence_in_N_and_n():
    with Timer() as tm:
        in_N = {name: [_max_error(name, 2, N) for N in (2, 4, 6)] for name in ("t4", "exp2t")}
        in_n = {name: [_max_error(name, n, 6) for n in (1, 2, 3)] for name in ("t4", "exp2t")}
    decreasing = lambda e: all(a > b for a, b in zip(e, e[1:]))  # noqa: E731
    ok = all(decreasing(e) for e in in_N.values()) and all(decreasing(e) for e in in_n.values())
    ok = ok and tm.elapsed < 10.0
    fmt = lambda d: "; ".join(f"{k} " + "/".join(f"{v:.3g}" for v in e) for k, e in d.items())  # noqa: E731
    report(3, ok, f"N=2,4,6: {fmt(in_N)} | n=1,2,3: {fmt(in_n)} | {tm.elapsed:.2f} s")


def test_criterion_4_error_bound_certificate():
    worst = -np.inf
    with Timer() as tm:
        for name in ("t4", "exp2t"):
            fn = test_function(name)
            L2 = running_max_abs(fn.sampled.derivative(2), GRID)
            for N in (4, 6, 8):
                s = build_scheme(0.5, 2, N)
                run = approximate_rl_derivative(fn.sampled, s, GRID, fn.oracle(0.5))
                bound = truncation_error_bound(s, L2, GRID.nodes - GRID.a)
                slack = 10.0 * moment_integration_error(fn.sampled, s, GRID)
                worst = max(worst, float(np.max(run.abs_error[1:] - bound[1:] - slack[1:])))
    ok = worst <= 0.0 and tm.elapsed < 10.0
    report(4, ok, f"max(error - bound - slack) {worst:.2e}, {tm.elapsed:.2f} s")


def test_criterion_5_example1():
    problem = example1(0.5)
    config = SolverConfig(nodes=1001)
    details, ok = [], True
    with Timer() as tm:
        for label, solve in (("frac", solve_fractional_conditions), ("reduced", solve_reduced)):
            E = {}
            for N in (2, 3):
                sol = solve(problem, N, config)
                xb, _, _ = example1_exact(0.5, sol.t)
                E[N] = float(np.max(np.abs(sol.x - xb)))
                J = sol.cost()
                ok &= sol.converged and sol.residual_norm <= 1e-8 and J <= 1e-3
                details.append(f"{label} N={N} E={E[N]:.4g} J={J:.2e} res={sol.residual_norm:.1e}")
            ok &= E[3] < E[2] and E[3] <= 0.05
    ok &= tm.elapsed < 60.0
    report(5, ok, "; ".join(details) + f"; {tm.elapsed:.1f} s")


def test_criterion_6_example2(example2_runs):
    frac, red = example2_runs["frac"], example2_runs["reduced"]
    disc = trajectory_discrepancy(frac, red)
    dT = abs(frac.T - red.T)
    elapsed = example2_runs["elapsed"]
    ok = frac.converged and red.converged and disc <= 0.1 and dT <= 0.05 and elapsed < 60.0
    report(
        6, ok,
        f"T_frac={frac.T:.8f} T_reduced={red.T:.8f} |dT|={dT:.1e} discrepancy={disc:.1e} {elapsed:.1f} s",
    )


def test_criterion_7_classical_limit():
    with Timer() as tm:
        sol = solve_fractional_conditions(lq_problem(1.0, 1.0), 2)
        x, u, lam = lq_exact(1.0, 1.0, sol.t)
        err = max(np.max(np.abs(sol.x - x)), np.max(np.abs(sol.u - u)), np.max(np.abs(sol.lam - lam)))
    ok = sol.converged and err <= 1e-6 and tm.elapsed < 5.0
    report(7, ok, f"max deviation from Riccati solution {err:.2e}, {tm.elapsed:.2f} s")


def test_criterion_8_property_suite():
    functions = {"t": power(1), "t^2": power(2), "t^3": power(3), "t^4": power(4), "exp2t": exp2()}
    worst = {}
    with Timer() as tm:
        for name, x in functions.items():
            for alpha in (0.25, 0.5, 0.75):
                rep = check_calculus_properties(x, alpha, 0.0, 1.0, tol=1e-5)
                for key, value in rep.residuals.items():
                    worst[key] = max(worst.get(key, 0.0), value)
    ok = max(worst.values()) <= 1e-5 and tm.elapsed < 10.0
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    report(8, ok, f"{detail}; {tm.elapsed:.2f} s")
