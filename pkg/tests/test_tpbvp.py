from __future__ import annotations

import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from fracocp.errors import BracketError, IntegrationBlowupError, ParameterError, SingularJacobianError
from fracocp.special import gamma
from fracocp.tpbvp import ShootingProblem, SolverConfig, integrate_rk4, solve_shooting


def test_rk4_exponential():
    traj = integrate_rk4(lambda t, y: y, 0.0, 1.0, np.array([1.0]), 1001)
    assert traj.y[-1, 0] == pytest.approx(math.e, abs=1e-10)
    assert traj.t[0] == 0.0 and traj.t[-1] == 1.0 and len(traj.t) == 1001


def test_rk4_constant_is_exact():
    traj = integrate_rk4(lambda t, y: 0.0 * y, 0.0, 2.0, np.array([3.0, -1.0]), 17)
    assert np.all(traj.y == np.array([3.0, -1.0]))


def test_rk4_order():
    errs = [abs(integrate_rk4(lambda t, y: y, 0.0, 1.0, np.array([1.0]), m).y[-1, 0] - math.e) for m in (11, 21)]
    assert 3.7 <= math.log2(errs[0] / errs[1]) <= 4.3


def test_rk4_moment_of_exact_state():
    al = 0.5
    xbar = lambda t: 2 * t ** (al + 2) / gamma(al + 3)  # noqa: E731
    traj = integrate_rk4(lambda t, y: -xbar(t) + 0.0 * y, 0.0, 1.0, np.array([0.0]), 1001)
    ref = -quad(xbar, 0.0, 1.0, epsabs=1e-14)[0]
    assert ref == pytest.approx(-2.0 / gamma(al + 4), rel=1e-12)
    assert traj.y[-1, 0] == pytest.approx(ref, abs=1e-8)


def test_rk4_backward_and_batched():
    y0 = np.array([[1.0, 2.0]])
    traj = integrate_rk4(lambda t, y: -y, 1.0, 0.0, y0, 101)
    np.testing.assert_allclose(traj.y[-1], y0 * math.e, rtol=1e-8)


def test_rk4_blowup_reports_time():
    with pytest.raises(IntegrationBlowupError) as info:
        integrate_rk4(lambda t, y: y * y, 0.0, 2.0, np.array([1.0]), 201)
    assert 0.9 <= info.value.t <= 1.2  # pole at t = 1


def test_rk4_needs_two_nodes():
    with pytest.raises(ParameterError):
        integrate_rk4(lambda t, y: y, 0.0, 1.0, np.array([1.0]), 1)


def linear_bvp():
    # x'' = 0, x(0) = 0, x(1) = 1 with unknown slope
    return ShootingProblem(
        field=lambda t, y: np.array([y[1], 0.0 * y[1]]),
        dim=2, a=0.0, T=1.0, known={0: 0.0}, unknown=[1],
        residual=lambda y, T: [y[0] - 1.0], names=["x", "v"],
    )


def test_linear_bvp_one_newton_step():
    # an affine residual is solved by one step up to the forward-difference roundoff
    sol = solve_shooting(linear_bvp(), SolverConfig(tol=1e-8))
    assert sol.converged
    assert sol.iterations == 1
    sol = solve_shooting(linear_bvp())
    assert sol.iterations <= 2
    assert sol.unknowns[0] == pytest.approx(1.0, abs=1e-10)
    assert sol.residual_norm <= 1e-10


def test_solution_csv(tmp_path):
    sol = solve_shooting(linear_bvp(), SolverConfig(nodes=11))
    rows = list(csv.reader(sol.to_csv(tmp_path / "s.csv").open()))
    assert rows[0] == ["t", "x", "v"]
    assert len(rows) == 12


def test_determinism():
    a, b = solve_shooting(linear_bvp()), solve_shooting(linear_bvp())
    assert np.array_equal(a.y, b.y) and a.residual_norm == b.residual_norm


@given(st.floats(-5.0, 5.0), st.floats(0.5, 3.0))
def test_converged_implies_small_residual(target, k):
    # x'' = -k^2 x, x(0) = 0, x(1) = target (k < pi keeps it regular)
    prob = ShootingProblem(
        field=lambda t, y: np.array([y[1], -k * k * y[0]]),
        dim=2, a=0.0, T=1.0, known={0: 0.0}, unknown=[1],
        residual=lambda y, T: [y[0] - target],
    )
    config = SolverConfig(nodes=201)
    sol = solve_shooting(prob, config)
    assert sol.converged
    assert sol.residual_norm <= config.tol
    assert sol.unknowns[0] == pytest.approx(target * k / math.sin(k), rel=1e-6, abs=1e-8)


def test_nonlinear_bvp_converges():
    # x'' = 1.5 x^2, x(0) = 4, x(1) = 1 (solution 4/(1+t)^2)
    prob = ShootingProblem(
        field=lambda t, y: np.array([y[1], 1.5 * y[0] ** 2]),
        dim=2, a=0.0, T=1.0, known={0: 4.0}, unknown=[1],
        residual=lambda y, T: [y[0] - 1.0], guess=np.array([-8.0]),
    )
    sol = solve_shooting(prob)
    assert sol.converged
    assert sol.unknowns[0] == pytest.approx(-8.0, abs=1e-6)


def test_singular_jacobian():
    prob = ShootingProblem(
        field=lambda t, y: np.array([0.0 * y[0], 0.0 * y[1]]),
        dim=2, a=0.0, T=1.0, known={0: 0.0}, unknown=[1],
        residual=lambda y, T: [y[0] - 1.0],
    )
    with pytest.raises(SingularJacobianError):
        solve_shooting(prob)


def test_iteration_cap_is_a_result_not_an_exception():
    prob = ShootingProblem(
        field=lambda t, y: np.array([y[1], 1.5 * y[0] ** 2]),
        dim=2, a=0.0, T=1.0, known={0: 4.0}, unknown=[1],
        residual=lambda y, T: [y[0] - 1.0], guess=np.array([-20.0]),
    )
    sol = solve_shooting(prob, SolverConfig(max_iter=1))
    assert not sol.converged
    assert sol.message


def test_partition_and_guess_checks():
    with pytest.raises(ParameterError):
        ShootingProblem(field=lambda t, y: y, dim=2, a=0.0, T=1.0, known={0: 0.0}, unknown=[0], residual=lambda y, T: [y[0]])
    with pytest.raises(ParameterError):
        solve_shooting(ShootingProblem(
            field=lambda t, y: y, dim=1, a=0.0, T=1.0, known={}, unknown=[0],
            residual=lambda y, T: [y[0]], guess=np.array([1.0, 2.0]),
        ))
    with pytest.raises(ParameterError):
        SolverConfig(nodes=1)
    with pytest.raises(ParameterError):
        SolverConfig(tol=0.0)


def free_time_problem(bracket):
    # x' = 1, x(0) = 0: reach x(T) = 0.7 with T free
    return ShootingProblem(
        field=lambda t, y: np.ones_like(y), dim=1, a=0.0, T=None, known={0: 0.0}, unknown=[],
        residual=lambda y, T: np.zeros(0), time_residual=lambda y, T: y[0] - 0.7, T_bracket=bracket,
    )


def test_free_time():
    sol = solve_shooting(free_time_problem((0.1, 2.0)))
    assert sol.converged
    assert sol.T == pytest.approx(0.7, abs=1e-10)
    assert sol.extras["horizon_evaluations"] >= 2


@pytest.mark.parametrize("bracket", [(0.5, 0.5), (2.0, 1.0), (0.0, 1.0)])
def test_degenerate_bracket(bracket):
    with pytest.raises(BracketError):
        solve_shooting(free_time_problem(bracket))


def test_bracket_without_sign_change():
    with pytest.raises(BracketError):
        solve_shooting(free_time_problem((1.0, 2.0)))


def test_trimmed_interval():
    prob = ShootingProblem(
        field=lambda t, y: np.ones_like(y), dim=1, a=0.0, T=2.0, known={0: 0.0}, unknown=[],
        residual=lambda y, T: np.zeros(0), start_trim=1e-3, end_trim=1e-3,
    )
    sol = solve_shooting(prob, SolverConfig(nodes=5))
    assert sol.t[0] == pytest.approx(2e-3) and sol.t[-1] == pytest.approx(2.0 - 2e-3)
