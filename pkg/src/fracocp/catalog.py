"""Built-in test functions and optimal control problems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ParameterError
from .focp import FixedTFixedX, FixedTFreeX, FocpProblem, FreeTFixedX, TerminalSpec
from .operators import SampledFunction, power_derivative, rl_derivative_left
from .special import gamma


# ---------------------------------------------------------------- test functions


@dataclass(frozen=True)
class TestFunction:
    """A function on ``[0, 1]`` with derivatives and an RL-derivative oracle."""

    name: str
    sampled: SampledFunction
    oracle: Callable[[float], Callable]

    __test__ = False  # not a pytest class


def _t4() -> TestFunction:
    x = SampledFunction(
        lambda t: np.asarray(t, dtype=float) ** 4,
        derivatives=(
            lambda t: 4.0 * np.asarray(t, dtype=float) ** 3,
            lambda t: 12.0 * np.asarray(t, dtype=float) ** 2,
            lambda t: 24.0 * np.asarray(t, dtype=float),
            lambda t: 24.0 + 0.0 * np.asarray(t, dtype=float),
        )
        + tuple(lambda t: 0.0 * np.asarray(t, dtype=float) for _ in range(20)),
        a=0.0,
        b=1.0,
        name="t4",
    )

    def oracle(alpha):
        return lambda t: power_derivative(4, alpha, t)

    return TestFunction("t4", x, oracle)


def _exp2t() -> TestFunction:
    derivs = tuple(
        (lambda k: (lambda t: 2.0**k * np.exp(2.0 * np.asarray(t, dtype=float))))(k)
        for k in range(1, 25)
    )
    x = SampledFunction(lambda t: np.exp(2.0 * np.asarray(t, dtype=float)), derivatives=derivs, a=0.0, b=1.0, name="exp2t")

    def oracle(alpha):
        return lambda t: rl_derivative_left(x, alpha, 0.0, t)

    return TestFunction("exp2t", x, oracle)


TEST_FUNCTIONS: dict[str, Callable[[], TestFunction]] = {"t4": _t4, "exp2t": _exp2t}


def test_function(name: str) -> TestFunction:
    try:
        return TEST_FUNCTIONS[name]()
    except KeyError:
        raise ParameterError(f"unknown function {name!r}; choose from {sorted(TEST_FUNCTIONS)}") from None


test_function.__test__ = False


# ---------------------------------------------------------------- example problems


def _tracking_problem(alpha: float, terminal: TerminalSpec, name: str, **overrides) -> FocpProblem:
    """Cost ``(t u - (alpha+2) x)^2`` with dynamics ``x' + C_0D x = u + t^2``."""
    c = alpha + 2.0

    def L(t, x, u):
        return (t * u - c * x) ** 2

    def L_x(t, x, u):
        return -2.0 * c * (t * u - c * x)

    def L_u(t, x, u):
        return 2.0 * t * (t * u - c * x)

    def f(t, x, u):
        return u + t * t

    def f_x(t, x, u):
        return 0.0 * np.asarray(x, dtype=float)

    def f_u(t, x, u):
        return 1.0 + 0.0 * np.asarray(u, dtype=float)

    def control(t, x, lam):
        return c * x / t - lam / (2.0 * t * t)

    def H_x_star(t, x, lam):
        return c * lam / t

    kw = dict(a=0.0, M=1.0, N=1.0, x_a=0.0)
    kw.update(overrides)
    if kw["a"] != 0.0:
        raise ParameterError("the tracking model is posed with a = 0")
    return FocpProblem(
        alpha=alpha, L=L, f=f, terminal=terminal,
        L_x=L_x, L_u=L_u, f_x=f_x, f_u=f_u, control=control, H_x_star=H_x_star, name=name, **kw,
    )


def example1(alpha: float = 0.5) -> FocpProblem:
    """Fixed horizon ``T = 1`` with ``x(1) = 2 / Gamma(3 + alpha)``."""
    return _tracking_problem(alpha, FixedTFixedX(T=1.0, x_T=2.0 / gamma(3.0 + alpha)), "example1")


def example1_exact(alpha: float, t):
    """Exact optimal state, control and costate ``(x, u, lam)`` of :func:`example1`."""
    t = np.asarray(t, dtype=float)
    x = 2.0 * t ** (alpha + 2.0) / gamma(alpha + 3.0)
    u = 2.0 * t ** (alpha + 1.0) / gamma(alpha + 2.0)
    return x, u, np.zeros_like(t)


def example2(alpha: float = 0.5) -> FocpProblem:
    """Free horizon with ``x(T) = 1``."""
    return _tracking_problem(alpha, FreeTFixedX(x_T=1.0), "example2")


#: Horizon bracket used for :func:`example2` unless overridden.
EXAMPLE2_BRACKET = (1.0, 2.0)


def _quadratic_problem(alpha: float, terminal: TerminalSpec, name: str, **overrides) -> FocpProblem:
    """Cost ``x^2 + u^2`` with dynamics ``M x' + N C_aD x = u``."""
    kw = dict(a=0.0, M=1.0, N=0.0, x_a=1.0)
    kw.update(overrides)
    return FocpProblem(
        alpha=alpha,
        L=lambda t, x, u: x * x + u * u,
        f=lambda t, x, u: u + 0.0 * x,
        terminal=terminal,
        L_x=lambda t, x, u: 2.0 * x,
        L_u=lambda t, x, u: 2.0 * u,
        f_x=lambda t, x, u: 0.0 * x,
        f_u=lambda t, x, u: 1.0 + 0.0 * u,
        control=lambda t, x, lam: -0.5 * lam,
        H_x_star=lambda t, x, lam: 2.0 * x,
        name=name,
        **kw,
    )


def lq_problem(x0: float = 1.0, T: float = 1.0) -> FocpProblem:
    """Classical problem ``x' = u``, cost ``x^2 + u^2``, free ``x(T)`` (``N = 0``)."""
    return _quadratic_problem(0.5, FixedTFreeX(T=T), "lq", x_a=x0)


def lq_exact(x0: float, T: float, t):
    """Closed-form ``(x, u, lam)`` of :func:`lq_problem`."""
    t = np.asarray(t, dtype=float)
    x = x0 * np.cosh(T - t) / np.cosh(T)
    P = np.tanh(T - t)
    return x, -P * x, 2.0 * P * x


#: Named running cost and dynamics pairs usable from configuration files.
MODELS: dict[str, Callable[..., FocpProblem]] = {
    "tracking": _tracking_problem,
    "quadratic": _quadratic_problem,
}

PROBLEMS: dict[str, Callable[..., FocpProblem]] = {
    "example1": example1,
    "example2": example2,
    "lq": lq_problem,
}
