"""Evaluate expansion approximations of fractional derivatives along a grid."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import csvio
from .errors import GridMismatchError, ParameterError
from .expansion import ExpansionScheme, Side, classical_series_coefficients
from .operators import FractionalOrder, SampledFunction, as_sampled
from .quadrature import evaluate
from .special import rgamma
from .tpbvp import integrate_rk4


@dataclass(frozen=True)
class Grid:
    """``m`` equally spaced nodes on ``[a, b]``."""

    a: float
    b: float
    m: int = 101

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ParameterError(f"grid needs at least 2 nodes, got {self.m}")
        if not self.a < self.b:
            raise ParameterError(f"empty grid interval [{self.a}, {self.b}]")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.m)

    @property
    def step(self) -> float:
        return (self.b - self.a) / (self.m - 1)

    def refined(self) -> "Grid":
        """Grid with half the spacing; its even-indexed nodes coincide with this grid."""
        return Grid(self.a, self.b, 2 * self.m - 1)


@dataclass
class ApproximationRun:
    """Approximate derivative values on a grid, optionally against an oracle.

    The node where the expansion is singular (``t = a`` for left, ``t = b``
    for right schemes) holds the finite oracle value when one is known and
    NaN otherwise; it never enters ``max_abs_error``.
    """

    grid: Grid
    values: np.ndarray
    alpha: float
    n: int | None
    N: int
    label: str = "rl"
    scheme: ExpansionScheme | None = None
    exact: np.ndarray | None = None

    @property
    def abs_error(self) -> np.ndarray | None:
        if self.exact is None:
            return None
        return np.abs(self.values - self.exact)

    @property
    def max_abs_error(self) -> float:
        err = self.abs_error
        if err is None:
            return float("nan")
        return float(np.max(err[self._regular]))

    @property
    def _regular(self) -> np.ndarray:
        t = self.grid.nodes
        if self.scheme is not None and self.scheme.side is Side.Right:
            return t < self.grid.b
        return t > self.grid.a

    def filename(self, fn_name: str) -> str:
        n = "series" if self.n is None else self.n
        return f"approx_{fn_name}_{self.alpha:g}_{n}_{self.N}.csv"

    def to_csv(self, path) -> Path:
        exact = self.exact if self.exact is not None else np.full_like(self.values, np.nan)
        err = np.abs(self.values - exact)
        return csvio.write_columns(path, ["t", "exact", "approx", "abs_error"], [self.grid.nodes, exact, self.values, err])


def _oracle_values(exact: Callable | None, t: np.ndarray, singular: np.ndarray) -> np.ndarray | None:
    if exact is None:
        return None
    out = np.full_like(t, np.nan)
    regular = ~singular
    out[regular] = evaluate(exact, t[regular])
    with np.errstate(all="ignore"):
        try:
            at_sing = np.asarray(exact(t[singular]), dtype=float)
        except (ValueError, ArithmeticError):
            at_sing = np.full(singular.sum(), np.nan)
    out[singular] = np.where(np.isfinite(at_sing), at_sing, np.nan)
    return out


def moment_trajectories(x, scheme: ExpansionScheme, grid: Grid) -> np.ndarray:
    """RK4 solution of the moment equations on the grid, shape ``(m, N-n+1)``."""
    x = as_sampled(x)
    moments = scheme.moments
    if not moments:
        return np.zeros((grid.m, 0))
    factors = np.array([mo.factor for mo in moments])
    exps = np.array([mo.exponent for mo in moments], dtype=float)
    if scheme.side is Side.Left:
        a = grid.a

        def field(t, V):
            return factors * np.power(t - a, exps) * float(x(t))

        return integrate_rk4(field, grid.a, grid.b, np.zeros(len(moments)), grid.m).y
    b = grid.b

    def field(t, W):
        return -factors * np.power(b - t, exps) * float(x(t))

    return integrate_rk4(field, grid.b, grid.a, np.zeros(len(moments)), grid.m).y[::-1]


def _check_anchor(scheme: ExpansionScheme, grid: Grid) -> None:
    anchor = grid.a if scheme.side is Side.Left else grid.b
    if anchor != scheme.anchor:
        raise GridMismatchError(
            f"{scheme.side.value} scheme anchored at {scheme.anchor} but grid ends at {anchor}"
        )


def _distances(scheme_side: Side, grid: Grid) -> np.ndarray:
    t = grid.nodes
    return t - grid.a if scheme_side is Side.Left else grid.b - t


def approximate_rl_derivative(
    x: SampledFunction, scheme: ExpansionScheme, grid: Grid, exact: Callable | None = None
) -> ApproximationRun:
    """Expansion approximation of the left (or right) RL derivative at the grid nodes.

    The moments are integrated with RK4 on the grid itself, starting from zero
    at the anchor; ``exact`` is an optional vectorized oracle.
    """
    _check_anchor(scheme, grid)
    x = as_sampled(x)
    t = grid.nodes
    dist = _distances(scheme.side, grid)
    singular = dist == 0
    V = moment_trajectories(x, scheme, grid)
    derivs = [evaluate(x.derivative(i), t) for i in range(scheme.n)]
    with np.errstate(divide="ignore", invalid="ignore"):
        values = scheme.combine(dist, derivs, [V[:, k] for k in range(V.shape[1])])
    values = np.asarray(values, dtype=float)
    oracle = _oracle_values(exact, t, singular)
    values[singular] = oracle[singular] if oracle is not None else np.nan
    return ApproximationRun(grid, values, scheme.alpha, scheme.n, scheme.N, "rl", scheme, oracle)


def caputo_correction(x, alpha: float, dist: np.ndarray, anchor: float, side: Side) -> np.ndarray:
    """``sum_k x^(k)(anchor) dist^(k-alpha) / Gamma(k-alpha+1)`` (signed by (-1)^k on the right)."""
    x = as_sampled(x)
    total = np.zeros_like(dist)
    for k in range(FractionalOrder.of(alpha).n):
        xk = float(evaluate(x.derivative(k), np.asarray(anchor)))
        if xk == 0.0:
            continue
        sign = (-1) ** k if side is Side.Right else 1
        with np.errstate(divide="ignore"):
            total = total + sign * xk * np.power(dist, k - alpha) * rgamma(k - alpha + 1)
    return total


def approximate_caputo_derivative(
    x: SampledFunction, scheme: ExpansionScheme, grid: Grid, exact: Callable | None = None
) -> ApproximationRun:
    """RL approximation minus the boundary terms at the anchor."""
    rl = approximate_rl_derivative(x, scheme, grid)
    dist = _distances(scheme.side, grid)
    singular = dist == 0
    corr = caputo_correction(x, scheme.alpha, dist, scheme.anchor, scheme.side)
    values = rl.values - corr
    oracle = _oracle_values(exact, grid.nodes, singular)
    values[singular] = oracle[singular] if oracle is not None else np.nan
    return ApproximationRun(grid, values, scheme.alpha, scheme.n, scheme.N, "caputo", scheme, oracle)


def approximate_classical_series(
    x: SampledFunction, alpha: float, N: int, grid: Grid, exact: Callable | None = None
) -> ApproximationRun:
    """Classical series ``sum_k binom(alpha,k) (t-a)^(k-alpha) x^(k)(t) / Gamma(k+1-alpha)``.

    Needs derivatives up to order ``N``; missing ones raise
    :class:`~fracocp.errors.CapabilityError`.
    """
    x = as_sampled(x)
    coeffs = classical_series_coefficients(alpha, N)
    derivs = [x.derivative(k) for k in range(N + 1)]
    t = grid.nodes
    dist = t - grid.a
    singular = dist == 0
    values = np.zeros_like(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        for k, (c, dk) in enumerate(zip(coeffs, derivs)):
            if c != 0.0:
                values = values + c * np.power(dist, k - alpha) * evaluate(dk, t)
    oracle = _oracle_values(exact, t, singular)
    values[singular] = oracle[singular] if oracle is not None else np.nan
    return ApproximationRun(grid, values, alpha, None, N, "series", None, oracle)


def moment_integration_error(x, scheme: ExpansionScheme, grid: Grid) -> np.ndarray:
    """Step-doubling estimate of the moment-integration error at the grid nodes."""
    coarse = approximate_rl_derivative(x, scheme, grid).values
    fine = approximate_rl_derivative(x, scheme, grid.refined()).values[::2]
    est = np.abs(coarse - fine)
    return np.where(np.isfinite(est), est, 0.0)


def running_max_abs(f: Callable, grid: Grid, oversample: int = 20) -> np.ndarray:
    """``max |f|`` over ``[a, t_i]`` for every node, by dense sampling (left side)."""
    fine = np.linspace(grid.a, grid.b, (grid.m - 1) * oversample + 1)
    running = np.maximum.accumulate(np.abs(evaluate(f, fine)))
    return running[::oversample]
