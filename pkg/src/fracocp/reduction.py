"""Reduction of a fractional problem to a classical optimal control problem.

The Caputo derivative in the dynamics is replaced by the two-term expansion,
which turns the fractional constraint into the ordinary system

.. math::

    \\dot x = \\frac{f - N A s^{-\\alpha} x + \\sum_p N C_p s^{1-p-\\alpha} V_p
        + N x_a s^{-\\alpha}/\\Gamma(1-\\alpha)}{M + N B s^{1-\\alpha}}, \\qquad
    \\dot V_p = (1-p) s^{p-2} x, \\qquad s = t - a,

with ``V_p(a) = 0``. Its Pontryagin conditions carry one costate per state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, ParameterError, SingularReductionError
from .expansion import ExpansionScheme, Side, build_scheme
from .focp import (
    DEFAULT_TRIM,
    FocpProblem,
    FocpSolution,
    TerminalSpec,
    _bracket,
    _column,
    _trims,
    assemble_conditions,
    solve_stationary,
    start_moments,
    terminal_equations,
)
from .special import rgamma
from .tpbvp import ShootingProblem, SolverConfig, solve_shooting


@dataclass(frozen=True)
class ReducedOcp:
    """Classical problem with state ``(x, V_2, ..., V_N)``."""

    problem: FocpProblem
    scheme: ExpansionScheme
    A: float
    B: float
    C: np.ndarray
    ps: np.ndarray

    @property
    def K(self) -> int:
        return len(self.ps)

    @property
    def dim(self) -> int:
        return 1 + self.K

    @property
    def state_names(self) -> list[str]:
        return ["x"] + [f"V{int(p)}" for p in self.ps]

    def initial_state(self) -> np.ndarray:
        return np.concatenate([[self.problem.x_a], np.zeros(self.K)])

    def denominator(self, t):
        p = self.problem
        s = np.asarray(t, dtype=float) - p.a
        return p.M + p.N * self.B * s ** (1 - p.alpha)

    def singular_time(self) -> float | None:
        """First ``t > a`` where the denominator vanishes, or ``None``."""
        p = self.problem
        if p.N == 0 or p.M == 0 or self.B == 0:
            return None
        ratio = -p.M / (p.N * self.B)
        if ratio <= 0:
            return None
        return p.a + ratio ** (1.0 / (1.0 - p.alpha))

    def check_denominator(self, horizon: float, nodes: int = 1001) -> None:
        """Raise :class:`SingularReductionError` if the denominator vanishes on ``(a, horizon]``."""
        ts = self.singular_time()
        t = np.linspace(self.problem.a, horizon, nodes)[1:]
        d = self.denominator(t)
        if (ts is not None and ts <= horizon) or np.any(d == 0) or np.any(np.sign(d) != np.sign(d[0])):
            where = ts if ts is not None else float(t[np.argmin(np.abs(d))])
            raise SingularReductionError(f"denominator M + N B (t-a)^(1-alpha) vanishes near t={where:.6g}")

    def numerator(self, t, x, V, u):
        p = self.problem
        al = p.alpha
        s = t - p.a
        num = p.f(t, x, u) + 0.0 * x
        if p.N != 0:
            num = num - p.N * self.A * s**-al * x + p.N * p.x_a * s**-al * rgamma(1 - al)
            if self.K:
                nd = np.ndim(V)
                num = num + p.N * np.sum(_column(self.C, nd) * s ** (1 - _column(self.ps, nd) - al) * V, axis=0)
        return num

    def dynamics(self, t, x, V, u):
        """``x'`` of the reduced system."""
        return self.numerator(t, x, V, u) / self.denominator(t)

    def moment_rates(self, t, x):
        if not self.K:
            return np.zeros((0,) + np.shape(x))
        ps = _column(self.ps, np.ndim(x) + 1)
        return (1 - ps) * (t - self.problem.a) ** (ps - 2) * x


def reduce(problem: FocpProblem, scheme: ExpansionScheme | int, horizon: float | None = None) -> ReducedOcp:
    """Build the reduced classical problem.

    ``scheme`` is a left two-term scheme anchored at ``problem.a`` (or just
    the truncation index ``N``). The denominator is checked on ``(a, horizon]``
    where ``horizon`` defaults to the fixed terminal time.
    """
    if isinstance(scheme, (int, np.integer)):
        scheme = build_scheme(problem.alpha, 2, int(scheme), Side.Left, problem.a)
    if scheme.n != 2 or scheme.side is not Side.Left:
        raise ParameterError("the reduction uses the left two-term scheme (n = 2)")
    if scheme.alpha != problem.alpha or scheme.anchor != problem.a:
        raise ParameterError("scheme order and anchor must match the problem")
    if problem.N == 0:
        red = ReducedOcp(problem, scheme, 0.0, 0.0, np.zeros(0), np.zeros(0))
    else:
        lay = scheme.legacy
        ps = np.array(sorted(lay.C), dtype=float)
        red = ReducedOcp(problem, scheme, lay.A, lay.B, np.array([lay.C[int(p)] for p in ps]), ps)
    horizon = horizon if horizon is not None else problem.terminal.horizon
    if horizon is not None:
        red.check_denominator(horizon)
    return red


@dataclass(frozen=True)
class ReducedConditions:
    """Classical Pontryagin system of a :class:`ReducedOcp`.

    State ``[x, V_p, lam, lam_p]`` with ``lam`` the costate of ``x`` and
    ``lam_p`` those of the moments (``lam_p(T) = 0``). The stationary
    control is the original one evaluated at ``lam / (M + N B s^(1-alpha))``.
    """

    reduced: ReducedOcp
    terminal: TerminalSpec
    control_fn: object

    @property
    def K(self) -> int:
        return self.reduced.K

    @property
    def dim(self) -> int:
        return 2 * (1 + self.K)

    @property
    def names(self) -> list[str]:
        ps = [int(p) for p in self.reduced.ps]
        return ["x"] + [f"V{p}" for p in ps] + ["lam"] + [f"lam{p}" for p in ps]

    @property
    def boundary_conditions(self) -> list[str]:
        """Human-readable boundary set."""
        a = self.reduced.problem.a
        bc = [f"x({a:g})"] + [f"V{int(p)}({a:g})" for p in self.reduced.ps]
        term = self.terminal
        T = "T" if term.horizon is None else f"{term.horizon:g}"
        if term.fixed_state:
            bc.append(f"x({T})")
        else:
            bc.append(f"lam({T})")
        bc += [f"lam{int(p)}({T})" for p in self.reduced.ps]
        return bc

    def split(self, y):
        K = self.K
        return y[0], y[1 : 1 + K], y[1 + K], y[2 + K :]

    def control(self, t, x, lam):
        return self.control_fn(t, x, lam / self.reduced.denominator(t))

    def hamiltonian(self, t, y):
        """Hamiltonian of the reduced problem, ``L + lam x' + sum lam_p V_p'``."""
        red = self.reduced
        x, V, lam, lp = self.split(y)
        u = self.control(t, x, lam)
        H = red.problem.L(t, x, u) + lam * red.dynamics(t, x, V, u)
        if self.K:
            H = H + np.sum(lp * red.moment_rates(t, x), axis=0)
        return H

    def field(self, t, y):
        red = self.reduced
        p = red.problem
        al = p.alpha
        x, V, lam, lp = self.split(y)
        D = red.denominator(t)
        mu = lam / D
        u = self.control_fn(t, x, mu)
        s = t - p.a
        out = np.empty_like(y)
        out[0] = red.dynamics(t, x, V, u)
        # H_x of the original problem at costate lam / D is L_x + (lam / D) f_x
        if p.H_x_star is not None and p.control is not None:
            hx = p.H_x_star(t, x, mu)
        else:
            hx = p.L_x(t, x, u) + mu * p.f_x(t, x, u)
        lam_rate = -hx + 0.0 * x
        if p.N != 0:
            lam_rate = lam_rate + mu * p.N * red.A * s**-al
        if self.K:
            nd = np.ndim(x) + 1
            ps = _column(red.ps, nd)
            C = _column(red.C, nd)
            out[1 : 1 + self.K] = red.moment_rates(t, x)
            lam_rate = lam_rate - np.sum(lp * (1 - ps) * s ** (ps - 2), axis=0)
            out[2 + self.K :] = -mu * p.N * C * s ** (1 - ps - al)
        out[1 + self.K] = lam_rate
        return out

    def phi_coefficients(self, t) -> np.ndarray:
        """Coefficients ``phi_0, ..., phi_{N+1}`` of the closed-loop state equation.

        When ``x'`` is affine in ``(lam, x, V_p)``,
        ``x' = 2 phi_0 lam + phi_1 x + sum_p phi_p V_p + phi_{N+1}``. The
        coefficients are read off by probing the closed-loop rate with unit
        vectors; :meth:`is_affine` verifies the structure.
        """
        t = float(t)
        base = self._closed_loop_rate(t, np.zeros(self.dim // 2), 0.0)
        lam_c = self._closed_loop_rate(t, np.zeros(self.dim // 2), 1.0) - base
        coeffs = [0.5 * lam_c]
        for k in range(self.dim // 2):
            e = np.zeros(self.dim // 2)
            e[k] = 1.0
            coeffs.append(self._closed_loop_rate(t, e, 0.0) - base)
        coeffs.append(base)
        return np.array(coeffs)

    def is_affine(self, t, rng_seed: int = 0, tol: float = 1e-9) -> bool:
        """Check the affine structure behind :meth:`phi_coefficients` at a random point."""
        rng = np.random.default_rng(rng_seed)
        z = rng.standard_normal(self.dim // 2)
        lam = float(rng.standard_normal())
        c = self.phi_coefficients(t)
        predicted = 2 * c[0] * lam + np.dot(c[1:-1], z) + c[-1]
        actual = self._closed_loop_rate(float(t), z, lam)
        return bool(abs(predicted - actual) <= tol * (1 + abs(actual)))

    def _closed_loop_rate(self, t, states, lam):
        red = self.reduced
        x, V = states[0], states[1:]
        u = self.control(t, x, lam)
        return float(red.dynamics(t, x, V, u))


def classical_conditions(
    reduced: ReducedOcp, terminal: TerminalSpec | None = None, allow_implicit_control: bool = True
) -> ReducedConditions:
    """Pontryagin conditions of the reduced problem."""
    p = reduced.problem
    terminal = terminal or p.terminal
    if p.control is not None:
        control_fn = p.control
    elif allow_implicit_control:
        H = p.hamiltonian

        def control_fn(t, x, lam):
            return solve_stationary(H.H_u, t, x, lam)
    else:
        raise CapabilityError("no closed-form control and the implicit stationary solver is disabled")
    return ReducedConditions(reduced, terminal, control_fn)


def reduced_shooting_problem(
    problem: FocpProblem, N: int, T_bracket=None, trim: float = DEFAULT_TRIM, guess=None
) -> tuple[ShootingProblem, ReducedConditions]:
    """Shooting formulation: unknowns ``lam`` and ``lam_p`` at the (trimmed) start."""
    assemble_conditions(problem)  # validates the variant
    bracket = _bracket(problem, T_bracket)
    horizon = problem.terminal.horizon if bracket is None else bracket[1]
    red = reduce(problem, N, horizon)
    cond = classical_conditions(red)
    K = cond.K
    term = problem.terminal
    start_trim, _ = _trims(problem, trim, both_ends=False)

    def brackets(y_end, T):
        x, V, lam, lp = cond.split(y_end)
        g_x = lam - problem.phi_x(T, x)
        g_t = cond.hamiltonian(T, y_end) + problem.phi_t(T, x)
        return float(x), float(g_x), float(g_t)

    def inner(y_end, T):
        x, g_x, g_t = brackets(y_end, T)
        res, _ = terminal_equations(term, x, T, g_x, g_t)
        return np.concatenate([np.asarray(res, dtype=float), y_end[2 + K :]])

    def time_residual(y_end, T):
        x, g_x, g_t = brackets(y_end, T)
        return terminal_equations(term, x, T, g_x, g_t)[1]

    known = {i: v for i, v in enumerate(red.initial_state())}
    shoot = ShootingProblem(
        field=cond.field,
        dim=cond.dim,
        a=problem.a,
        T=term.horizon,
        known=known,
        unknown=list(range(1 + K, 2 + 2 * K)),
        residual=inner,
        time_residual=time_residual if term.free_time else None,
        T_bracket=bracket,
        start_trim=start_trim,
        guess=guess,
        names=cond.names,
        known_at=start_moments(problem, red.ps, start_trim),
    )
    return shoot, cond


def solve_reduced(
    problem: FocpProblem,
    N: int,
    config: SolverConfig | None = None,
    T_bracket=None,
    trim: float = DEFAULT_TRIM,
    guess=None,
) -> FocpSolution:
    """Reduce to a classical problem and solve its Pontryagin conditions by shooting."""
    shoot, cond = reduced_shooting_problem(problem, N, T_bracket, trim, guess)
    raw = solve_shooting(shoot, config)
    x, V, lam, lp = cond.split(raw.y.T)
    u = np.asarray(cond.control(raw.t, x, lam), dtype=float) + 0.0 * x
    res = shoot.residual(raw.y[-1], raw.T)
    return FocpSolution(problem, "reduce-then-classical", N, raw, u, np.asarray(lam), res[: len(res) - cond.K])
