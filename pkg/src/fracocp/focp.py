"""Fractional optimal control problems and their necessary optimality conditions.

The problem class is

.. math::

    \\min\\; J = \\int_a^T L(t, x, u)\\,dt + \\phi(T, x(T)), \\qquad
    M\\dot x + N\\,{}^C_aD_t^\\alpha x = f(t, x, u), \\quad x(a) = x_a,

with scalar state and control. Along an extremal there is a costate
:math:`\\lambda` with

.. math::

    M\\dot\\lambda - N\\,{}_tD_T^\\alpha\\lambda = -H_x, \\qquad H_u = 0,
    \\qquad H = L + \\lambda f,

closed by transversality conditions that depend on what is prescribed at
the terminal time. :func:`solve_fractional_conditions` replaces both
fractional derivatives by the two-term expansion and solves the resulting
boundary value problem by shooting.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.integrate import simpson

from . import csvio
from .errors import (
    CapabilityError,
    IncompleteInputError,
    ParameterError,
    UnsupportedVariantError,
)
from .expansion import build_scheme
from .special import rgamma
from .tpbvp import ShootingProblem, Solution, SolverConfig, solve_shooting

#: Relative trim applied at singular interval ends, as a fraction of ``T - a``.
DEFAULT_TRIM = 1e-6
#: Relative step of the central-difference fallback for missing partials.
FD_REL_STEP = 1e-6


# ---------------------------------------------------------------- terminal data


@dataclass(frozen=True)
class TerminalSpec:
    """Base class of the terminal-condition variants."""

    free_time = False
    fixed_state = False

    @property
    def horizon(self) -> float | None:
        return getattr(self, "T", None)

    @property
    def case(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class FreeTFreeX(TerminalSpec):
    free_time = True


@dataclass(frozen=True)
class FixedTFreeX(TerminalSpec):
    T: float = 1.0


@dataclass(frozen=True)
class FreeTFixedX(TerminalSpec):
    x_T: float = 0.0
    free_time = True
    fixed_state = True


@dataclass(frozen=True)
class FixedTFixedX(TerminalSpec):
    T: float = 1.0
    x_T: float = 0.0
    fixed_state = True


@dataclass(frozen=True)
class Curve(TerminalSpec):
    """``x(T) = gamma(T)`` with ``T`` free."""

    gamma: Callable[[float], float] = None
    gamma_dot: Callable[[float], float] = None
    free_time = True
    fixed_state = True

    def __post_init__(self) -> None:
        if not (callable(self.gamma) and callable(self.gamma_dot)):
            raise ParameterError("curve terminal condition needs gamma and gamma_dot callables")


@dataclass(frozen=True)
class FixedTInequality(TerminalSpec):
    """``T`` fixed and ``x(T) >= K``."""

    T: float = 1.0
    K: float = 0.0


def _fischer_burmeister(a, b):
    # zero iff a >= 0, b >= 0 and a*b = 0
    return a + b - np.hypot(a, b)


def terminal_equations(terminal: TerminalSpec, x_end, T: float, g_x, g_t):
    """Shooting residuals and time residual for a terminal specification.

    ``g_x`` is the costate-type bracket ``M lam + N I lam - phi_x`` and
    ``g_t`` the Hamiltonian-type bracket of the free-time condition, both at
    the terminal time. Returns ``(residuals, time_residual_or_None)``.
    """
    if isinstance(terminal, FixedTFreeX):
        return [g_x], None
    if isinstance(terminal, FixedTFixedX):
        return [x_end - terminal.x_T], None
    if isinstance(terminal, FreeTFixedX):
        return [x_end - terminal.x_T], g_t
    if isinstance(terminal, FreeTFreeX):
        return [g_x], g_t
    if isinstance(terminal, Curve):
        return [x_end - terminal.gamma(T)], g_t - terminal.gamma_dot(T) * g_x
    if isinstance(terminal, FixedTInequality):
        return [_fischer_burmeister(x_end - terminal.K, -g_x)], None
    raise ParameterError(f"unknown terminal specification {terminal!r}")


# ---------------------------------------------------------------- problem model


def _central_difference(func: Callable, index: int) -> Callable:
    def partial(*args):
        args = [np.asarray(v, dtype=float) for v in args]
        h = FD_REL_STEP * np.maximum(1.0, np.abs(args[index]))
        up = list(args)
        dn = list(args)
        up[index] = args[index] + h
        dn[index] = args[index] - h
        return (np.asarray(func(*up)) - np.asarray(func(*dn))) / (2.0 * h)

    return partial


def _zero_cost(t, x):
    return 0.0 * np.asarray(x, dtype=float)


@dataclass
class FocpProblem:
    """Scalar fractional optimal control problem.

    Partial derivatives left as ``None`` are replaced by central differences
    (a :class:`RuntimeWarning` names them). ``control`` is the closed-form
    solution ``u(t, x, lam)`` of ``H_u = 0``; without it the stationary
    condition is solved numerically at every field evaluation. ``H_x_star``
    optionally gives ``H_x(t, x, control(t, x, lam), lam)`` in closed form;
    evaluating ``L_x`` at the stationary control can cancel catastrophically
    when the costate is small. ``A`` is the start of the cost integral and
    defaults to ``a``.
    """

    alpha: float
    L: Callable
    f: Callable
    terminal: TerminalSpec
    a: float = 0.0
    M: float = 1.0
    N: float = 1.0
    x_a: float = 0.0
    phi: Callable | None = None
    L_x: Callable | None = None
    L_u: Callable | None = None
    f_x: Callable | None = None
    f_u: Callable | None = None
    phi_t: Callable | None = None
    phi_x: Callable | None = None
    control: Callable | None = None
    H_x_star: Callable | None = None
    A: float | None = None
    name: str = "problem"
    approximated_partials: tuple[str, ...] = field(default=(), init=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and 0.0 < self.alpha < 1.0):
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.M == 0 and self.N == 0:
            raise ParameterError("(M, N) must not both vanish")
        if not all(math.isfinite(v) for v in (self.a, self.M, self.N, self.x_a)):
            raise ParameterError("a, M, N and x_a must be finite")
        if self.A is None:
            self.A = self.a
        if self.A < self.a:
            raise ParameterError(f"cost start A={self.A} precedes a={self.a}")
        if not isinstance(self.terminal, TerminalSpec):
            raise ParameterError("terminal must be a TerminalSpec")
        T = self.terminal.horizon
        if T is not None and not T > self.a:
            raise ParameterError(f"horizon T={T} must exceed a={self.a}")
        if self.phi is None:
            self.phi = _zero_cost
            self.phi_t = self.phi_t or _zero_cost
            self.phi_x = self.phi_x or _zero_cost
        missing = []
        for name, base, idx in (
            ("L_x", self.L, 1), ("L_u", self.L, 2), ("f_x", self.f, 1),
            ("f_u", self.f, 2), ("phi_t", self.phi, 0), ("phi_x", self.phi, 1),
        ):
            if getattr(self, name) is None:
                setattr(self, name, _central_difference(base, idx))
                missing.append(name)
        self.approximated_partials = tuple(missing)
        if missing:
            warnings.warn(
                f"{self.name}: finite-difference approximation for {', '.join(missing)}",
                RuntimeWarning,
                stacklevel=2,
            )

    @property
    def hamiltonian(self) -> "Hamiltonian":
        return Hamiltonian(self)


@dataclass(frozen=True)
class Hamiltonian:
    """``H = L + lam * f`` and its partial derivatives."""

    problem: FocpProblem

    def __call__(self, t, x, u, lam):
        p = self.problem
        return p.L(t, x, u) + lam * p.f(t, x, u)

    def H_x(self, t, x, u, lam):
        p = self.problem
        return p.L_x(t, x, u) + lam * p.f_x(t, x, u)

    def H_u(self, t, x, u, lam):
        p = self.problem
        return p.L_u(t, x, u) + lam * p.f_u(t, x, u)

    def H_lambda(self, t, x, u, lam):
        return self.problem.f(t, x, u)


def solve_stationary(H_u: Callable, t, x, lam, u0=None, tol: float = 1e-12, max_iter: int = 60):
    """Safeguarded Newton iteration for ``H_u(t, x, u, lam) = 0`` in ``u``, elementwise."""
    t, x, lam = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (t, x, lam)))
    u = np.zeros_like(x) if u0 is None else np.array(np.broadcast_to(u0, x.shape), dtype=float)
    g = np.asarray(H_u(t, x, u, lam), dtype=float)
    for _ in range(max_iter):
        scale = 1.0 + np.abs(u)
        if np.all(np.abs(g) <= tol * scale):
            return u
        h = 1e-6 * scale
        slope = (np.asarray(H_u(t, x, u + h, lam)) - np.asarray(H_u(t, x, u - h, lam))) / (2 * h)
        step = np.where(slope != 0, -g / np.where(slope != 0, slope, 1.0), 0.0)
        lam_step = np.ones_like(u)
        for _ in range(30):
            u_try = u + lam_step * step
            g_try = np.asarray(H_u(t, x, u_try, lam), dtype=float)
            worse = ~(np.abs(g_try) < np.abs(g)) & (np.abs(g) > tol * scale)
            if not np.any(worse):
                break
            lam_step = np.where(worse, 0.5 * lam_step, lam_step)
        u, g = u_try, g_try
    if np.any(~np.isfinite(u)) or np.any(np.abs(g) > 1e-8 * (1.0 + np.abs(u))):
        raise CapabilityError("stationary condition could not be solved for u")
    return u


# ---------------------------------------------------------------- conditions


@dataclass(frozen=True)
class OptimalityConditions:
    """Fractional Hamiltonian system, stationary relation and transversality list."""

    problem: FocpProblem
    hamiltonian: Hamiltonian
    control: Callable
    transversality: tuple[str, ...]
    fixed_terminal_values: int
    n_unknowns: int

    def state_residual(self, t, x, xdot, caputo_x, u):
        """``M x' + N C_D x - f``."""
        p = self.problem
        return p.M * xdot + p.N * caputo_x - p.f(t, x, u)

    def adjoint_residual(self, t, x, u, lam, lamdot, rl_right_lam):
        """``M lam' - N tD_T lam + H_x``."""
        p = self.problem
        return p.M * lamdot - p.N * rl_right_lam + self.hamiltonian.H_x(t, x, u, lam)

    def stationary_residual(self, t, x, u, lam):
        return self.hamiltonian.H_u(t, x, u, lam)

    def costate_source(self, t, x, u, lam):
        """``H_x`` along the stationary control."""
        p = self.problem
        if p.H_x_star is not None and p.control is not None:
            return p.H_x_star(t, x, lam)
        return self.hamiltonian.H_x(t, x, u, lam)


_TRANSVERSALITY = {
    "FixedTFreeX": ("costate",),
    "FreeTFixedX": ("hamiltonian",),
    "FixedTFixedX": (),
    "FreeTFreeX": ("hamiltonian", "costate"),
    "Curve": ("curve",),
    "FixedTInequality": ("inequality",),
}


def assemble_conditions(problem: FocpProblem) -> OptimalityConditions:
    """Collect the optimality conditions for a problem whose cost starts at ``a``.

    The complementarity pair of the inequality case counts as one condition.
    """
    if problem.A != problem.a:
        raise UnsupportedVariantError(
            f"cost start A={problem.A} differs from a={problem.a}: the extra adjoint and "
            "transversality conditions on [a, A] are only available as a-posteriori residuals"
        )
    term = problem.terminal
    labels = _TRANSVERSALITY[term.case]
    fixed = 1 if term.fixed_state else 0
    unknowns = 1 + (1 if term.free_time else 0)
    if len(labels) + fixed != unknowns:
        raise ParameterError(f"ill-posed terminal specification {term.case}")
    H = problem.hamiltonian
    if problem.control is not None:
        control = problem.control
    else:
        def control(t, x, lam):
            return solve_stationary(H.H_u, t, x, lam)
    return OptimalityConditions(problem, H, control, labels, fixed, unknowns)


@dataclass(frozen=True)
class TerminalData:
    """Channel values at the terminal time; ``I_lam`` is ``tI_T^(1-alpha) lam`` there."""

    x: float
    u: float
    lam: float
    xdot: float | None = None
    caputo_x: float | None = None
    I_lam: float = 0.0

    @classmethod
    def from_mapping(cls, data: Mapping) -> "TerminalData":
        missing = [k for k in ("x", "u", "lam") if data.get(k) is None]
        if missing:
            raise IncompleteInputError(f"terminal data lacks {', '.join(missing)}")
        keys = ("x", "u", "lam", "xdot", "caputo_x", "I_lam")
        return cls(**{k: data[k] for k in keys if k in data and data[k] is not None})


def transversality_brackets(conditions: OptimalityConditions, data: TerminalData, T: float):
    """The two brackets ``(g_x, g_t)`` of the general transversality conditions.

    ``g_t`` is ``None`` when the time-derivative channels are absent.
    """
    p = conditions.problem
    g_x = p.M * data.lam + p.N * data.I_lam - p.phi_x(T, data.x)
    if data.xdot is None or data.caputo_x is None:
        return float(g_x), None
    H = conditions.hamiltonian(T, data.x, data.u, data.lam)
    g_t = H - p.N * data.lam * data.caputo_x + p.N * data.xdot * data.I_lam + p.phi_t(T, data.x)
    return float(g_x), float(g_t)


def evaluate_transversality(conditions: OptimalityConditions, data, T: float) -> np.ndarray:
    """Transversality residuals at ``T`` in the order of ``conditions.transversality``.

    The inequality case reports ``(max(g, 0), (x(T) - K) g)`` with ``g`` the
    costate bracket, so a satisfied condition gives two zeros.
    """
    if not isinstance(data, TerminalData):
        data = TerminalData.from_mapping(data)
    labels = conditions.transversality
    if not labels:
        return np.zeros(0)
    needs_time = any(lbl in ("hamiltonian", "curve") for lbl in labels)
    g_x, g_t = transversality_brackets(conditions, data, T)
    if needs_time and g_t is None:
        raise IncompleteInputError("free-time conditions need the xdot and caputo_x channels")
    term = conditions.problem.terminal
    out = []
    for lbl in labels:
        if lbl == "costate":
            out.append(g_x)
        elif lbl == "hamiltonian":
            out.append(g_t)
        elif lbl == "curve":
            out.append(g_t - term.gamma_dot(T) * g_x)
        else:
            out.extend([max(g_x, 0.0), (data.x - term.K) * g_x])
    return np.asarray(out, dtype=float)


@dataclass
class SufficiencyReport:
    checks: dict[str, bool]
    verdict: str

    def lines(self) -> list[str]:
        return [f"{k}: {'yes' if v else 'no'}" for k, v in self.checks.items()] + [
            f"verdict: {self.verdict}"
        ]


def check_sufficiency(
    problem: FocpProblem,
    lam: np.ndarray,
    *,
    convex_L: bool = False,
    convex_f: bool = False,
    convex_phi: bool = False,
    f_linear: bool = False,
) -> SufficiencyReport:
    """Check the hypotheses of the convexity-based sufficiency result.

    Convexity and linearity are user declarations; only the fixed horizon and
    the sign of the costate samples ``lam`` are inspected here.
    """
    lam = np.asarray(lam, dtype=float)
    checks = {
        "convexity declared (L, f in x and u; phi in x)": bool(convex_L and convex_f and convex_phi),
        "terminal time fixed": not problem.terminal.free_time,
        "costate nonnegative or f linear": bool(f_linear or (lam.size > 0 and np.all(lam >= 0))),
    }
    verdict = "sufficient" if all(checks.values()) else "inconclusive"
    return SufficiencyReport(checks, verdict)


def cost_start_residuals(problem: FocpProblem, t: np.ndarray, lam: np.ndarray, T: float, points: int = 5) -> dict:
    """A-posteriori residuals of the extra conditions when the cost starts at ``A > a``.

    Returns the largest ``|tD_T lam - tD_A lam|`` over ``points`` interior
    nodes of ``(a, A)`` and the value of ``[tI_T^(1-alpha) lam - tI_A^(1-alpha) lam]`` at
    ``t = a``. ``lam`` is interpolated by a cubic spline.
    """
    from scipy.interpolate import CubicSpline

    from .operators import SampledFunction, rl_derivative_right, rl_integral_right

    if not problem.A > problem.a:
        raise ParameterError("the extra conditions only exist for A > a")
    spline = CubicSpline(t, lam)
    d1 = spline.derivative()
    x = SampledFunction(spline, derivatives=(d1,), a=float(t[0]), b=float(t[-1]))
    al = problem.alpha
    pts = np.linspace(problem.a, problem.A, points + 2)[1:-1]
    adj = rl_derivative_right(x, al, T, pts) - rl_derivative_right(x, al, problem.A, pts)
    at_a = max(float(t[0]), problem.a)
    tv = rl_integral_right(x, 1 - al, T, at_a) - rl_integral_right(x, 1 - al, problem.A, at_a)
    return {"adjoint": float(np.max(np.abs(adj))), "transversality": float(tv)}


# ---------------------------------------------------------------- solutions


@dataclass
class FocpSolution:
    """Sampled extremal produced by one of the two pipelines."""

    problem: FocpProblem
    pipeline: str
    N: int
    raw: Solution
    u: np.ndarray
    lam: np.ndarray
    transversality: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def t(self) -> np.ndarray:
        return self.raw.t

    @property
    def x(self) -> np.ndarray:
        return self.raw.y[:, 0]

    @property
    def T(self) -> float:
        return self.raw.T

    @property
    def converged(self) -> bool:
        return self.raw.converged

    @property
    def residual_norm(self) -> float:
        return self.raw.residual_norm

    def cost(self) -> float:
        """Composite Simpson quadrature of the running cost plus the terminal cost."""
        p = self.problem
        run = np.asarray(p.L(self.t, self.x, self.u), dtype=float)
        return float(simpson(run, x=self.t) + p.phi(self.T, self.x[-1]))

    def to_csv(self, path):
        names = list(self.raw.names or [f"y{i}" for i in range(self.raw.y.shape[1])])
        header = ["t", "x", "u"] + [n for n in names if n != "x"]
        cols = [self.t, self.x, self.u] + [self.raw.y[:, i] for i, n in enumerate(names) if n != "x"]
        return csvio.write_columns(path, header, cols)


def _column(v, ndim):
    return np.reshape(v, (-1,) + (1,) * (ndim - 1))


def _trims(problem: FocpProblem, trim: float, both_ends: bool) -> tuple[float, float]:
    if problem.N == 0:
        return 0.0, 0.0
    return trim, (trim if both_ends else 0.0)


def start_moments(problem: FocpProblem, ps, start_trim: float) -> Callable[[float], dict]:
    """Moment values at the trimmed start ``a + eps``, keyed by state index ``1 + k``.

    ``V_p' = (1-p) s^(p-2) x`` with ``x`` frozen at ``x_a`` gives
    ``V_p(a + eps) = -x_a eps^(p-1)``. Starting from zero instead leaves an
    ``O(eps^-alpha)`` imbalance in the state equation when ``x_a != 0``.
    """
    ps = [int(p) for p in ps]

    def known_at(T: float) -> dict:
        eps = start_trim * (T - problem.a)
        return {1 + k: -problem.x_a * eps ** (p - 1) for k, p in enumerate(ps)}

    return known_at


def _bracket(problem: FocpProblem, T_bracket) -> tuple[float, float] | None:
    if not problem.terminal.free_time:
        return None
    if T_bracket is None:
        raise ParameterError("a free terminal time needs a bracket for T")
    return float(T_bracket[0]), float(T_bracket[1])


# ---------------------------------------------------------------- fractional pipeline


@dataclass(frozen=True)
class FractionalSystem:
    """Approximated fractional Hamiltonian system with state ``[x, V_p, lam, W_p]``.

    Both fractional derivatives use the two-term expansion truncated at
    ``N``: the left one anchored at ``a`` with moments ``V_p`` and the right
    one anchored at ``T`` with moments ``W_p`` (``W_p(T) = 0``).
    """

    conditions: OptimalityConditions
    N: int
    A: float
    B: float
    C: np.ndarray
    ps: np.ndarray

    @property
    def K(self) -> int:
        return len(self.ps)

    @property
    def names(self) -> list[str]:
        ps = [int(p) for p in self.ps]
        return ["x"] + [f"V{p}" for p in ps] + ["lam"] + [f"W{p}" for p in ps]

    @property
    def dim(self) -> int:
        return 2 + 2 * self.K

    def split(self, y):
        K = self.K
        return y[0], y[1 : 1 + K], y[1 + K], y[2 + K :]

    def caputo_left(self, t, x, xdot, V):
        """Expansion of ``C_aD_t x`` given the state rate."""
        p = self.conditions.problem
        al = p.alpha
        s = t - p.a
        val = self.A * s**-al * x + self.B * s ** (1 - al) * xdot - p.x_a * s**-al * rgamma(1 - al)
        if self.K:
            val = val - np.sum(_column(self.C, np.ndim(V)) * s ** (1 - _column(self.ps, np.ndim(V)) - al) * V, axis=0)
        return val

    def field(self, t, y, T):
        p = self.conditions.problem
        al, Nc, M = p.alpha, p.N, p.M
        x, V, lam, W = self.split(y)
        u = self.conditions.control(t, x, lam)
        s = t - p.a
        r = T - t
        num = p.f(t, x, u) + 0.0 * x
        lam_num = -self.conditions.costate_source(t, x, u, lam) + 0.0 * x
        x_den = M
        lam_den = M
        if Nc != 0:
            num = num - Nc * self.A * s**-al * x + Nc * p.x_a * s**-al * rgamma(1 - al)
            lam_num = lam_num + Nc * self.A * r**-al * lam
            x_den = M + Nc * self.B * s ** (1 - al)
            lam_den = M + Nc * self.B * r ** (1 - al)
        out = np.empty_like(y)
        if self.K:
            nd = np.ndim(V)
            C = _column(self.C, nd)
            ps = _column(self.ps, nd)
            num = num + Nc * np.sum(C * s ** (1 - ps - al) * V, axis=0)
            lam_num = lam_num - Nc * np.sum(C * r ** (1 - ps - al) * W, axis=0)
            out[1 : 1 + self.K] = (1 - ps) * s ** (ps - 2) * x
            out[2 + self.K :] = -(1 - ps) * r ** (ps - 2) * lam
        out[0] = num / x_den
        out[1 + self.K] = lam_num / lam_den
        return out

    def terminal_data(self, t_end: float, y_end: np.ndarray, T: float) -> TerminalData:
        x, V, lam, W = self.split(y_end)
        xdot = self.field(t_end, y_end, T)[0]
        u = self.conditions.control(t_end, x, lam)
        cx = self.caputo_left(t_end, x, xdot, V)
        return TerminalData(float(x), float(u), float(lam), float(xdot), float(cx), 0.0)


def fractional_system(problem: FocpProblem, N: int) -> FractionalSystem:
    conditions = assemble_conditions(problem)
    if problem.N == 0:
        return FractionalSystem(conditions, N, 0.0, 0.0, np.zeros(0), np.zeros(0))
    lay = build_scheme(problem.alpha, 2, N, "left", problem.a).legacy
    ps = np.array(sorted(lay.C), dtype=float)
    return FractionalSystem(conditions, N, lay.A, lay.B, np.array([lay.C[int(p)] for p in ps]), ps)


def fractional_shooting_problem(
    problem: FocpProblem, N: int, T_bracket=None, trim: float = DEFAULT_TRIM, guess=None
) -> tuple[ShootingProblem, FractionalSystem]:
    """Shooting formulation of the approximated fractional conditions.

    Unknowns are ``lam`` and ``W_p`` at the (trimmed) initial time; residuals
    are the terminal conditions and ``W_p(T) = 0``. Both interval ends are
    trimmed because the right expansion is singular at ``T``.
    """
    sysm = fractional_system(problem, N)
    K = sysm.K
    term = problem.terminal
    start_trim, end_trim = _trims(problem, trim, both_ends=True)

    def end_time(T):
        return T - end_trim * (T - problem.a)

    # the brackets are evaluated where the channels were sampled, at the trimmed end
    def inner(y_end, T):
        te = end_time(T)
        data = sysm.terminal_data(te, y_end, T)
        g_x, g_t = transversality_brackets(sysm.conditions, data, te)
        res, _ = terminal_equations(term, data.x, T, g_x, g_t)
        return np.concatenate([np.asarray(res, dtype=float), y_end[2 + K :]])

    def time_residual(y_end, T):
        te = end_time(T)
        data = sysm.terminal_data(te, y_end, T)
        g_x, g_t = transversality_brackets(sysm.conditions, data, te)
        return terminal_equations(term, data.x, T, g_x, g_t)[1]

    known = {0: problem.x_a}
    known.update({1 + k: 0.0 for k in range(K)})
    shoot = ShootingProblem(
        field=sysm.field,
        dim=sysm.dim,
        a=problem.a,
        T=term.horizon,
        known=known,
        unknown=list(range(1 + K, 2 + 2 * K)),
        residual=inner,
        time_residual=time_residual if term.free_time else None,
        T_bracket=_bracket(problem, T_bracket),
        start_trim=start_trim,
        end_trim=end_trim,
        guess=guess,
        names=sysm.names,
        horizon_dependent=True,
        known_at=start_moments(problem, sysm.ps, start_trim),
    )
    return shoot, sysm


def solve_fractional_conditions(
    problem: FocpProblem,
    N: int,
    config: SolverConfig | None = None,
    T_bracket=None,
    trim: float = DEFAULT_TRIM,
    guess=None,
) -> FocpSolution:
    """Solve the expansion-approximated fractional optimality conditions by shooting."""
    shoot, sysm = fractional_shooting_problem(problem, N, T_bracket, trim, guess)
    raw = solve_shooting(shoot, config)
    x, V, lam, W = sysm.split(raw.y.T)
    u = np.asarray(sysm.conditions.control(raw.t, x, lam), dtype=float) + 0.0 * x
    data = sysm.terminal_data(raw.t[-1], raw.y[-1], raw.T)
    tv = evaluate_transversality(sysm.conditions, data, float(raw.t[-1]))
    return FocpSolution(problem, "fractional-conditions", N, raw, u, np.asarray(lam), tv)
