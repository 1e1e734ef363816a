"""Fixed-step RK4 propagation and single shooting with damped Newton."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError, IntegrationBlowupError, ParameterError, SingularJacobianError

log = logging.getLogger(__name__)

Field = Callable[[float, np.ndarray], np.ndarray]


@dataclass
class Trajectory:
    """Samples of every state channel on a uniform grid; ``y[i]`` is the state at ``t[i]``."""

    t: np.ndarray
    y: np.ndarray
    names: Sequence[str] | None = None

    def channel(self, name: str) -> np.ndarray:
        if self.names is None or name not in self.names:
            raise KeyError(name)
        return self.y[:, list(self.names).index(name)]


def integrate_rk4(field: Field, t0: float, t1: float, y0, m: int) -> Trajectory:
    """Classical fourth-order Runge-Kutta with ``m`` nodes (step ``(t1-t0)/(m-1)``).

    ``y0`` may carry a trailing batch axis; the field must then broadcast over
    it. ``t1 < t0`` integrates backwards. Raises
    :class:`IntegrationBlowupError` as soon as a stage is non-finite.
    """
    if m < 2:
        raise ParameterError(f"need at least 2 nodes, got {m}")
    t = np.linspace(t0, t1, m)
    y = np.asarray(y0, dtype=float)
    out = np.empty((m,) + y.shape)
    out[0] = y
    with np.errstate(all="ignore"):
        for i in range(m - 1):
            ti = t[i]
            h = t[i + 1] - ti
            k1 = field(ti, y)
            k2 = field(ti + 0.5 * h, y + 0.5 * h * k1)
            k3 = field(ti + 0.5 * h, y + 0.5 * h * k2)
            k4 = field(ti + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(y)):
                raise IntegrationBlowupError(f"non-finite state near t={ti:.6g}", float(ti))
            out[i + 1] = y
    return Trajectory(t, out)


@dataclass
class SolverConfig:
    nodes: int = 1001
    tol: float = 1e-10
    max_iter: int = 50
    fd_step: float = 1e-7
    min_damping: float = 2.0**-20
    max_condition: float = 1e14
    T_xtol: float = 1e-12

    def __post_init__(self) -> None:
        if self.nodes < 2:
            raise ParameterError("nodes must be >= 2")
        if self.tol <= 0 or self.fd_step <= 0 or self.T_xtol <= 0:
            raise ParameterError("tolerances and steps must be positive")


@dataclass
class ShootingProblem:
    """Initial value problem with unknown initial components and terminal residuals.

    The integration interval for horizon ``T`` is
    ``[a + start_trim*(T-a), T - end_trim*(T-a)]``; the trims keep singular
    coefficients at the interval ends out of reach of the integrator.
    ``residual(y_end, T)`` must return one entry per unknown initial
    component. For a free horizon (``T is None``) a scalar
    ``time_residual(y_end, T)`` closes the system and ``T_bracket`` must
    contain one of its sign changes. With ``horizon_dependent`` the field is
    called as ``field(t, y, T)``. ``known_at(T)`` optionally overrides some
    known initial values when they depend on the horizon.
    """

    field: Field
    dim: int
    a: float
    T: float | None
    known: dict[int, float]
    unknown: Sequence[int]
    residual: Callable[[np.ndarray, float], np.ndarray]
    time_residual: Callable[[np.ndarray, float], float] | None = None
    T_bracket: tuple[float, float] | None = None
    start_trim: float = 0.0
    end_trim: float = 0.0
    guess: np.ndarray | None = None
    names: Sequence[str] | None = None
    vectorized: bool = True
    horizon_dependent: bool = False
    known_at: Callable[[float], Mapping[int, float]] | None = None

    def __post_init__(self) -> None:
        idx = sorted(list(self.known) + list(self.unknown))
        if idx != list(range(self.dim)):
            raise ParameterError("known and unknown components must partition the state")
        if self.T is None and (self.time_residual is None or self.T_bracket is None):
            raise ParameterError("free horizon needs time_residual and T_bracket")

    @property
    def free_time(self) -> bool:
        return self.T is None

    @property
    def n_unknowns(self) -> int:
        return len(self.unknown) + (1 if self.free_time else 0)

    def interval(self, T: float) -> tuple[float, float]:
        span = T - self.a
        return self.a + self.start_trim * span, T - self.end_trim * span

    def field_at(self, T: float) -> Field:
        if self.horizon_dependent:
            return lambda t, y: self.field(t, y, T)
        return self.field

    def initial_state(self, z: np.ndarray, T: float | None = None) -> np.ndarray:
        """Initial state(s); ``z`` may have a trailing batch axis."""
        z = np.asarray(z, dtype=float)
        y0 = np.zeros((self.dim,) + z.shape[1:])
        known = dict(self.known)
        if self.known_at is not None:
            known.update(self.known_at(self.T if T is None else T))
        for i, v in known.items():
            y0[i] = v
        for k, i in enumerate(self.unknown):
            y0[i] = z[k]
        return y0


@dataclass
class Solution:
    t: np.ndarray
    y: np.ndarray
    converged: bool
    residual_norm: float
    iterations: int
    T: float
    unknowns: np.ndarray
    names: Sequence[str] | None = None
    message: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def trajectory(self) -> Trajectory:
        return Trajectory(self.t, self.y, self.names)

    def channel(self, name: str) -> np.ndarray:
        return self.trajectory.channel(name)

    def to_csv(self, path):
        """Columns ``t`` and every state channel."""
        from .csvio import write_columns

        names = list(self.names or [f"y{i}" for i in range(self.y.shape[1])])
        return write_columns(path, ["t"] + names, [self.t] + [self.y[:, i] for i in range(self.y.shape[1])])


def _propagate(problem: ShootingProblem, z: np.ndarray, T: float, m: int) -> Trajectory:
    t0, t1 = problem.interval(T)
    y0 = problem.initial_state(z, T)
    field = problem.field_at(T)
    if problem.vectorized or y0.ndim == 1:
        return integrate_rk4(field, t0, t1, y0, m)
    runs = [integrate_rk4(field, t0, t1, y0[:, j], m) for j in range(y0.shape[1])]
    return Trajectory(runs[0].t, np.stack([r.y for r in runs], axis=-1))


def _residual(problem: ShootingProblem, y_end: np.ndarray, T: float) -> np.ndarray:
    return np.atleast_1d(np.asarray(problem.residual(y_end, T), dtype=float))


def _equilibrate(J: np.ndarray):
    """Column then row max-norm scaling; returns ``(Js, col, row)`` or ``None`` for a zero line."""
    col = np.abs(J).max(axis=0)
    if np.any(col == 0):
        return None
    Js = J / col
    row = np.abs(Js).max(axis=1)
    if np.any(row == 0):
        return None
    return Js / row[:, None], col, row


def _newton(problem: ShootingProblem, T: float, z0: np.ndarray, config: SolverConfig):
    """Damped Newton at fixed horizon. Returns (z, trajectory, residual, iterations, converged, message)."""
    m = config.nodes
    z = np.array(z0, dtype=float)
    k = z.size
    if k == 0:
        traj = _propagate(problem, z, T, m)
        r = _residual(problem, traj.y[-1], T)
        return z, traj, r, 0, bool(np.all(np.abs(r) <= config.tol)), ""
    traj = _propagate(problem, z, T, m)
    r = _residual(problem, traj.y[-1], T)
    if r.size != k:
        raise ParameterError(f"{r.size} residuals for {k} unknowns")
    norm = float(np.abs(r).max())
    for it in range(config.max_iter):
        if norm <= config.tol:
            return z, traj, r, it, True, ""
        steps = config.fd_step * (1.0 + np.abs(z))
        Z = z[:, None] + np.diag(steps)
        if problem.vectorized:
            ends = _propagate(problem, Z, T, m).y[-1]
            R = np.column_stack([_residual(problem, ends[:, j], T) for j in range(k)])
        else:
            R = np.column_stack(
                [_residual(problem, _propagate(problem, Z[:, j], T, m).y[-1], T) for j in range(k)]
            )
        J = (R - r[:, None]) / steps
        # the costate unknowns and residuals span many orders of magnitude;
        # solving the equilibrated system keeps the small components accurate
        eq = _equilibrate(J)
        cond = np.inf if eq is None else float(np.linalg.cond(eq[0]))
        if cond > config.max_condition:
            raise SingularJacobianError(f"shooting Jacobian condition {cond:.3e}", cond)
        Js, col, row = eq
        dz = np.linalg.solve(Js, -r / row) / col
        lam = 1.0
        while True:
            z_try = z + lam * dz
            try:
                traj_try = _propagate(problem, z_try, T, m)
                r_try = _residual(problem, traj_try.y[-1], T)
                norm_try = float(np.abs(r_try).max())
            except IntegrationBlowupError:
                norm_try = np.inf
            if np.isfinite(norm_try) and norm_try < norm:
                z, traj, r, norm = z_try, traj_try, r_try, norm_try
                break
            lam *= 0.5
            if lam < config.min_damping:
                return z, traj, r, it + 1, False, "line search failed"
        log.debug("newton it=%d |r|=%.3e damping=%g", it + 1, norm, lam)
    return z, traj, r, config.max_iter, norm <= config.tol, "" if norm <= config.tol else "iteration cap"


def solve_shooting(problem: ShootingProblem, config: SolverConfig | None = None) -> Solution:
    """Solve the boundary value problem by single shooting.

    Fixed horizon: damped Newton on the residual map with a forward-difference
    Jacobian; the step is halved until the residual max-norm decreases.
    Free horizon: the fixed-horizon problem is solved inside a Brent root
    search for the time residual over ``T_bracket``. Non-convergence is
    reported through ``Solution.converged``; a numerically singular Jacobian
    raises :class:`SingularJacobianError`.
    """
    config = config or SolverConfig()
    n = len(problem.unknown)
    z0 = np.zeros(n) if problem.guess is None else np.asarray(problem.guess, dtype=float)
    if z0.size != n:
        raise ParameterError(f"guess has {z0.size} entries, expected {n}")

    if not problem.free_time:
        z, traj, r, its, ok, msg = _newton(problem, problem.T, z0, config)
        return Solution(traj.t, traj.y, ok, float(np.abs(r).max()) if r.size else 0.0, its, problem.T, z, problem.names, msg)

    lo, hi = problem.T_bracket
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi and lo > problem.a):
        raise BracketError(f"degenerate horizon bracket [{lo}, {hi}]")
    state = {"z": z0, "evals": 0}

    def g(T: float) -> float:
        z, traj, r, its, ok, msg = _newton(problem, T, state["z"], config)
        state["evals"] += 1
        if ok:
            state["z"] = z
        return float(problem.time_residual(traj.y[-1], T))

    g_lo, g_hi = g(lo), g(hi)
    if np.sign(g_lo) == np.sign(g_hi) and g_lo != 0 and g_hi != 0:
        raise BracketError(
            f"time residual has no sign change on [{lo}, {hi}] (values {g_lo:.3e}, {g_hi:.3e})"
        )
    T_star = brentq(g, lo, hi, xtol=config.T_xtol, maxiter=200)
    z, traj, r, its, ok, msg = _newton(problem, T_star, state["z"], config)
    g_star = float(problem.time_residual(traj.y[-1], T_star))
    norm = max(float(np.abs(r).max()) if r.size else 0.0, abs(g_star))
    return Solution(
        traj.t, traj.y, ok and norm <= config.tol, norm, its, T_star, z, problem.names, msg,
        extras={"time_residual": g_star, "horizon_evaluations": state["evals"]},
    )
