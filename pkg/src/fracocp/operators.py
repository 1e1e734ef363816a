"""Reference fractional integrals and derivatives evaluated by quadrature.

These are the ground truth the expansion machinery is validated against:
Riemann-Liouville integrals and derivatives and Caputo derivatives, left and
right sided, for arbitrary smooth callables, plus closed forms for powers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import quadrature
from .errors import CapabilityError, DomainError, ParameterError
from .special import gamma, rgamma

ArrayLike = float | np.ndarray


@dataclass(frozen=True)
class FractionalOrder:
    """Order ``alpha > 0`` together with its integer companion ``n``.

    ``n = floor(alpha) + 1`` for non-integer orders and ``n = alpha`` for
    integer ones, so that ``n - 1 <= alpha < n`` or ``alpha == n``.
    """

    alpha: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ParameterError(f"fractional order must be positive, got {self.alpha}")

    @property
    def is_integer(self) -> bool:
        return float(self.alpha).is_integer()

    @property
    def n(self) -> int:
        if self.is_integer:
            return int(self.alpha)
        return int(math.floor(self.alpha)) + 1

    @classmethod
    def of(cls, alpha: "float | FractionalOrder") -> "FractionalOrder":
        return alpha if isinstance(alpha, FractionalOrder) else cls(float(alpha))


class OperatorKind(enum.Enum):
    LeftRLIntegral = "left-rl-integral"
    RightRLIntegral = "right-rl-integral"
    LeftRLDerivative = "left-rl-derivative"
    RightRLDerivative = "right-rl-derivative"
    LeftCaputo = "left-caputo"
    RightCaputo = "right-caputo"


def _fd_derivative(f: Callable, k: int, h: float) -> Callable:
    # central stencil, second-order accurate
    coeffs = [(-1) ** j * math.comb(k, j) for j in range(k + 1)]
    offsets = [(k / 2 - j) * h for j in range(k + 1)]

    def df(t):
        t = np.asarray(t, dtype=float)
        acc = np.zeros_like(t)
        for c, o in zip(coeffs, offsets):
            acc = acc + c * quadrature.evaluate(f, t + o)
        return acc / h**k

    return df


@dataclass(frozen=True)
class SampledFunction:
    """A function on ``[a, b]`` with optional derivative callables.

    ``derivatives[k-1]`` is the k-th derivative. Missing derivatives of order
    one and two fall back to central differences (``h = (b-a)*1e-5`` and
    ``(b-a)*1e-4``; accuracy degrades to roughly 1e-5) unless ``allow_fd`` is
    false. All callables must accept numpy arrays and be reentrant.
    """

    func: Callable
    derivatives: Sequence[Callable] = field(default_factory=tuple)
    a: float = 0.0
    b: float = 1.0
    allow_fd: bool = True
    name: str = "x"

    #: highest order available by finite differences
    MAX_FD_ORDER = 2

    def __post_init__(self) -> None:
        if not self.a < self.b:
            raise ParameterError(f"empty domain [{self.a}, {self.b}]")
        object.__setattr__(self, "derivatives", tuple(self.derivatives))

    def __call__(self, t: ArrayLike) -> ArrayLike:
        return self.func(t)

    def derivative(self, k: int) -> Callable:
        """Callable for the k-th derivative (k = 0 is the function itself)."""
        if k == 0:
            return self.func
        if k <= len(self.derivatives):
            return self.derivatives[k - 1]
        if not self.allow_fd:
            raise CapabilityError(
                f"derivative of order {k} of {self.name} missing and finite differences disabled"
            )
        if k > self.MAX_FD_ORDER:
            raise CapabilityError(
                f"derivative of order {k} of {self.name} missing; finite differences "
                f"only go up to order {self.MAX_FD_ORDER}"
            )
        h = (self.b - self.a) * (1e-5 if k == 1 else 1e-4)
        return _fd_derivative(self.func, k, h)

    def has_derivative(self, k: int) -> bool:
        return k == 0 or k <= len(self.derivatives)

    def check_consistency(self, points: int = 7, tol: float = 1e-4) -> float:
        """Largest scaled mismatch between supplied derivatives and finite differences.

        Raises :class:`ParameterError` when it exceeds ``tol``.
        """
        t = np.linspace(self.a, self.b, points + 2)[1:-1]
        worst = 0.0
        h = (self.b - self.a) * 1e-5
        for k, dk in enumerate(self.derivatives, start=1):
            lower = self.derivative(k - 1)
            approx = (quadrature.evaluate(lower, t + h) - quadrature.evaluate(lower, t - h)) / (2 * h)
            exact = quadrature.evaluate(dk, t)
            scale = 1.0 + np.abs(exact).max()
            worst = max(worst, float(np.abs(approx - exact).max() / scale))
        if worst > tol:
            raise ParameterError(f"derivative callables of {self.name} inconsistent (mismatch {worst:.2e})")
        return worst


def as_sampled(x: "SampledFunction | Callable") -> SampledFunction:
    """Wrap a bare callable; derivatives then come from finite differences on a unit scale."""
    if isinstance(x, SampledFunction):
        return x
    return SampledFunction(x)


def _prepare(t: ArrayLike) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


def _finish(value: np.ndarray, scalar: bool) -> ArrayLike:
    return float(value) if scalar else value


def _check_left(a: float, t: np.ndarray) -> None:
    if np.any(t < a):
        raise DomainError(f"left operator anchored at {a} evaluated before it (t={t.min():g})")


def _check_right(b: float, t: np.ndarray) -> None:
    if np.any(t > b):
        raise DomainError(f"right operator anchored at {b} evaluated after it (t={t.max():g})")


# -- integrals ---------------------------------------------------------------


def _rl_integral_left(f: Callable, alpha: float, a: float, t: np.ndarray) -> np.ndarray:
    return quadrature.abel_integral(f, a, t, alpha, "hi") / gamma(alpha)


def _rl_integral_right(f: Callable, alpha: float, b: float, t: np.ndarray) -> np.ndarray:
    return quadrature.abel_integral(f, t, b, alpha, "lo") / gamma(alpha)


def rl_integral_left(x, alpha, a: float, t: ArrayLike) -> ArrayLike:
    r"""Left Riemann-Liouville integral :math:`{}_aI_t^\alpha x`."""
    order = FractionalOrder.of(alpha)
    t, scalar = _prepare(t)
    _check_left(a, t)
    return _finish(_rl_integral_left(x, order.alpha, a, t), scalar)


def rl_integral_right(x, alpha, b: float, t: ArrayLike) -> ArrayLike:
    r"""Right Riemann-Liouville integral :math:`{}_tI_b^\alpha x`."""
    order = FractionalOrder.of(alpha)
    t, scalar = _prepare(t)
    _check_right(b, t)
    return _finish(_rl_integral_right(x, order.alpha, b, t), scalar)


# -- derivatives -------------------------------------------------------------


def _derivative(x, k: int) -> Callable:
    if k == 0 and not isinstance(x, SampledFunction):
        return x
    return as_sampled(x).derivative(k)


def _caputo_left(x, order: FractionalOrder, a: float, t: np.ndarray) -> np.ndarray:
    n = order.n
    dn = _derivative(x, n)
    if order.is_integer:
        return quadrature.evaluate(dn, t).copy()
    return quadrature.abel_integral(dn, a, t, n - order.alpha, "hi") * rgamma(n - order.alpha)


def _caputo_right(x, order: FractionalOrder, b: float, t: np.ndarray) -> np.ndarray:
    n = order.n
    dn = _derivative(x, n)
    sign = (-1) ** n
    if order.is_integer:
        return sign * quadrature.evaluate(dn, t)
    return sign * quadrature.abel_integral(dn, t, b, n - order.alpha, "lo") * rgamma(n - order.alpha)


def _boundary_terms(x, order: FractionalOrder, anchor: float, dist: np.ndarray, mirror: bool) -> np.ndarray:
    """Sum of ``x^(k)(anchor) dist^(k-alpha) / Gamma(k-alpha+1)``; signed by (-1)^k when mirrored."""
    total = np.zeros_like(dist)
    for k in range(order.n):
        xk = float(quadrature.evaluate(_derivative(x, k), np.asarray(anchor)))
        if xk == 0.0:
            continue
        if mirror:
            xk *= (-1) ** k
        with np.errstate(divide="ignore"):
            total = total + xk * dist ** (k - order.alpha) * rgamma(k - order.alpha + 1)
    return total


def _rl_derivative_left(x, order: FractionalOrder, a: float, t: np.ndarray) -> np.ndarray:
    if order.is_integer:
        return _caputo_left(x, order, a, t)
    return _caputo_left(x, order, a, t) + _boundary_terms(x, order, a, t - a, mirror=False)


def _rl_derivative_right(x, order: FractionalOrder, b: float, t: np.ndarray) -> np.ndarray:
    if order.is_integer:
        return _caputo_right(x, order, b, t)
    return _caputo_right(x, order, b, t) + _boundary_terms(x, order, b, b - t, mirror=True)


def _require_finite(values: np.ndarray, where: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise DomainError(f"{where} is singular at the anchor point for this function")
    return values


def caputo_derivative_left(x, alpha, a: float, t: ArrayLike) -> ArrayLike:
    r"""Left Caputo derivative :math:`{}^C_aD_t^\alpha x` (needs :math:`x^{(n)}`)."""
    order = FractionalOrder.of(alpha)
    t, scalar = _prepare(t)
    _check_left(a, t)
    return _finish(_caputo_left(x, order, a, t), scalar)


def caputo_derivative_right(x, alpha, b: float, t: ArrayLike) -> ArrayLike:
    r"""Right Caputo derivative :math:`{}^C_tD_b^\alpha x`."""
    order = FractionalOrder.of(alpha)
    t, scalar = _prepare(t)
    _check_right(b, t)
    return _finish(_caputo_right(x, order, b, t), scalar)


def rl_derivative_left(x, alpha, a: float, t: ArrayLike) -> ArrayLike:
    r"""Left Riemann-Liouville derivative :math:`{}_aD_t^\alpha x`.

    Evaluated as the Caputo derivative plus the boundary terms
    :math:`\sum_{k<n} x^{(k)}(a)(t-a)^{k-\alpha}/\Gamma(k-\alpha+1)`, which avoids
    differentiating a singular integral numerically. Raises
    :class:`DomainError` at ``t == a`` when a boundary term is singular there.
    """
    order = FractionalOrder.of(alpha)
    t, scalar = _prepare(t)
    _check_left(a, t)
    values = _require_finite(_rl_derivative_left(x, order, a, t), "left RL derivative")
    return _finish(values, scalar)


def rl_derivative_right(x, alpha, b: float, t: ArrayLike) -> ArrayLike:
    r"""Right Riemann-Liouville derivative :math:`{}_tD_b^\alpha x`."""
    order = FractionalOrder.of(alpha)
    t, scalar = _prepare(t)
    _check_right(b, t)
    values = _require_finite(_rl_derivative_right(x, order, b, t), "right RL derivative")
    return _finish(values, scalar)


def rl_derivative_left_direct(x, alpha, a: float, t: ArrayLike) -> ArrayLike:
    r"""Left RL derivative by differentiating the defining integral under the sign.

    Writing :math:`{}_aI^{n-\alpha}x(t) = (t-a)^{n-\alpha}F(t)` and applying
    Leibniz' rule gives

    .. math::

        {}_aD_t^\alpha x(t) = \frac{n-\alpha}{(t-a)^n} \sum_{j=0}^{n}
            \binom{n}{j}\frac{1}{\Gamma(j-\alpha+1)}
            \int_a^t (t-\tau)^{n-\alpha-1}(\tau-a)^j x^{(j)}(\tau)\,d\tau .

    Independent of the Caputo route; used as an oracle for the Caputo/RL relation.
    """
    order = FractionalOrder.of(alpha)
    if order.is_integer:
        return rl_derivative_left(x, alpha, a, t)
    t, scalar = _prepare(t)
    _check_left(a, t)
    n, al = order.n, order.alpha
    s = t - a
    total = np.zeros_like(s)
    for j in range(n + 1):
        dj = _derivative(x, j)

        def g(tau, dj=dj, j=j):
            return (tau - a) ** j * quadrature.evaluate(dj, tau)

        integral = quadrature.abel_integral(g, a, t, n - al, "hi")
        total = total + math.comb(n, j) * rgamma(j - al + 1) * integral
    with np.errstate(divide="ignore", invalid="ignore"):
        values = (n - al) * total / s**n
    values = _require_finite(values, "left RL derivative")
    return _finish(values, scalar)


def apply_operator(kind: OperatorKind, x, alpha, anchor: float, t: ArrayLike) -> ArrayLike:
    """Dispatch on :class:`OperatorKind`; ``anchor`` is ``a`` for left and ``b`` for right operators."""
    table = {
        OperatorKind.LeftRLIntegral: rl_integral_left,
        OperatorKind.RightRLIntegral: rl_integral_right,
        OperatorKind.LeftRLDerivative: rl_derivative_left,
        OperatorKind.RightRLDerivative: rl_derivative_right,
        OperatorKind.LeftCaputo: caputo_derivative_left,
        OperatorKind.RightCaputo: caputo_derivative_right,
    }
    return table[kind](x, alpha, anchor, t)


# -- closed forms --------------------------------------------------------------


def power_integral(beta: float, alpha: float, t: ArrayLike, a: float = 0.0) -> ArrayLike:
    """Left RL integral of ``(t-a)**beta``: ``Gamma(beta+1)/Gamma(beta+1+alpha) (t-a)**(beta+alpha)``."""
    return gamma(beta + 1) * rgamma(beta + 1 + alpha) * (np.asarray(t, float) - a) ** (beta + alpha)


def power_derivative(beta: float, alpha: float, t: ArrayLike, a: float = 0.0) -> ArrayLike:
    """Left RL derivative of ``(t-a)**beta``: ``Gamma(beta+1)/Gamma(beta+1-alpha) (t-a)**(beta-alpha)``.

    For ``beta > n - 1`` (or integer ``beta >= n``) this is also the Caputo derivative.
    """
    return gamma(beta + 1) * rgamma(beta + 1 - alpha) * (np.asarray(t, float) - a) ** (beta - alpha)


# -- calculus property checks -------------------------------------------------


@dataclass
class PropertyReport:
    """Residuals of the classical calculus rules at the sample points."""

    residuals: dict[str, float]
    tol: float
    sample_points: np.ndarray

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def lines(self) -> list[str]:
        return [
            f"{name}: residual {value:.3e} {'ok' if value <= self.tol else 'FAIL'}"
            for name, value in self.residuals.items()
        ]


def check_calculus_properties(
    x: SampledFunction,
    alpha,
    a: float,
    b: float,
    tol: float = 1e-5,
    *,
    beta: float | None = None,
    y: SampledFunction | None = None,
    points: Sequence[float] | None = None,
) -> PropertyReport:
    """Check the Caputo/RL relation, semigroup, inverse and integration-by-parts rules.

    Residuals (max over the sample points) are reported under the keys
    ``caputo_rl_relation``, ``semigroup``, ``caputo_after_integral``,
    ``integral_after_caputo`` and ``integration_by_parts``. The last one needs
    a second function ``y`` (default ``y(t) = t``) and ``alpha < 1``.
    """
    order = FractionalOrder.of(alpha)
    if order.is_integer:
        raise ParameterError("property checks need a non-integer order")
    al, n = order.alpha, order.n
    beta = al if beta is None else beta
    if points is None:
        points = a + (b - a) * np.array([0.25, 0.5, 0.75, 1.0])
    t = np.asarray(points, dtype=float)
    residuals: dict[str, float] = {}

    # 1: Caputo = RL - boundary terms, RL taken by the independent Leibniz route
    rl = rl_derivative_left_direct(x, order, a, t)
    caputo = caputo_derivative_left(x, order, a, t)
    residuals["caputo_rl_relation"] = _max_abs(caputo - (rl - _boundary_terms(x, order, a, t - a, False)))

    # 2: I^alpha I^beta = I^(alpha+beta)
    inner = lambda tau: _rl_integral_left(x, beta, a, np.asarray(tau, float))  # noqa: E731
    lhs = rl_integral_left(inner, al, a, t)
    rhs = rl_integral_left(x, al + beta, a, t)
    residuals["semigroup"] = _max_abs(lhs - rhs)

    # 3: C-D^alpha I^alpha x = x; the n-th derivative of I^alpha x is
    #    sum_k x^(k)(a) (t-a)^(alpha-n+k) / Gamma(alpha-n+k+1) + I^alpha x^(n)
    xn = _derivative(x, n)
    xa = [float(quadrature.evaluate(_derivative(x, k), np.asarray(a))) for k in range(n)]

    def integral_nth_derivative(tau):
        tau = np.asarray(tau, float)
        out = _rl_integral_left(xn, al, a, tau)
        with np.errstate(divide="ignore"):
            for k, c in enumerate(xa):
                if c != 0.0:
                    out = out + c * (tau - a) ** (al - n + k) * rgamma(al - n + k + 1)
        return out

    lhs = quadrature.abel_integral(integral_nth_derivative, a, t, n - al, "hi") * rgamma(n - al)
    residuals["caputo_after_integral"] = _max_abs(lhs - quadrature.evaluate(x, t))

    # 4: I^alpha C-D^alpha x = x - Taylor polynomial at a
    caputo_fn = lambda tau: _caputo_left(x, order, a, np.asarray(tau, float))  # noqa: E731
    lhs = rl_integral_left(caputo_fn, al, a, t)
    taylor = sum(c * (t - a) ** k / math.factorial(k) for k, c in enumerate(xa))
    residuals["integral_after_caputo"] = _max_abs(lhs - (quadrature.evaluate(x, t) - taylor))

    # 5: integration by parts on [a, b]
    if al < 1:
        if y is None:
            y = SampledFunction(lambda s: np.asarray(s, float), [lambda s: np.ones_like(np.asarray(s, float))], a, b, name="y")
        residuals["integration_by_parts"] = _integration_by_parts_residual(x, y, order, a, b)
    return PropertyReport(residuals, tol, t)


def _integration_by_parts_residual(x, y, order: FractionalOrder, a: float, b: float) -> float:
    al, n = order.alpha, order.n
    lhs_integrand = lambda s: quadrature.evaluate(y, s) * _caputo_left(x, order, a, np.asarray(s, float))  # noqa: E731
    # split the right RL derivative (alpha < 1) into its Caputo part and the
    # singular boundary term y(b) (b-s)^(-alpha) / Gamma(1-alpha); the latter is
    # integrated against the Abel kernel so nodes next to b keep their distance
    rhs_integrand = lambda s: quadrature.evaluate(x, s) * _caputo_right(y, order, b, np.asarray(s, float))  # noqa: E731
    lhs = float(quadrature.abel_integral(lhs_integrand, a, b, 1.0))
    rhs = float(quadrature.abel_integral(rhs_integrand, a, b, 1.0))
    y_b = float(quadrature.evaluate(y, np.asarray(b)))
    if y_b != 0.0:
        rhs += y_b * rgamma(1.0 - al) * float(quadrature.abel_integral(lambda s: quadrature.evaluate(x, s), a, b, 1.0 - al, "hi"))
    # [ tI_b^(n-j-alpha) y * tD_b^(n-1-j) x ]_a^b ; the integral vanishes at t = b
    for j in range(n):
        m = n - 1 - j
        right_int = float(_rl_integral_right(y, n - j - al, b, np.asarray(a)))
        xm = (-1) ** m * float(quadrature.evaluate(_derivative(x, m), np.asarray(a)))
        rhs -= right_int * xm
    return abs(lhs - rhs)


def _max_abs(v) -> float:
    return float(np.max(np.abs(v)))
