"""Integer-order expansion of the Riemann-Liouville derivative.

For an expansion order ``n`` and truncation index ``N >= n``

.. math::

    {}_aD_t^\\alpha x(t) \\approx \\sum_{i=0}^{n-1} A_i (t-a)^{i-\\alpha} x^{(i)}(t)
        + \\sum_{p=n}^{N} B_p (t-a)^{n-1-p-\\alpha} V_p(t),
    \\qquad V_p(t) = (p-n+1)\\int_a^t (\\tau-a)^{p-n} x(\\tau)\\,d\\tau .

The series hidden inside every ``A_i`` is cut at the same index ``N`` as the
moment sum. With that choice the monomials ``1, (t-a), ..., (t-a)^(n-1)`` are
reproduced exactly, which the tests use as a correctness certificate.

The two-term layout ``A x + B x' - sum C_p V_p`` with ``V_p' = (1-p)(t-a)^(p-2) x``
is the ``n = 2`` case with ``A = A_0``, ``B = A_1``, ``C_p = B_p`` and moments of
opposite sign; :attr:`ExpansionScheme.legacy` exposes it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundInapplicableError, ParameterError
from .special import frac_binomial, gamma, rgamma


class Side(enum.Enum):
    Left = "left"
    Right = "right"

    @classmethod
    def of(cls, side: "Side | str") -> "Side":
        return side if isinstance(side, Side) else cls(str(side).lower())


@dataclass(frozen=True)
class MomentSpec:
    """Auxiliary state ``V_p`` with ``V_p' = (p-n+1) (t-a)^(p-n) x`` and ``V_p(a) = 0``.

    ``legacy`` selects the two-term layout's ``V_p' = (1-p)(t-a)^(p-2) x``.
    """

    p: int
    n: int
    legacy: bool = False

    @property
    def exponent(self) -> int:
        return self.p - self.n

    @property
    def factor(self) -> float:
        if self.legacy:
            return float(1 - self.p)
        return float(self.p - self.n + 1)

    def rate(self, dist, x):
        """Right-hand side of the moment equation at distance ``dist`` from the anchor."""
        return self.factor * np.power(dist, self.exponent) * x


@dataclass(frozen=True)
class LegacyLayout:
    """Coefficients of ``A x + B x' - sum_p C_p V_p`` (``n = 2``)."""

    A: float
    B: float
    C: dict[int, float]


@dataclass(frozen=True)
class ExpansionScheme:
    alpha: float
    n: int
    N: int
    side: Side
    anchor: float
    A: tuple[float, ...]
    B: tuple[float, ...]

    @property
    def ps(self) -> range:
        return range(self.n, self.N + 1)

    def B_of(self, p: int) -> float:
        return self.B[p - self.n]

    @property
    def moments(self) -> list[MomentSpec]:
        return [MomentSpec(p, self.n) for p in self.ps]

    @property
    def legacy(self) -> LegacyLayout:
        if self.n != 2 or not 0 < self.alpha < 1:
            raise ParameterError("the two-term layout needs n = 2 and 0 < alpha < 1")
        return LegacyLayout(self.A[0], self.A[1], {p: self.B_of(p) for p in self.ps})

    def combine(self, dist, derivatives, moments):
        """Assemble the truncated expansion.

        ``dist`` is ``t - a`` (left) or ``b - t`` (right); ``derivatives[i]`` is
        :math:`x^{(i)}(t)` for ``i < n`` and ``moments[k]`` the moment for
        ``p = n + k`` (for a right scheme, the mirrored moments
        ``(p-n+1) int_t^b (b-tau)^(p-n) x``). Works elementwise on arrays.
        """
        al = self.alpha
        total = 0.0
        for i, Ai in enumerate(self.A):
            sign = (-1) ** i if self.side is Side.Right else 1
            total = total + sign * Ai * np.power(dist, i - al) * derivatives[i]
        for k, p in enumerate(self.ps):
            total = total + self.B[k] * np.power(dist, self.n - 1 - p - al) * moments[k]
        return total


def _a_coefficient(alpha: float, n: int, i: int, N: int) -> float:
    # terms Gamma(k+alpha)/(k+i)! for k = p-n+1 running over 1-i .. N-n+1
    k = 1 - i
    term = gamma(k + alpha)  # (k+i)! = 1
    acc = term
    for k in range(2 - i, N - n + 2):
        term *= (k - 1 + alpha) / (k + i)
        acc += term
    return rgamma(i + 1 - alpha) * (1.0 + acc * rgamma(alpha - i))


def _b_coefficients(alpha: float, n: int, N: int) -> tuple[float, ...]:
    # Gamma(k+alpha) / (Gamma(-alpha) Gamma(1+alpha) k!), k = p-n+1
    out = []
    q = 1.0
    for k in range(1, N - n + 2):
        if k > 1:
            q *= (k - 1 + alpha) / k
        out.append(q * rgamma(-alpha))
    return tuple(out)


def build_scheme(
    alpha: float, n: int, N: int, side: "Side | str" = Side.Left, anchor: float = 0.0
) -> ExpansionScheme:
    """Coefficients of the expansion of order ``n`` truncated at ``N``.

    ``anchor`` is the lower terminal ``a`` of a left scheme or the upper
    terminal ``b`` of a right one.
    """
    side = Side.of(side)
    if not (math.isfinite(alpha) and alpha > 0):
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if float(alpha).is_integer():
        raise ParameterError(f"alpha must not be an integer, got {alpha}")
    if int(n) != n or n < 1:
        raise ParameterError(f"expansion order n must be a positive integer, got {n}")
    if int(N) != N or N < n:
        raise ParameterError(f"truncation index N={N} must be an integer >= n={n}")
    n, N = int(n), int(N)
    A = tuple(_a_coefficient(alpha, n, i, N) for i in range(n))
    return ExpansionScheme(float(alpha), n, N, side, float(anchor), A, _b_coefficients(alpha, n, N))


def truncation_error_bound(scheme: ExpansionScheme, L_n: float, t_minus_a):
    r"""Upper bound on the truncation error.

    .. math::

        |E_{tr}(t)| \le L_n \frac{e^{(n-1-\alpha)^2+n-1-\alpha}}
            {\Gamma(n-\alpha)(n-1-\alpha)N^{n-1-\alpha}} (t-a)^{n-\alpha}

    with ``L_n = max |x^(n)|`` on ``[a, t]``. Only meaningful when
    ``n - 1 - alpha > 0``.
    """
    e = scheme.n - 1 - scheme.alpha
    if e <= 0:
        raise BoundInapplicableError(
            f"bound needs n - 1 - alpha > 0 (n={scheme.n}, alpha={scheme.alpha})"
        )
    if np.any(np.asarray(L_n) < 0) or np.any(np.asarray(t_minus_a) < 0):
        raise ParameterError("L_n and t - a must be non-negative")
    const = math.exp(e * e + e) / (gamma(scheme.n - scheme.alpha) * e * scheme.N**e)
    value = L_n * const * np.power(t_minus_a, scheme.n - scheme.alpha)
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class ErrorBound:
    L_n: float
    value: float
    alpha: float
    n: int
    N: int
    t_minus_a: float

    @classmethod
    def compute(cls, scheme: ExpansionScheme, L_n: float, t_minus_a: float) -> "ErrorBound":
        value = truncation_error_bound(scheme, L_n, t_minus_a)
        return cls(L_n, value, scheme.alpha, scheme.n, scheme.N, t_minus_a)


def classical_series_coefficients(alpha: float, N: int) -> np.ndarray:
    """Coefficients ``binom(alpha, k) / Gamma(k+1-alpha)`` for ``k = 0..N``.

    Multiplying the k-th one by ``(t-a)**(k-alpha) * x^(k)(t)`` and summing
    gives the classical series approximation of the RL derivative.
    """
    if int(N) != N or N < 0:
        raise ParameterError(f"N must be a non-negative integer, got {N}")
    return np.array([frac_binomial(alpha, k) * rgamma(k + 1 - alpha) for k in range(int(N) + 1)])
