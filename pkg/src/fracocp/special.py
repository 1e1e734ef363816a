"""Gamma function and generalized binomial coefficients."""

from __future__ import annotations

import math

from .errors import DomainError, GammaOverflowError, PoleError


def _is_pole(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def gamma(x: float) -> float:
    """Euler's gamma function for real arguments.

    Negative non-integer arguments are supported. Raises :class:`PoleError`
    at ``0, -1, -2, ...`` and :class:`GammaOverflowError` when the result is
    not representable.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"gamma needs a finite argument, got {x}")
    if _is_pole(x):
        raise PoleError(f"gamma has a pole at {x:g}")
    try:
        value = math.gamma(x)
    except OverflowError as exc:
        raise GammaOverflowError(f"gamma({x:g}) overflows") from exc
    if value == 0.0 or not math.isfinite(value):
        # very negative arguments underflow to zero; that is not the true value
        raise GammaOverflowError(f"gamma({x:g}) is not representable")
    return value


def rgamma(x: float) -> float:
    """Reciprocal gamma ``1/gamma(x)``, an entire function (zero at the poles)."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"rgamma needs a finite argument, got {x}")
    if _is_pole(x):
        return 0.0
    if x > 170.0:
        return math.exp(-math.lgamma(x))
    return 1.0 / math.gamma(x)


def frac_binomial(alpha: float, k: int) -> float:
    r"""Generalized binomial coefficient :math:`\binom{\alpha}{k}`.

    Equivalent to ``(-1)**(k-1) * alpha * gamma(k-alpha) / (gamma(1-alpha) * k!)``
    for non-integer ``alpha``; the falling-factorial product used here is also
    valid for integer ``alpha`` (where the coefficient vanishes for ``k > alpha``).
    """
    if k < 0 or int(k) != k:
        raise DomainError(f"k must be a non-negative integer, got {k}")
    value = 1.0
    for j in range(int(k)):
        value *= (alpha - j) / (j + 1)
    return value
