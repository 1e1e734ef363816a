"""Shared test functions."""

from __future__ import annotations

import numpy as np

from fracocp.operators import SampledFunction


def power(beta: int, a: float = 0.0, b: float = 1.0) -> SampledFunction:
    """``t**beta`` with exact derivatives."""

    def deriv(k):
        coef = float(np.prod([beta - j for j in range(k)])) if k else 1.0
        e = beta - k
        return lambda t: coef * np.asarray(t, dtype=float) ** e if e >= 0 else 0.0 * np.asarray(t, dtype=float)

    return SampledFunction(deriv(0), [deriv(k) for k in range(1, 6)], a, b, name=f"t^{beta}")


def constant(c: float, a: float = 0.0, b: float = 1.0) -> SampledFunction:
    zero = lambda t: 0.0 * np.asarray(t, dtype=float)  # noqa: E731
    return SampledFunction(lambda t: c + 0.0 * np.asarray(t, dtype=float), [zero, zero, zero], a, b, name="const")


def exp2(a: float = 0.0, b: float = 1.0) -> SampledFunction:
    return SampledFunction(
        lambda t: np.exp(2.0 * np.asarray(t, dtype=float)),
        [(lambda k: lambda t: 2.0**k * np.exp(2.0 * np.asarray(t, dtype=float)))(k) for k in range(1, 8)],
        a,
        b,
        name="exp2t",
    )
