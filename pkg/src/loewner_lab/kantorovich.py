"""Kantorovich constants.

``kantorovich_r(m, M, r)`` is the power-function constant

    K(m, M, r) = (m M^r - M m^r) / ((r - 1)(M - m))
                 * [ (r - 1)(M^r - m^r) / (r (m M^r - M m^r)) ]^r

and ``kantorovich_f`` its function-form analogue, the largest ratio of the
chord of ``f`` over ``f`` itself on [m, M].
"""

import math

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, ParameterError, PositivityError
from .funcspec import eval_function


def _stable(m, M, r):
    # With t = M/m the constant depends on t only; expm1 keeps M close to m accurate.
    u = math.log(M / m)
    e1 = math.expm1((r - 1.0) * u)
    er = math.expm1(r * u)
    e0 = math.expm1(u)
    t = M / m
    prefactor = t * e1 / ((r - 1.0) * e0)
    base = (r - 1.0) * er / (r * t * e1)
    return prefactor * base**r


def kantorovich_r(m, M, r):
    """Kantorovich constant for the power ``x^r`` on [m, M]; ``r != 1``."""
    m = float(m)
    M = float(M)
    r = float(r)
    if r == 1.0:
        raise ParameterError("K(m, M, r) is undefined at r = 1")
    if not M > m:
        raise ParameterError(f"need m < M, got m = {m}, M = {M}")
    if r == 0.0:
        return 1.0
    if m > 0:
        value = _stable(m, M, r)
    else:
        num = m * M**r - M * m**r if r.is_integer() else math.nan
        if math.isnan(num):
            raise DomainError(f"m = {m} <= 0 with non-integer r = {r}", value=m)
        base = (r - 1.0) * (M**r - m**r) / (r * num)
        if base <= 0 and not r.is_integer():
            raise DomainError(f"bracket base {base!r} <= 0 with non-integer exponent r = {r}", value=base)
        value = num / ((r - 1.0) * (M - m)) * base**r
    if not math.isfinite(value):
        raise DomainError(f"K({m}, {M}, {r}) is not finite", value=value)
    return value


def _chord_ratio(f, m, M, fm, fM):
    def ratio(x):
        fx = np.asarray(eval_function(f, x), dtype=float)
        chord = ((M - x) * fm + (x - m) * fM) / (M - m)
        return chord / fx

    return ratio


def kantorovich_f(m, M, f, grid_size=10_001):
    """``max_x chord(f)(x) / f(x)`` over [m, M] for ``f > 0``.

    Returns ``(value, argmax)``.  Grid maximum, then golden-section around it.
    """
    m = float(m)
    M = float(M)
    if not 0 < m < M:
        raise ParameterError(f"need 0 < m < M, got m = {m}, M = {M}")
    x = np.linspace(m, M, grid_size)
    fx = np.asarray(eval_function(f, x), dtype=float)
    if np.any(fx <= 0):
        bad = x[np.argmax(fx <= 0)]
        raise PositivityError(f"f must be positive on [{m}, {M}]; f({bad!r}) <= 0", min_eigenvalue=float(fx.min()))
    ratio = _chord_ratio(f, m, M, fx[0], fx[-1])
    vals = ratio(x)
    i = int(np.argmax(vals))
    best_x, best = float(x[i]), float(vals[i])
    lo, hi = x[max(i - 1, 0)], x[min(i + 1, grid_size - 1)]
    if hi > lo:
        res = minimize_scalar(lambda t: -float(ratio(t)), bracket=None, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14 * (1.0 + abs(hi))})
        if -res.fun > best:
            best_x, best = float(res.x), float(-res.fun)
    return best, best_x
