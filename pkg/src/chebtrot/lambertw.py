"""Real Lambert W on the principal (0) and lower (-1) branches via Halley iteration."""

from __future__ import annotations

import math

from .errors import DomainError

_INV_E = math.exp(-1.0)
TOL = 1e-13


def _halley(x: float, w: float) -> float:
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= TOL * (1.0 + abs(w)):
            break
    return w


def _branch_point_series(x: float, sign: float) -> float:
    p = sign * math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3


def lambertw0(x: float) -> float:
    """Principal branch ``W_0(x)`` for ``x >= -1/e``."""
    x = float(x)
    if x < -_INV_E - 1e-15:
        raise DomainError(f"W_0 is real only for x >= -1/e, got {x}")
    if x <= -_INV_E:
        return -1.0
    if x == 0.0:
        return 0.0
    if x < -0.25:
        w = _branch_point_series(x, 1.0)
    elif x < math.e:
        w = math.log1p(x) * (1.0 - 0.3 * math.log1p(x) / (1.0 + math.log1p(x)))
    else:
        lx = math.log(x)
        w = lx - math.log(lx)
    return _halley(x, w)


def lambertw_m1(x: float) -> float:
    """Lower branch ``W_{-1}(x)`` for ``-1/e <= x < 0``."""
    x = float(x)
    if not (-_INV_E - 1e-15 <= x < 0.0):
        raise DomainError(f"W_-1 is real only for -1/e <= x < 0, got {x}")
    if x <= -_INV_E:
        return -1.0
    if x < -0.25:
        w = _branch_point_series(x, -1.0)
    else:
        l1 = math.log(-x)
        w = l1 - math.log(-l1)
    return _halley(x, w)
