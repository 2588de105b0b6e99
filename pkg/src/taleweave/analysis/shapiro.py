"""Shapiro-Wilk normality test (Royston's AS R94 approximation).

Valid for sample sizes 3..5000. Coefficients for the linear combination of
order statistics come from Royston's polynomial corrections to the Blom
scores; the p-value uses his normalizing transforms of W (exact for n == 3).
No censoring support; ties are left untouched.
"""
from __future__ import annotations

import math
from functools import lru_cache
from statistics import NormalDist

from ..errors import ValidationFailure

MIN_N = 3
MAX_N = 5000

_NORMAL = NormalDist()

# Polynomial coefficients, constant term first (Royston 1995, AS R94).
_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)

_PI6 = 1.90985931710274  # 6/pi
_STQR = 1.04719755119660  # arcsin(sqrt(3/4))
_SMALL = 1e-19


class DegenerateSampleError(ValidationFailure):
    """All sample values are (numerically) identical; W is undefined."""


def _poly(coefficients: tuple[float, ...], x: float) -> float:
    total = 0.0
    for c in reversed(coefficients):
        total = total * x + c
    return total


@lru_cache(maxsize=256)
def _half_coefficients(n: int) -> tuple[float, ...]:
    """Positive weights a_1..a_{n//2} applied to (y_{n+1-i} - y_i)."""
    n2 = n // 2
    if n == 3:
        return (math.sqrt(0.5),)
    an25 = n + 0.25
    m = [_NORMAL.inv_cdf((i - 0.375) / an25) for i in range(1, n2 + 1)]  # negatives
    summ2 = 2.0 * sum(v * v for v in m)
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a1 = _poly(_C1, rsn) - m[0] / ssumm2
    if n > 5:
        i1 = 2
        a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
        fac = math.sqrt(
            (summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2)
            / (1.0 - 2.0 * a1 ** 2 - 2.0 * a2 ** 2)
        )
        head = [a1, a2]
    else:
        i1 = 1
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1 ** 2))
        head = [a1]
    tail = [-v / fac for v in m[i1:]]
    return tuple(head + tail)


def shapiro_wilk(sample) -> tuple[float, float]:
    """(W, p) for the null hypothesis that the sample is normal."""
    x = sorted(float(v) for v in sample)
    n = len(x)
    if n < MIN_N:
        raise ValidationFailure(f"Shapiro-Wilk needs at least {MIN_N} observations (got {n})")
    if n > MAX_N:
        raise ValidationFailure(f"Shapiro-Wilk approximation is valid up to n={MAX_N} (got {n})")
    if x[-1] - x[0] < _SMALL:
        raise DegenerateSampleError("sample has zero range; W is undefined")

    a = _half_coefficients(n)
    n2 = n // 2
    numerator = sum(a[i] * (x[n - 1 - i] - x[i]) for i in range(n2))
    mean = sum(x) / n
    ssx = sum((v - mean) ** 2 for v in x)
    w = (numerator * numerator) / ssx
    if w > 1.0:
        w = 1.0

    if n == 3:
        p = _PI6 * (math.asin(math.sqrt(w)) - _STQR)
        return w, min(max(p, 0.0), 1.0)

    y = math.log(1.0 - w) if w < 1.0 else -math.inf
    if n <= 11:
        gamma = _poly(_G, float(n))
        if y >= gamma:
            return w, _SMALL
        y = -math.log(gamma - y)
        m = _poly(_C3, float(n))
        s = math.exp(_poly(_C4, float(n)))
    else:
        ln_n = math.log(n)
        m = _poly(_C5, ln_n)
        s = math.exp(_poly(_C6, ln_n))
    if y == -math.inf:
        return w, 1.0
    p = 1.0 - _NORMAL.cdf((y - m) / s)
    return w, min(max(p, 0.0), 1.0)
