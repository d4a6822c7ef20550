from __future__ import annotations

import math


def power(n: float, exponent: float) -> float:
    """n ** exponent, snapped to the nearest integer when within rounding of it.

    64 ** (2/3) evaluates to 15.999999999999998 in floating point, which would
    otherwise move every floor and ceiling built on it.
    """
    x = float(n) ** exponent
    r = round(x)
    return float(r) if abs(x - r) <= 1e-9 * max(1.0, abs(x)) else x


def floor_tol(x: float) -> int:
    r = round(x)
    return int(r) if abs(x - r) <= 1e-9 * max(1.0, abs(x)) else math.floor(x)


def ceil_tol(x: float) -> int:
    r = round(x)
    return int(r) if abs(x - r) <= 1e-9 * max(1.0, abs(x)) else math.ceil(x)
