"""The truncated doubling map f_t and its orbits.

Two numeric backends share one membership convention:

* ``Fraction`` inputs are iterated exactly (internally on a common integer
  denominator, which doubling mod 1 never enlarges);
* ``float`` inputs are iterated in binary floating point.  Doubling and
  ``2x - 1`` are exact for floats in [0, 1), so a float orbit is bit-faithful.

The flat spot is [0, t/2] U [(1+t)/2, 1).  Membership is tested on ``y = 2x``
as ``y <= t`` or ``y - 1 >= t`` so that no rounding enters the float path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .exact_core import RotationFraction, farey_enumerate, frac, interval_I

Number = Union[Fraction, float, int]

__all__ = [
    "OrbitSummary",
    "step",
    "in_flat_spot",
    "orbit",
    "deviation_sum",
    "entry_time",
    "orbit_summary",
    "stable_orbit",
    "limit_deviation",
    "locate",
]


def _check_param(t: Number) -> None:
    if not 0 <= t < 1:
        raise ValueError(f"map parameter t={t} outside [0, 1)")


def _check_point(x: Number) -> None:
    if not 0 <= x < 1:
        raise ValueError(f"point x={x} outside [0, 1)")


def in_flat_spot(t: Number, x: Number) -> bool:
    y = 2 * x
    return y <= t or y - 1 >= t


def step(t: Number, x: Number) -> Number:
    """One application of f_t."""
    _check_param(t)
    _check_point(x)
    y = 2 * x
    if y <= t:
        return t
    if y >= 1:
        y -= 1
        return t if y >= t else y
    return y


def orbit(t: Number, x0: Number, n: int) -> list[Number]:
    """The first ``n`` points x0, f_t(x0), ..., f_t^{n-1}(x0)."""
    _check_param(t)
    _check_point(x0)
    out = []
    x = x0
    for _ in range(n):
        out.append(x)
        x = step(t, x)
    return out


def _is_exact(*xs: Number) -> bool:
    return all(isinstance(x, (Fraction, int)) and not isinstance(x, bool) for x in xs)


def _scaled(t: Fraction, x0: Fraction) -> tuple[int, int, int]:
    t, x0 = Fraction(t), Fraction(x0)
    d = math.lcm(t.denominator, x0.denominator)
    return d, t.numerator * (d // t.denominator), x0.numerator * (d // x0.denominator)


def _scaled_sum(t: Fraction, x0: Fraction, n: int) -> Fraction:
    d, tt, x = _scaled(t, x0)
    s = 0
    for _ in range(n):
        s += x
        y = 2 * x
        if y <= tt or y >= d + tt:
            x = tt
        elif y >= d:
            x = y - d
        else:
            x = y
    return Fraction(s, d) - Fraction(n, 2)


def deviation_sum(t: Number, x0: Number, n: int) -> Number:
    """S_n(t, x0) = sum_{i<n} (f_t^i(x0) - 1/2).

    Exact for rational inputs.  For floats the result is the correctly
    rounded value of the exact sum of the (exact) float orbit.
    """
    _check_param(t)
    _check_point(x0)
    if n < 1:
        raise ValueError("n must be >= 1")
    if _is_exact(t, x0):
        return _scaled_sum(t, x0, n)
    pts = orbit(float(t), float(x0), n)
    pts.append(-0.5 * n)
    return math.fsum(pts)


def entry_time(t: Number, x0: Number, cap: int) -> int | None:
    """Smallest i <= cap with f_t^i(x0) in the flat spot, or None if not reached.

    ``None`` is the normal answer for points on the repelling orbit.
    """
    _check_param(t)
    _check_point(x0)
    if _is_exact(t, x0):
        d, tt, x = _scaled(t, x0)
        for i in range(cap + 1):
            y = 2 * x
            if y <= tt or y >= d + tt:
                return i
            x = y - d if y >= d else y
        return None
    x = x0
    for i in range(cap + 1):
        if in_flat_spot(t, x):
            return i
        x = step(t, x)
    return None


@dataclass(frozen=True)
class OrbitSummary:
    entry_time: int | None
    period: int | None
    partial_sum: Number
    n: int


def orbit_summary(t: Number, x0: Number, n: int, cap: int = 10**6) -> OrbitSummary:
    """Entry time, return period of t, and S_n for one orbit."""
    ell = entry_time(t, x0, cap)
    period = None
    if ell is not None:
        y = t
        for j in range(1, cap + 2):
            y = step(t, y)
            if y == t:
                period = j
                break
    return OrbitSummary(ell, period, deviation_sum(t, x0, n), n)


def _interior(r: RotationFraction, t: Fraction) -> bool:
    lo, hi = interval_I(r)
    return lo < t < hi


def stable_orbit(r: RotationFraction, t: Fraction) -> list[Fraction]:
    """(t, {2t}, ..., {2^{q-1} t}) for t strictly inside I_{p/q}."""
    t = Fraction(t)
    if not _interior(r, t):
        raise ValueError(f"t={t} not in the interior of I_{r}")
    return [frac(t * (1 << i)) for i in range(r.q)]


def limit_deviation(r: RotationFraction, t: Fraction) -> Fraction:
    """lim S_n/n = (1/q) sum_{i<q} ({2^i t} - 1/2) for t in the closed I_{p/q}.

    At the jump t = t_{p/q} the plain fractional part gives {2^{q-1} t} = 0,
    i.e. the right-hand limit; the left-hand limit is larger by 1/q.
    """
    t = Fraction(t)
    lo, hi = interval_I(r)
    if not lo <= t <= hi:
        raise ValueError(f"t={t} not in I_{r} = [{lo}, {hi}]")
    q = r.q
    total = sum(frac(t * (1 << i)) for i in range(q))
    return (total - Fraction(q, 2)) / q


def locate(t: Fraction, max_q: int) -> RotationFraction | None:
    """The p/q with q <= max_q whose interval contains t, or None."""
    t = Fraction(t)
    for r in farey_enumerate(max_q):
        lo, hi = interval_I(r)
        if lo <= t <= hi:
            return r
    return None
