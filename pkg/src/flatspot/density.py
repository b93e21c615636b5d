"""Exact limit density of S_n/n as a sum of box components.

Each rotation number p/q contributes a box of height q/(2^q - 1) on an
interval J_{p/q} of width 1/q.  Partial sums over q <= N are exact step
functions with rational breakpoints.
"""
from __future__ import annotations

import csv
import io
import json
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import accumulate, combinations

from .exact_core import (
    RotationFraction,
    check_capacity,
    euler_phi,
    farey_enumerate,
    fmt_rational,
    t_of,
)

DEFAULT_N = 50
CSV_HEADER = ("x_left", "x_right", "value_exact", "value_float")

__all__ = [
    "DEFAULT_N",
    "DensityComponent",
    "StepFunction",
    "component",
    "assemble",
    "evaluate",
    "error_bound",
    "overlap_pairs",
    "overlap_pairs_bruteforce",
    "total_mass",
    "mean",
    "tail_sum_k_over_2k",
    "tail_bounds",
    "step_rows",
    "to_csv",
    "to_json",
]


@dataclass(frozen=True)
class DensityComponent:
    r: RotationFraction
    support: tuple[Fraction, Fraction]
    height: Fraction

    @property
    def mass(self) -> Fraction:
        return self.height * (self.support[1] - self.support[0])

    def contains(self, x: Fraction) -> bool:
        return self.support[0] <= x <= self.support[1]


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous step function.

    ``values[i]`` holds on ``[breakpoints[i], breakpoints[i+1])``; the
    function is 0 left of the first and from the last breakpoint on.
    """

    breakpoints: tuple[Fraction, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        b, v = self.breakpoints, self.values
        if len(b) != len(v) + 1 and not (len(b) == 0 and len(v) == 0):
            raise ValueError("need len(values) == len(breakpoints) - 1")
        if any(x >= y for x, y in zip(b, b[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    def __call__(self, x) -> Fraction:
        return evaluate(self, x)

    @property
    def gaps(self):
        return zip(self.breakpoints, self.breakpoints[1:], self.values)

    @property
    def cumulative(self) -> tuple[Fraction, ...]:
        """Integral from -inf up to each breakpoint."""
        return tuple(
            accumulate(
                (v * (b - a) for a, b, v in self.gaps), initial=Fraction(0)
            )
        ) if self.values else ()

    def integral(self) -> Fraction:
        return sum((v * (b - a) for a, b, v in self.gaps), Fraction(0))

    def cdf(self, x) -> Fraction:
        b = self.breakpoints
        if not b or x <= b[0]:
            return Fraction(0)
        cum = self._cum
        i = bisect_right(b, x) - 1
        if i >= len(self.values):
            return cum[-1]
        return cum[i] + self.values[i] * (Fraction(x) - b[i])

    @property
    def _cum(self):
        cached = self.__dict__.get("_cum_cache")
        if cached is None:
            cached = self.cumulative
            object.__setattr__(self, "_cum_cache", cached)
        return cached


@lru_cache(maxsize=None)
def component(r: RotationFraction) -> DensityComponent:
    q, p, t = r.q, r.p, t_of(r)
    half = Fraction(1, 2)
    lo = (p - t) / q - half
    hi = (p - t + 1) / q - half
    return DensityComponent(r, (lo, hi), Fraction(q, (1 << q) - 1))


def _sweep(components) -> StepFunction:
    deltas: dict[Fraction, Fraction] = {}
    for c in components:
        lo, hi = c.support
        deltas[lo] = deltas.get(lo, 0) + c.height
        deltas[hi] = deltas.get(hi, 0) - c.height
    xs = sorted(x for x, d in deltas.items() if d != 0)
    values = []
    level = Fraction(0)
    for x in xs[:-1]:
        level += deltas[x]
        values.append(level)
    return StepFunction(tuple(xs), tuple(values))


def assemble(N: int) -> StepFunction:
    """nu_N = sum of all components with q <= N, as an exact step function."""
    if N < 2:
        raise ValueError("N must be >= 2")
    check_capacity(N)
    return _assemble(N)


@lru_cache(maxsize=64)
def _assemble(N: int) -> StepFunction:
    return _sweep(component(r) for r in farey_enumerate(N))


def evaluate(f: StepFunction, x) -> Fraction:
    i = bisect_right(f.breakpoints, x) - 1
    if i < 0 or i >= len(f.values):
        return Fraction(0)
    return f.values[i]


def error_bound(N: int) -> Fraction:
    """Sup-norm bound 4(N+2)/(2^{N+1}-1) on nu - nu_N."""
    if N < 2:
        raise ValueError("N must be >= 2")
    return Fraction(4 * (N + 2), (1 << (N + 1)) - 1)


def overlap_pairs(q: int) -> list[tuple[int, int]]:
    """Pairs p1 < p2 (coprime to q) whose J intervals intersect."""
    if q < 3:
        raise ValueError("q must be >= 3")
    comps = [component(r) for r in farey_enumerate(q) if r.q == q]
    comps.sort(key=lambda c: c.support[0])
    pairs = []
    for i, a in enumerate(comps):
        for b in comps[i + 1:]:
            if b.support[0] > a.support[1]:
                break
            pairs.append(tuple(sorted((a.r.p, b.r.p))))
    return sorted(pairs)


def overlap_pairs_bruteforce(q: int) -> list[tuple[int, int]]:
    comps = [component(r) for r in farey_enumerate(q) if r.q == q]
    out = []
    for a, b in combinations(comps, 2):
        if max(a.support[0], b.support[0]) <= min(a.support[1], b.support[1]):
            out.append((a.r.p, b.r.p))
    return sorted(out)


def total_mass(N: int) -> Fraction:
    """Measure of the union of I_{p/q} over q <= N."""
    return sum(
        (Fraction(euler_phi(q), (1 << q) - 1) for q in range(2, N + 1)), Fraction(0)
    )


def mean(f: StepFunction) -> Fraction:
    return sum(
        (v * (b * b - a * a) / 2 for a, b, v in f.gaps), Fraction(0)
    )


def tail_sum_k_over_2k(m: int) -> Fraction:
    """sum_{k >= m} k / 2^k = (m + 1) / 2^{m-1}."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return Fraction(m + 1, 1 << (m - 1))


def tail_bounds(q: int) -> tuple[Fraction, Fraction]:
    """Bracket for nu(-1/2 + 1/q).

    lower = sum_{k=q}^{2q-1} k/(2^k - 1) collects the boxes J_{1/k} through
    the point; upper adds at most two boxes per denominator k >= 2q, bounded
    by 2 * 2^{2q}/(2^{2q}-1) * sum_{k>=2q} k/2^k.
    """
    if q < 4:
        raise ValueError("q must be >= 4")
    lower = sum((Fraction(k, (1 << k) - 1) for k in range(q, 2 * q)), Fraction(0))
    big = 1 << (2 * q)
    upper = lower + 2 * Fraction(big, big - 1) * tail_sum_k_over_2k(2 * q)
    return lower, upper


def step_rows(f: StepFunction) -> list[dict]:
    return [
        {
            "x_left": fmt_rational(a),
            "x_right": fmt_rational(b),
            "value_exact": fmt_rational(v),
            "value_float": format(float(v), ".17g"),
        }
        for a, b, v in f.gaps
    ]


def to_csv(f: StepFunction) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_HEADER, lineterminator="\n")
    w.writeheader()
    w.writerows(step_rows(f))
    return buf.getvalue()


def to_json(f: StepFunction) -> str:
    return json.dumps(step_rows(f), indent=1) + "\n"
