"""Exact rational building blocks for the flat-spot family.

All quantities here are :class:`fractions.Fraction` values; nothing in this
module ever rounds.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

ExactRational = Fraction

__all__ = [
    "ExactRational",
    "RotationFraction",
    "BitString",
    "farey_enumerate",
    "upper_string",
    "t_of",
    "interval_I",
    "sum_frac_parts",
    "floor_sum",
    "frac",
    "fmt_rational",
    "parse_rational",
    "euler_phi",
    "CapacityError",
    "check_capacity",
    "max_q_capacity",
]


def frac(x: Fraction) -> Fraction:
    """Fractional part {x} = x - floor(x)."""
    return x - math.floor(x)


def fmt_rational(x: Fraction | int) -> str:
    """Serialize as ``num/den`` in lowest terms; integers as ``n``."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    """Inverse of :func:`fmt_rational`. Decimal strings are read exactly."""
    return Fraction(text.strip())


@dataclass(frozen=True, order=True)
class RotationFraction:
    """Reduced rotation number p/q with 1 <= p < q."""

    q: int
    p: int

    def __init__(self, p: int, q: int):
        if not (isinstance(p, int) and isinstance(q, int)):
            raise TypeError("p and q must be integers")
        if q < 2 or not 1 <= p < q:
            raise ValueError(f"need 1 <= p < q, q >= 2; got {p}/{q}")
        if math.gcd(p, q) != 1:
            raise ValueError(f"{p}/{q} is not reduced")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @classmethod
    def parse(cls, text: str) -> RotationFraction:
        p, _, q = text.partition("/")
        return cls(int(p), int(q))

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"

    def __repr__(self) -> str:
        return f"RotationFraction({self.p}, {self.q})"

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class BitString:
    """Binary word with 1-based indexing, ``s[1] ... s[q]``."""

    bits: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, i: int) -> int:
        if not 1 <= i <= len(self.bits):
            raise IndexError(f"bit index {i} outside 1..{len(self.bits)}")
        return self.bits[i - 1]

    def __iter__(self):
        return iter(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    def ones(self) -> int:
        return sum(self.bits)


def farey_enumerate(max_q: int) -> list[RotationFraction]:
    """All reduced p/q in (0, 1) with 2 <= q <= max_q, ordered by (q, p)."""
    if max_q < 2:
        raise ValueError("max_q must be >= 2")
    return [
        RotationFraction(p, q)
        for q in range(2, max_q + 1)
        for p in range(1, q)
        if math.gcd(p, q) == 1
    ]


def euler_phi(n: int) -> int:
    result, m, k = n, n, 2
    while k * k <= m:
        if m % k == 0:
            while m % k == 0:
                m //= k
            result -= result // k
        k += 1
    if m > 1:
        result -= result // m
    return result


@lru_cache(maxsize=4096)
def upper_string(r: RotationFraction) -> BitString:
    p, q = r.p, r.q
    return BitString(tuple((i + 1) * p // q - i * p // q for i in range(1, q + 1)))


@lru_cache(maxsize=4096)
def t_of(r: RotationFraction) -> Fraction:
    """The dyadic rational 0.s_1 s_2 ... s_q (binary)."""
    s = upper_string(r)
    num = 0
    for b in s:
        num = 2 * num + b
    return Fraction(num, 1 << r.q)


@lru_cache(maxsize=4096)
def interval_I(r: RotationFraction) -> tuple[Fraction, Fraction]:
    """Closed parameter interval [t-, t+] on which f_t locks to rotation p/q."""
    scale = (1 << r.q) - 1
    top = (1 << r.q) * t_of(r)
    return (top - 1) / scale, top / scale


def _check_dyadic(t: Fraction, q: int) -> Fraction:
    t = Fraction(t)
    if not 0 <= t < 1:
        raise ValueError(f"t={t} outside [0, 1)")
    if q < 0 or ((1 << q) % t.denominator) != 0:
        raise ValueError(f"t={t} is not a dyadic rational with {q} binary digits")
    return t


def sum_frac_parts(t: Fraction, q: int) -> Fraction:
    """Sum of {2^i t} for i = 0..q-1 via the digit-count closed form.

    For t = 0.d_1...d_q in binary the sum equals (d_1 + ... + d_q) - t.
    """
    t = _check_dyadic(t, q)
    digits = (t * (1 << q)).numerator
    return digits.bit_count() - t


def floor_sum(t: Fraction, q: int) -> Fraction:
    """Companion identity: sum of floor(2^i t), i < q, equals 2^q t - (d_1 + ... + d_q)."""
    t = _check_dyadic(t, q)
    digits = (t * (1 << q)).numerator
    return (1 << q) * t - digits.bit_count()


DEFAULT_MAX_Q = 64


class CapacityError(ValueError):
    """Requested denominator exceeds the configured arithmetic capacity."""


def max_q_capacity() -> int:
    """Largest denominator accepted; override with FLATSPOT_MAX_Q."""
    raw = os.environ.get("FLATSPOT_MAX_Q")
    return int(raw) if raw else DEFAULT_MAX_Q


def check_capacity(max_q: int) -> None:
    cap = max_q_capacity()
    if max_q > cap:
        raise CapacityError(f"max_q={max_q} exceeds capacity {cap} (FLATSPOT_MAX_Q)")
