"""Monte Carlo sampling of S_n/n over uniform (t, x0) and comparison with nu_N.

Every (t, x0) is drawn on the dyadic grid 2^-53 Z, which is exactly the set
of values a uniform double in [0, 1) takes.  Doubling mod 1 keeps the grid,
so orbits are carried as 53-bit integers and S_n is summed exactly; the
only rounding is the final division by n.

Randomness is counter based (Philox).  Sample ``i`` owns counter block ``i``
under key ``seed``, so output never depends on chunking or worker count.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numpy.random import Philox

from .density import StepFunction

GRID_BITS = 53
ONE = 1 << GRID_BITS
CHUNK = 1 << 15
DEFAULT_CAP = 10**6

__all__ = [
    "ONE",
    "GRID_BITS",
    "SimulationConfig",
    "DeviationSample",
    "Histogram",
    "sample_one",
    "grid_deviation",
    "grid_deviation_direct",
    "draw_grid",
    "run",
    "compare",
    "exact_bin_masses",
    "sample_step_function",
    "histogram_of_values",
    "histogram_csv",
    "histogram_json",
    "run_values",
    "ComparisonReport",
    "uniform_edges",
]


@dataclass(frozen=True)
class SimulationConfig:
    samples: int
    iterations: int = 10_000
    cap: int = DEFAULT_CAP
    bins: int = 400
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1 or self.iterations < 1 or self.cap < 1:
            raise ValueError("samples, iterations and cap must be positive")
        if self.bins < 2:
            raise ValueError("need at least 2 bins")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class DeviationSample:
    value: float
    t: float
    x0: float
    n: int
    entry_time: int | None = None
    period: int | None = None


@dataclass
class Histogram:
    edges: list[Fraction]
    counts: np.ndarray
    underflow: int = 0
    overflow: int = 0
    # exact sum of S_n over all samples, in units of 2^-53
    centered_sum: int = 0
    n: int = 0

    @property
    def bins(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow

    def mean(self) -> float:
        """Sample mean of S_n/n, rounded once from the exact total."""
        return self.centered_sum / (2 * ONE * self.n * self.total)

    def __add__(self, other: Histogram) -> Histogram:
        if self.edges != other.edges:
            raise ValueError("histograms with different bins")
        return Histogram(
            self.edges,
            self.counts + other.counts,
            self.underflow + other.underflow,
            self.overflow + other.overflow,
            self.centered_sum + other.centered_sum,
            self.n or other.n,
        )


def uniform_edges(bins: int) -> list[Fraction]:
    return [Fraction(i, bins) - Fraction(1, 2) for i in range(bins + 1)]


def _in_flat(T: int, X: int) -> bool:
    Y = 2 * X
    return Y <= T or Y >= ONE + T


def _advance(T: int, X: int) -> int:
    Y = 2 * X
    if Y <= T or Y >= ONE + T:
        return T
    return Y - ONE if Y >= ONE else Y


def _to_value(S: int, n: int) -> float:
    # S is the sum of orbit points in units of 2^-53
    return (2 * S - n * ONE) / (2 * ONE * n)


def grid_deviation_direct(kt: int, kx: int, n: int) -> int:
    """Sum of the first n orbit points (grid units) by plain iteration."""
    S, X = 0, kx
    for _ in range(n):
        S += X
        X = _advance(kt, X)
    return S


def grid_deviation(kt: int, kx: int, n: int, cap: int = DEFAULT_CAP):
    """Sum of the first n orbit points (grid units) using the periodic shortcut.

    Returns ``(S, entry_time, period)``.  Iterates until the orbit enters the
    flat spot (next point is t), measures the return time q of t, then adds
    whole periods in closed form.  Falls back to plain iteration past ``cap``.
    """
    S, X, i = 0, kx, 0
    ell = None
    while i < n:
        S += X
        i += 1
        if _in_flat(kt, X):
            ell = i - 1
            X = kt
            break
        X = _advance(kt, X)
        if i > cap:
            return S + grid_deviation_direct(kt, X, n - i), None, None
    if ell is None or i == n:
        return S, ell, None
    prefix = [0]
    Y = kt
    for _ in range(cap):
        prefix.append(prefix[-1] + Y)
        if _in_flat(kt, Y):
            break
        Y = _advance(kt, Y)
    else:
        return S + grid_deviation_direct(kt, kt, n - i), ell, None
    q = len(prefix) - 1
    k, j = divmod(n - i, q)
    return S + k * prefix[q] + prefix[j], ell, q


def sample_one(rng: np.random.Generator, n: int, cap: int = DEFAULT_CAP) -> DeviationSample:
    """Draw (t, x0) uniformly on the 2^-53 grid and return S_n/n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    kt = int(rng.integers(0, ONE))
    kx = int(rng.integers(0, ONE))
    S, ell, q = grid_deviation(kt, kx, n, cap)
    return DeviationSample(_to_value(S, n), kt / ONE, kx / ONE, n, ell, q)


def draw_grid(seed: int, start: int, size: int) -> np.ndarray:
    """Raw 64-bit words for samples start..start+size-1, shape (size, 4)."""
    bg = Philox(key=seed)
    bg.advance(start)
    return bg.random_raw(4 * size).reshape(size, 4)


def _chunk_sums(kt: np.ndarray, kx: np.ndarray, n: int, cap: int) -> list[int]:
    """Exact S (grid units) for a batch of samples, vectorised over the batch."""
    size = len(kt)
    S = np.zeros(size, dtype=np.int64)
    X = kx.copy()
    consumed = np.zeros(size, dtype=np.int64)
    entered = np.zeros(size, dtype=bool)
    active = np.ones(size, dtype=bool)
    steps = 0
    while active.any() and steps < min(n, cap + 1):
        S[active] += X[active]
        consumed[active] += 1
        Y = 2 * X
        flat = (Y <= kt) | (Y >= ONE + kt)
        hit = active & flat
        entered |= hit
        X = np.where(flat, kt, np.where(Y >= ONE, Y - ONE, Y))
        active &= ~flat
        steps += 1

    need = entered & (consumed < n)
    period = np.zeros(size, dtype=np.int64)
    prefix = [np.zeros(size, dtype=np.int64)]
    Y = kt.copy()
    open_ = need.copy()
    for _ in range(cap):
        if not open_.any():
            break
        prefix.append(prefix[-1] + np.where(open_, Y, 0))
        flat = _np_flat(kt, Y)
        period[open_ & flat] = len(prefix) - 1
        open_ &= ~flat
        Y = np.where(flat, kt, _np_double(Y))

    out = []
    P = np.stack(prefix) if len(prefix) > 1 else None
    for i in range(size):
        s = int(S[i])
        if consumed[i] >= n:
            out.append(s)
        elif need[i] and period[i] > 0:
            q = int(period[i])
            k, j = divmod(n - int(consumed[i]), q)
            out.append(s + k * int(P[q, i]) + int(P[j, i]))
        else:
            s0 = int(X[i]) if not entered[i] else int(kt[i])
            out.append(s + grid_deviation_direct(int(kt[i]), s0, n - int(consumed[i])))
    return out


def _np_flat(kt, Y):
    Z = 2 * Y
    return (Z <= kt) | (Z >= ONE + kt)


def _np_double(Y):
    Z = 2 * Y
    return np.where(Z >= ONE, Z - ONE, Z)


def _run_chunk(args) -> Histogram:
    seed, start, size, n, cap, bins = args
    raw = draw_grid(seed, start, size)
    kt = (raw[:, 0] >> np.uint64(64 - GRID_BITS)).astype(np.int64)
    kx = (raw[:, 1] >> np.uint64(64 - GRID_BITS)).astype(np.int64)
    sums = _chunk_sums(kt, kx, n, cap)
    counts = np.zeros(bins, dtype=np.int64)
    under = over = 0
    denom = ONE * n
    for s in sums:
        # bin index floor((S/(n 2^53)) * bins), exact
        b = (s * bins) // denom
        if b < 0:
            under += 1
        elif b >= bins:
            over += 1
        else:
            counts[b] += 1
    centered = sum(2 * s - denom for s in sums)
    return Histogram(uniform_edges(bins), counts, under, over, centered, n)


def run_values(seed: int, start: int, size: int, n: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """S_n/n for samples start..start+size-1 of stream ``seed``."""
    raw = draw_grid(seed, start, size)
    kt = (raw[:, 0] >> np.uint64(64 - GRID_BITS)).astype(np.int64)
    kx = (raw[:, 1] >> np.uint64(64 - GRID_BITS)).astype(np.int64)
    return np.array([_to_value(s, n) for s in _chunk_sums(kt, kx, n, cap)])


def run(config: SimulationConfig, workers: int | None = None) -> Histogram:
    """Histogram of S_n/n over ``config.samples`` draws; independent of ``workers``."""
    jobs = [
        (config.seed, start, min(CHUNK, config.samples - start),
         config.iterations, config.cap, config.bins)
        for start in range(0, config.samples, CHUNK)
    ]
    workers = workers or os.cpu_count() or 1
    if workers == 1 or len(jobs) == 1:
        parts = [_run_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_chunk, jobs))
    total = parts[0]
    for h in parts[1:]:
        total = total + h
    return total


def exact_bin_masses(nu: StepFunction, edges: list[Fraction]) -> list[Fraction]:
    cdf = [nu.cdf(e) for e in edges]
    return [b - a for a, b in zip(cdf, cdf[1:])]


def compare(h: Histogram, nu: StepFunction) -> tuple[float, float]:
    """(L1, KS) between the empirical histogram and the exact bin masses of nu."""
    M = h.total
    masses = exact_bin_masses(nu, h.edges)
    l1 = math.fsum(abs(Fraction(int(c), M) - m) for c, m in zip(h.counts, masses))
    emp = Fraction(h.underflow, M)
    exact = Fraction(0)
    ks = abs(emp - exact)
    for c, m in zip(h.counts, masses):
        emp += Fraction(int(c), M)
        exact += m
        ks = max(ks, abs(emp - exact))
    return float(l1), float(ks)


def sample_step_function(nu: StepFunction, seed: int, size: int, start: int = 0) -> np.ndarray:
    """Inverse-CDF draws from nu (normalised by its total mass).

    Uses word 2 of each sample's counter block, so these draws are independent
    of the (t, x0) words used by :func:`run` under the same seed.
    """
    b = np.array([float(x) for x in nu.breakpoints])
    v = np.array([float(x) for x in nu.values])
    cum = np.array([float(x) for x in nu.cumulative])
    raw = draw_grid(seed, start, size)[:, 2]
    u = (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53 * cum[-1]
    i = np.searchsorted(cum, u, side="right") - 1
    i = np.clip(i, 0, len(v) - 1)
    # zero-height plateaus have zero probability but guard the division
    step = np.where(v[i] > 0, (u - cum[i]) / np.where(v[i] > 0, v[i], 1.0), 0.0)
    return np.minimum(b[i] + step, b[i + 1])


def histogram_of_values(values: np.ndarray, bins: int) -> Histogram:
    idx = np.floor((values + 0.5) * bins).astype(np.int64)
    under = int((idx < 0).sum())
    over = int((idx >= bins).sum())
    ok = (idx >= 0) & (idx < bins)
    counts = np.bincount(idx[ok], minlength=bins).astype(np.int64)
    return Histogram(uniform_edges(bins), counts, under, over, 0, 0)


def histogram_rows(h: Histogram, nu: StepFunction | None = None) -> list[dict]:
    M = h.total
    width = 1.0 / h.bins
    masses = exact_bin_masses(nu, h.edges) if nu is not None else None
    rows = []
    for i, c in enumerate(h.counts):
        row = {
            "bin_left": format(float(h.edges[i]), ".17g"),
            "bin_right": format(float(h.edges[i + 1]), ".17g"),
            "count": int(c),
            "empirical_density": format(int(c) / M / width, ".17g"),
            "exact_density": (
                format(float(masses[i]) / width, ".17g") if masses is not None else ""
            ),
        }
        rows.append(row)
    return rows


def histogram_csv(h: Histogram, nu: StepFunction | None = None) -> str:
    buf = io.StringIO()
    fields = ["bin_left", "bin_right", "count", "empirical_density", "exact_density"]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(histogram_rows(h, nu))
    return buf.getvalue()


def histogram_json(h: Histogram, nu: StepFunction | None = None) -> str:
    return json.dumps(
        {"underflow": h.underflow, "overflow": h.overflow, "bins": histogram_rows(h, nu)},
        indent=1,
    ) + "\n"


@dataclass
class ComparisonReport:
    L1: float
    KS: float
    M: int
    n: int
    B: int
    seed: int
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = {"L1": self.L1, "KS": self.KS, "M": self.M, "n": self.n, "B": self.B, "seed": self.seed}
        d.update(self.extra)
        return json.dumps(d, indent=1) + "\n"
