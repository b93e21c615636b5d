"""Named invariant suites.  Each returns a list of violation messages (empty = pass)."""
from __future__ import annotations

import math
import random
from fractions import Fraction
from itertools import combinations

from .density import (
    assemble,
    component,
    error_bound,
    evaluate,
    mean,
    overlap_pairs,
    overlap_pairs_bruteforce,
    tail_bounds,
    total_mass,
)
from .dynamics import deviation_sum, entry_time, limit_deviation
from .exact_core import (
    RotationFraction,
    farey_enumerate,
    floor_sum,
    frac,
    interval_I,
    sum_frac_parts,
    t_of,
    upper_string,
)

# (p/q, t_{p/q}, I_{p/q}, J_{p/q}) for q <= 5, reference values
REFERENCE_TABLE = [
    ("1/2", "1/2", ("1/3", "2/3"), ("-1/4", "1/4")),
    ("1/3", "1/4", ("1/7", "2/7"), ("-1/4", "1/12")),
    ("2/3", "3/4", ("5/7", "6/7"), ("-1/12", "1/4")),
    ("1/4", "1/8", ("1/15", "2/15"), ("-9/32", "-1/32")),
    ("3/4", "7/8", ("13/15", "14/15"), ("1/32", "9/32")),
    ("1/5", "1/16", ("1/31", "2/31"), ("-25/80", "-9/80")),
    ("2/5", "5/16", ("9/31", "10/31"), ("-13/80", "3/80")),
    ("3/5", "11/16", ("21/31", "22/31"), ("-3/80", "13/80")),
    ("4/5", "15/16", ("29/31", "30/31"), ("9/80", "25/80")),
]


def check_table() -> list[str]:
    errs = []
    rows = farey_enumerate(5)
    if len(rows) != len(REFERENCE_TABLE):
        errs.append(f"expected {len(REFERENCE_TABLE)} fractions, got {len(rows)}")
    for r, (pq, t, I, J) in zip(rows, REFERENCE_TABLE):
        F = Fraction
        if str(r) != pq:
            errs.append(f"row order: {r} != {pq}")
        if t_of(r) != F(t):
            errs.append(f"{r}: t {t_of(r)} != {t}")
        if interval_I(r) != (F(I[0]), F(I[1])):
            errs.append(f"{r}: I {interval_I(r)} != {I}")
        if component(r).support != (F(J[0]), F(J[1])):
            errs.append(f"{r}: J {component(r).support} != {J}")
    return errs


def check_strings(max_q: int = 30) -> list[str]:
    errs = []
    for r in farey_enumerate(max_q):
        s = upper_string(r)
        if len(s) != r.q or s.ones() != r.p or s[r.q] != 0:
            errs.append(f"{r}: bad string {s}")
    return errs


def check_partition(max_q: int = 30) -> list[str]:
    errs = []
    ivs = []
    for r in farey_enumerate(max_q):
        lo, hi = interval_I(r)
        if hi - lo != Fraction(1, (1 << r.q) - 1):
            errs.append(f"{r}: width {hi - lo}")
        if not 0 < lo < t_of(r) <= hi < 1:
            errs.append(f"{r}: t_pq {t_of(r)} not inside ({lo}, {hi}]")
        ivs.append((lo, hi, r))
    ivs.sort()
    for (a0, a1, ra), (b0, b1, rb) in zip(ivs, ivs[1:]):
        if b0 < a1:
            errs.append(f"interiors of I_{ra} and I_{rb} overlap")
    return errs


def check_mirror(max_q: int = 30) -> list[str]:
    return [
        f"t_{{{r.q - r.p}/{r.q}}} != 1 - t_{{{r}}}"
        for r in farey_enumerate(max_q)
        if t_of(RotationFraction(r.q - r.p, r.q)) != 1 - t_of(r)
    ]


def random_dyadic(rng: random.Random, max_q: int = 60) -> tuple[Fraction, int]:
    q = rng.randint(1, max_q)
    return Fraction(rng.randrange(1 << q), 1 << q), q


def check_frac_sums(samples: int = 1000, max_q: int = 60, seed: int = 2024) -> list[str]:
    rng = random.Random(seed)
    errs = []
    for _ in range(samples):
        t, q = random_dyadic(rng, max_q)
        direct = sum(frac(t * (1 << i)) for i in range(q))
        floors = sum(math.floor(t * (1 << i)) for i in range(q))
        if sum_frac_parts(t, q) != direct:
            errs.append(f"frac sum mismatch at t={t}, q={q}")
        if floor_sum(t, q) != floors:
            errs.append(f"floor sum mismatch at t={t}, q={q}")
    return errs


def check_endpoints(max_q: int = 20) -> list[str]:
    errs = []
    for r in farey_enumerate(max_q):
        lo, hi = interval_I(r)
        if limit_deviation(r, lo) != limit_deviation(r, hi):
            errs.append(f"{r}: endpoint limits differ")
    return errs


def check_overlap(max_q: int = 25) -> list[str]:
    errs = []
    for q in range(3, max_q + 1):
        coprime = [p for p in range(1, q) if math.gcd(p, q) == 1]
        consecutive = [(a, b) for a, b in combinations(coprime, 2) if b == a + 1]
        brute = overlap_pairs_bruteforce(q)
        if brute != consecutive:
            errs.append(f"q={q}: intersecting pairs {brute} != consecutive {consecutive}")
        if overlap_pairs(q) != brute:
            errs.append(f"q={q}: overlap_pairs disagrees with brute force")
    return errs


def check_mass(max_q: int = 25) -> list[str]:
    errs = []
    for r in farey_enumerate(max_q):
        c = component(r)
        if c.mass != Fraction(1, (1 << r.q) - 1):
            errs.append(f"{r}: mass {c.mass}")
        if c.support[1] - c.support[0] != Fraction(1, r.q):
            errs.append(f"{r}: |J| != 1/q")
        if not (-Fraction(1, 2) <= c.support[0] and c.support[1] <= Fraction(1, 2)):
            errs.append(f"{r}: J outside [-1/2, 1/2]")
    prev = Fraction(0)
    for N in range(2, 65):
        m = total_mass(N)
        if not prev < m < 1:
            errs.append(f"total_mass({N}) = {m} not increasing below 1")
        prev = m
    return errs


def check_error_bound() -> list[str]:
    errs = []
    if not error_bound(50) < Fraction(1, 10**13):
        errs.append(f"error_bound(50) = {float(error_bound(50))} >= 1e-13")
    if not 1 - total_mass(50) <= error_bound(50):
        errs.append("1 - total_mass(50) exceeds error_bound(50)")
    return errs


def _probe_points(fs) -> list[Fraction]:
    pts = set()
    for f in fs:
        pts.update(f.breakpoints)
        pts.update((a + b) / 2 for a, b, _ in f.gaps)
    return sorted(pts)


def check_refinement(max_N: int = 20) -> list[str]:
    errs = []
    for N in range(2, max_N):
        f, g = assemble(N), assemble(N + 1)
        for x in _probe_points([f, g]):
            if evaluate(g, x) < evaluate(f, x):
                errs.append(f"nu_{N + 1}({x}) < nu_{N}({x})")
                break
    return errs


def check_symmetry(max_N: int = 20) -> list[str]:
    errs = []
    for N in range(2, max_N + 1):
        f = assemble(N)
        for a, b, v in f.gaps:
            mid = (a + b) / 2
            if evaluate(f, -mid) != v:
                errs.append(f"nu_{N} not symmetric at {mid}")
                break
        if mean(f) != 0:
            errs.append(f"mean(nu_{N}) = {mean(f)}")
    for q in range(2, max_N + 1):
        boxes = [component(r) for r in farey_enumerate(q) if r.q == q]
        depth = 0
        events = sorted(
            [(c.support[0], 0, 1) for c in boxes] + [(c.support[1], 1, -1) for c in boxes]
        )
        # closed boxes: at a shared endpoint count the opening before the closing
        for _, _, d in events:
            depth += d
            if depth > 2:
                errs.append(f"more than two boxes with denominator {q} cover a point")
                break
    return errs


def check_supnorm(N_range=range(5, 16), extra: int = 5) -> list[str]:
    errs = []
    for N in N_range:
        f, g = assemble(N), assemble(N + extra)
        gap = max(evaluate(g, x) - evaluate(f, x) for x in _probe_points([f, g]))
        if gap > error_bound(N):
            errs.append(f"nu_{N + extra} - nu_{N} = {float(gap)} > bound {float(error_bound(N))}")
    return errs


def check_piecewise(max_q: int = 12, points: int = 10) -> list[str]:
    errs = []
    for r in farey_enumerate(max_q):
        lo, hi = interval_I(r)
        tpq = t_of(r)
        slope = Fraction((1 << r.q) - 1, r.q)
        left0, right0 = limit_deviation(r, lo), limit_deviation(r, tpq)
        for k in range(points):
            t = lo + (tpq - lo) * Fraction(k, points)
            if limit_deviation(r, t) != left0 + slope * (t - lo):
                errs.append(f"{r}: left piece not affine at {t}")
            t = tpq + (hi - tpq) * Fraction(k + 1, points)
            if limit_deviation(r, t) != right0 + slope * (t - tpq):
                errs.append(f"{r}: right piece not affine at {t}")
        jump = right0 - (left0 + slope * (tpq - lo))
        if jump != Fraction(-1, r.q):
            errs.append(f"{r}: jump {jump} != -1/{r.q}")
    return errs


def random_interior_t(rng: random.Random, r: RotationFraction, m: int = 1009) -> Fraction:
    lo, hi = interval_I(r)
    return lo + (hi - lo) * Fraction(rng.randint(1, m - 1), m)


def check_convergence(
    max_q: int = 8, per_interval: int = 20, ns=(1000, 10_000), seed: int = 7
) -> list[str]:
    """|S_n/n - limit| <= (l + 2q)/n with exact orbits, l the entry time."""
    rng = random.Random(seed)
    errs = []
    for r in farey_enumerate(max_q):
        for _ in range(per_interval):
            t = random_interior_t(rng, r)
            while True:
                x0 = Fraction(rng.randrange(10**6), 10**6)
                ell = entry_time(t, x0, 10 * (1 << r.q))
                if ell is not None:
                    break
            L = limit_deviation(r, t)
            for n in ns:
                dev = abs(deviation_sum(t, x0, n) / n - L)
                if dev > Fraction(ell + 2 * r.q, n):
                    errs.append(f"{r}, t={t}, x0={x0}, n={n}: deviation {float(dev)}")
    return errs


def check_tail(q_range=range(8, 17), N: int = 50) -> list[str]:
    nu = assemble(N)
    errs = []
    for q in q_range:
        lo, hi = tail_bounds(q)
        v = evaluate(nu, Fraction(-1, 2) + Fraction(1, q))
        if not lo <= v <= hi:
            errs.append(f"q={q}: nu_{N} = {float(v)} outside [{float(lo)}, {float(hi)}]")
    return errs


SUITES = {
    "table": check_table,
    "strings": check_strings,
    "partition": check_partition,
    "mirror": check_mirror,
    "frac-sums": check_frac_sums,
    "endpoints": check_endpoints,
    "overlap": check_overlap,
    "mass": check_mass,
    "error-bound": check_error_bound,
    "refinement": check_refinement,
    "symmetry": check_symmetry,
    "supnorm": check_supnorm,
    "piecewise": check_piecewise,
    "convergence": check_convergence,
    "tail": check_tail,
}
