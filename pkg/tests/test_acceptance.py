"""Acceptance criteria 1-10. Each test prints one PASS/FAIL line (see conftest)."""
import csv
import io
import math
import random
import time
from fractions import Fraction as F
from itertools import combinations

from flatspot.checks import REFERENCE_TABLE, random_interior_t
from flatspot.cli import main
from flatspot.density import (
    assemble,
    component,
    error_bound,
    evaluate,
    tail_bounds,
    total_mass,
)
from flatspot.dynamics import deviation_sum, entry_time, limit_deviation
from flatspot.exact_core import RotationFraction, farey_enumerate, interval_I, sum_frac_parts, t_of
from flatspot.montecarlo import (
    SimulationConfig,
    compare,
    histogram_of_values,
    run,
    sample_step_function,
)
from flatspot.qgaussian import QGaussianParams, fit, tail_ratio_series


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.s = time.perf_counter() - self.t0


def test_criterion_01_table(report, capsys):
    with Timer() as tm:
        main(["table", "--max-q", "5"])
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        bad = []
        if len(rows) != 9:
            bad.append(f"{len(rows)} rows")
        for row, (pq, t, I, J) in zip(rows, REFERENCE_TABLE):
            got = (row["p/q"], F(row["t"]), F(row["I_left"]), F(row["I_right"]),
                   F(row["J_left"]), F(row["J_right"]))
            want = (pq, F(t), F(I[0]), F(I[1]), F(J[0]), F(J[1]))
            if got != want:
                bad.append(pq)
    ok = not bad and tm.s < 1
    with capsys.disabled():
        report(1, "table reproduction", ok, f"mismatches={bad} runtime={tm.s:.3f}s")
    assert not bad
    assert tm.s < 1


def test_criterion_02_error_bound(report, capsys):
    with Timer() as tm:
        b = error_bound(50)
        deficit = 1 - total_mass(50)
        ok_bound = b < F(1, 10**13)
        ok_mass = 0 <= deficit <= b
    ok = ok_bound and ok_mass and tm.s < 1
    with capsys.disabled():
        report(2, "error bound", ok,
               f"bound={float(b):.4g} 1-mass={float(deficit):.4g} runtime={tm.s:.3f}s")
    assert ok_bound and ok_mass
    assert tm.s < 1


def test_criterion_03_overlap_rule(report, capsys):
    with Timer() as tm:
        bad = []
        for q in range(2, 26):
            ps = [p for p in range(1, q) if math.gcd(p, q) == 1]
            for p1, p2 in combinations(ps, 2):
                a0, a1 = component(RotationFraction(p1, q)).support
                b0, b1 = component(RotationFraction(p2, q)).support
                meet = max(a0, b0) <= min(a1, b1)
                if meet != (p2 == p1 + 1):
                    bad.append((q, p1, p2))
    ok = not bad and tm.s < 10
    with capsys.disabled():
        report(3, "overlap rule q<=25", ok, f"violations={len(bad)} runtime={tm.s:.2f}s")
    assert not bad
    assert tm.s < 10


def test_criterion_04_convergence_bound(report, capsys):
    rng = random.Random(7)
    with Timer() as tm:
        bad, checked = [], 0
        for r in farey_enumerate(8):
            for _ in range(20):
                t = random_interior_t(rng, r)
                while True:
                    x0 = F(rng.randrange(10**6), 10**6)
                    ell = entry_time(t, x0, 10 * 2**r.q)
                    if ell is not None:
                        break
                L = limit_deviation(r, t)
                for n in (1000, 10_000):
                    checked += 1
                    if abs(deviation_sum(t, x0, n) / n - L) > F(ell + 2 * r.q, n):
                        bad.append((str(r), t, x0, n))
    ok = not bad and tm.s < 60
    with capsys.disabled():
        report(4, "finite-n deviation bound q<=8", ok,
               f"checked={checked} violations={len(bad)} runtime={tm.s:.2f}s")
    assert not bad
    assert tm.s < 60


def test_criterion_05_fractional_parts(report, capsys):
    rng = random.Random(2024)
    with Timer() as tm:
        bad = 0
        for _ in range(1000):
            q = rng.randint(1, 60)
            t = F(rng.randrange(2**q), 2**q)
            brute = sum(((t * 2**i) - math.floor(t * 2**i) for i in range(q)), F(0))
            bad += sum_frac_parts(t, q) != brute
    ok = bad == 0 and tm.s < 5
    with capsys.disabled():
        report(5, "dyadic fractional-part sums", ok, f"mismatches={bad} runtime={tm.s:.2f}s")
    assert bad == 0
    assert tm.s < 5


def test_criterion_06_piecewise_affine(report, capsys):
    with Timer() as tm:
        bad = []
        for r in farey_enumerate(12):
            lo, hi = interval_I(r)
            tpq = t_of(r)
            slope = F(2**r.q - 1, r.q)
            left = [lo + (tpq - lo) * F(k, 10) for k in range(10)]
            right = [tpq + (hi - tpq) * F(k, 10) for k in range(10)]
            for pts in (left, right):
                base = limit_deviation(r, pts[0])
                for t in pts[1:]:
                    if limit_deviation(r, t) - base != slope * (t - pts[0]):
                        bad.append((str(r), t))
            # left limit at tpq extrapolated from the left piece
            jump = limit_deviation(r, tpq) - (limit_deviation(r, lo) + slope * (tpq - lo))
            if jump != F(-1, r.q):
                bad.append((str(r), "jump", jump))
    ok = not bad and tm.s < 30
    with capsys.disabled():
        report(6, "piecewise-affine limit q<=12", ok, f"violations={len(bad)} runtime={tm.s:.2f}s")
    assert not bad
    assert tm.s < 30


def test_criterion_07_tail_bracket(report, capsys):
    with Timer() as tm:
        nu = assemble(50)
        bad = []
        for q in range(8, 17):
            lo, hi = tail_bounds(q)
            v = evaluate(nu, F(-1, 2) + F(1, q))
            if not lo <= v <= hi:
                bad.append(q)
    ok = not bad and tm.s < 10
    with capsys.disabled():
        report(7, "tail bracket q=8..16", ok, f"outside={bad} runtime={tm.s:.2f}s")
    assert not bad
    assert tm.s < 10


def test_criterion_08_tail_divergence(report, capsys):
    with Timer() as tm:
        series = tail_ratio_series(QGaussianParams(0.7, 16.1, 0.0, 1.0), range(8, 21))
        ratios = [r for _, r in series]
        increasing = all(b > a for a, b in zip(ratios, ratios[1:]))
        factor = ratios[-1] / ratios[0]
    ok = increasing and factor > 1e3 and tm.s < 5
    with capsys.disabled():
        report(8, "tail ratio divergence q=8..20", ok,
               f"increasing={increasing} first={ratios[0]:.4g} last={ratios[-1]:.4g} "
               f"factor={factor:.4g} (need >1e3) runtime={tm.s:.2f}s")
    assert increasing
    assert factor > 1e3
    assert tm.s < 5


def test_criterion_09_monte_carlo(report, capsys):
    M, n, B, seed = 10**6, 10**4, 400, 12345
    with Timer() as tm:
        nu = assemble(40)
        h = run(SimulationConfig(M, n, bins=B, seed=seed))
        l1, ks = compare(h, nu)
        self_l1, self_ks = compare(histogram_of_values(sample_step_function(nu, seed, M), B), nu)
    ok = l1 < 0.02 and self_l1 < 0.005 and tm.s < 300
    with capsys.disabled():
        report(9, "Monte Carlo vs nu_40", ok,
               f"L1={l1:.5f} (<0.02) KS={ks:.5f} self-test L1={self_l1:.5f} (<0.005) "
               f"overflow={h.underflow + h.overflow} runtime={tm.s:.1f}s")
    assert l1 < 0.02
    assert self_l1 < 0.005
    assert tm.s < 300


def test_criterion_10_fit_bracket(report, capsys):
    with Timer() as tm:
        res = fit(assemble(50))
        Q, beta = res.params.Q, res.params.beta
    ok = 0.6 <= Q <= 0.8 and 12 <= beta <= 21 and tm.s < 60
    with capsys.disabled():
        report(10, "Q-Gaussian fit bracket", ok,
               f"Q={Q:.4g} (need [0.6,0.8]) beta={beta:.4g} (need [12,21]) C={res.params.C:.4g} "
               f"sse={res.discrepancy:.4g} runtime={tm.s:.2f}s")
    assert 0.6 <= Q <= 0.8
    assert 12 <= beta <= 21
    assert tm.s < 60
