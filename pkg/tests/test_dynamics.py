import random
from fractions import Fraction as F

import pytest

from flatspot.checks import check_endpoints, check_piecewise, check_convergence, random_interior_t
from flatspot.dynamics import (
    deviation_sum,
    entry_time,
    in_flat_spot,
    limit_deviation,
    locate,
    orbit,
    orbit_summary,
    stable_orbit,
    step,
)
from flatspot.exact_core import RotationFraction as R
from flatspot.exact_core import farey_enumerate, interval_I, t_of


def test_step_examples():
    assert step(F(1, 2), F(1, 2)) == 0
    assert step(F(1, 3), F(9, 10)) == F(1, 3)
    for t in (F(1, 3), F(2, 7), F(5, 9)):
        assert step(t, t / 2) == t
        # right flat-spot boundary is consistent with doubling there
        assert step(t, (1 + t) / 2) == t


def test_step_doubling_region():
    t = F(1, 3)
    assert step(t, F(1, 4)) == F(1, 2)
    assert step(t, F(3, 5)) == F(1, 5)


def test_step_domain():
    with pytest.raises(ValueError):
        step(F(1, 2), F(1))
    with pytest.raises(ValueError):
        step(F(1, 2), F(-1, 5))
    with pytest.raises(ValueError):
        step(F(1), F(1, 5))


def test_float_backend_matches_exact_on_dyadics():
    rng = random.Random(3)
    for _ in range(200):
        t = F(rng.randrange(2**40), 2**40)
        x = F(rng.randrange(2**40), 2**40)
        ex = orbit(t, x, 80)
        fl = orbit(float(t), float(x), 80)
        assert [float(v) for v in ex] == fl


def test_deviation_sum_examples():
    assert deviation_sum(F(1, 2), F(1, 2), 2) == F(-1, 2)
    assert deviation_sum(F(1, 2), F(1, 2), 4) == -1
    for t, x in [(F(1, 3), F(2, 9)), (F(3, 5), F(1, 7))]:
        assert deviation_sum(t, x, 1) == x - F(1, 2)


def test_deviation_sum_matches_orbit():
    t, x = F(3, 14), F(5, 11)
    assert deviation_sum(t, x, 300) == sum(orbit(t, x, 300)) - 150


def test_deviation_sum_float():
    assert deviation_sum(0.5, 0.5, 4) == -1.0


def test_entry_time_examples():
    assert entry_time(F(1, 2), F(1, 2), 100) == 1
    assert entry_time(F(1, 3), F(9, 10), 100) == 0
    assert entry_time(F(1, 2), F(1, 3), 100) is None
    # the double nearest 1/3 is dyadic, so it drifts off the repelling orbit
    assert entry_time(0.5, 1 / 3, 100) >= 50


def test_orbit_summary_lands_on_t():
    t, x = F(3, 14), F(5, 11)
    s = orbit_summary(t, x, 50)
    pts = orbit(t, x, s.entry_time + 2)
    assert in_flat_spot(t, pts[s.entry_time])
    assert pts[s.entry_time + 1] == t
    assert s.period == 3


def test_stable_orbit_examples():
    assert stable_orbit(R(1, 2), F(2, 5)) == [F(2, 5), F(4, 5)]
    assert stable_orbit(R(1, 3), F(3, 14)) == [F(3, 14), F(3, 7), F(6, 7)]
    assert stable_orbit(R(2, 3), F(11, 14)) == [F(11, 14), F(4, 7), F(1, 7)]


def test_stable_orbit_closes_under_step():
    rng = random.Random(5)
    for r in farey_enumerate(10):
        t = random_interior_t(rng, r)
        orb = stable_orbit(r, t)
        assert [step(t, x) for x in orb] == orb[1:] + [t]


def test_stable_orbit_rejects_boundary():
    lo, hi = interval_I(R(1, 2))
    for t in (lo, hi, F(1, 10)):
        with pytest.raises(ValueError):
            stable_orbit(R(1, 2), t)


def test_limit_deviation_examples():
    assert limit_deviation(R(1, 2), F(2, 3)) == 0
    assert limit_deviation(R(1, 2), F(1, 3)) == 0
    assert limit_deviation(R(1, 2), F(1, 2)) == F(-1, 4)
    assert limit_deviation(R(2, 5), F(5, 16)) == F(-13, 80)


def test_limit_deviation_rejects_outside():
    with pytest.raises(ValueError):
        limit_deviation(R(1, 2), F(1, 4))


def test_limit_deviation_spans_J():
    # the left-hand limit at t_pq reaches the right end of J
    from flatspot.density import component

    for r in farey_enumerate(9):
        lo, hi = component(r).support
        assert limit_deviation(r, t_of(r)) == lo
        assert limit_deviation(r, t_of(r)) + F(1, r.q) == hi


def test_locate_examples():
    assert locate(F(1, 2), 5) == R(1, 2)
    assert locate(F(3, 10), 5) == R(2, 5)
    assert locate(F(1, 10), 3) is None


def test_locate_finds_every_interior_point():
    rng = random.Random(11)
    for r in farey_enumerate(12):
        assert locate(random_interior_t(rng, r), 12) == r


def test_entry_finite_in_interior():
    # every rational point off the repelling orbit reaches the flat spot
    rng = random.Random(13)
    for r in farey_enumerate(10):
        t = random_interior_t(rng, r)
        for _ in range(100):
            x0 = F(rng.randrange(10**6), 10**6)
            assert entry_time(t, x0, 10 * 2**r.q) is not None


def test_convergence_bound_small():
    assert check_convergence(max_q=5, per_interval=5, ns=(200, 1000)) == []


def test_endpoint_limits_equal():
    assert check_endpoints(20) == []


def test_piecewise_linear_structure():
    assert check_piecewise(8) == []
