import math

import numpy as np
import pytest
from scipy import integrate, optimize

from lsreinit.oracles import (barrier_bounds, example_bounded_speed_d, example_bounded_speed_w,
                              example_two_bumps, hopf_lax_w, lipschitz_bound, tent_u0, two_bump_u0)


def test_hopf_lax_matches_two_bumps():
    rng = np.random.default_rng(0)
    xs = rng.uniform(-6, 6, 1000)
    ts = rng.uniform(0, 2.5, 1000)
    for x, t in zip(xs, ts):
        assert hopf_lax_w(two_bump_u0, x, t) == pytest.approx(example_two_bumps(x, t)[0], abs=1e-6)


def test_hopf_lax_2d_cone():
    u0 = lambda x, y: np.maximum(1 - np.hypot(x, y), 0)  # noqa: E731
    for p, t in [((0.3, 0.4), 0.2), ((1.5, 0.0), 0.4), ((2.0, 2.0), 0.5)]:
        expect = max(min(1 - np.hypot(*p) + t, 1.0), 0.0)
        assert hopf_lax_w(u0, p, t) == pytest.approx(expect, abs=1e-6)


def test_two_bumps_jump():
    # the distance jumps at t = 1 inside (-2, 2), w does not
    x = np.array([0.0, 1.0, 1.9, 5.0])
    w_before, d_before = example_two_bumps(x, 1.0)
    w_after, d_after = example_two_bumps(x, 1.0 + 1e-9)
    np.testing.assert_allclose(w_before, w_after, atol=1e-8)
    # at the origin d goes from 0 to the distance t + 3 of the outer boundary
    assert d_after[0] - d_before[0] == pytest.approx(4.0, abs=1e-8)
    assert d_after[2] - d_before[2] == pytest.approx(0.2, abs=1e-8)
    assert d_after[3] == pytest.approx(d_before[3], abs=1e-8)


def _travel(a, b):
    """Time to go from |x| = a to |x| = b >= a at speed (1-|x|)_+ + 1."""
    c = lambda z: max(1 - abs(z), 0) + 1  # noqa: E731
    return integrate.quad(lambda z: 1 / c(z), a, b, points=[1.0], epsabs=1e-13, epsrel=1e-13)[0]


def _w_by_travel_time(x, t):
    # u0 = (1-|x|)_+ peaks at 0, so the best start is the reachable y nearest to the origin
    a = abs(x)
    if _travel(0.0, a) <= t:
        return 1.0
    y = optimize.brentq(lambda y: _travel(y, a) - t, 0.0, a, xtol=1e-14)
    return max(1 - y, 0.0)


@pytest.mark.parametrize("t", [0.3, math.log(2), 1.0, 1.5])
def test_bounded_speed_against_travel_time(t):
    for x in np.linspace(-4, 4, 161):
        assert example_bounded_speed_w(x, t) == pytest.approx(_w_by_travel_time(x, t), abs=1e-9)


def test_bounded_speed_counterexample_point():
    x = 2 - math.log(2)
    assert example_bounded_speed_w(x, 1.0) == pytest.approx(1.0)
    assert example_bounded_speed_d(x, 1.0) == pytest.approx(math.log(2))


def test_tent():
    assert tent_u0(0.0) == 1.0 and tent_u0(1.5) == 0.0


def test_lipschitz_bound():
    assert lipschitz_bound(0.0, 0.5) == 1.0
    assert lipschitz_bound(2.0, 3.0, 0.5) == pytest.approx(3 * math.e)
    assert lipschitz_bound(1.0, 1.0, lambda s: 2 * s) == pytest.approx(math.e, rel=1e-12)
    with pytest.raises(ValueError):
        lipschitz_bound(-1.0, 1.0)


def test_barrier_bounds_two_bumps():
    x = np.linspace(-6, 6, 241)
    for t in (0.0, 0.4, 0.8):
        w, d = example_two_bumps(x, t)
        lo, hi = barrier_bounds(w, d, t, L0=1.0, L1=0.0, Lip_w=1.0)
        assert np.all(lo <= hi + 1e-15)
        np.testing.assert_allclose(lo, w)
        np.testing.assert_allclose(hi, d)
