import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lsreinit.errors import ConfigError, DataError, UsageError
from lsreinit.grid import (Field, Trajectory, linf_distance, make_grid, one_sided_differences,
                           one_sided_gradients, read_field_csv, read_trajectory, sample,
                           write_field_csv, write_trajectory)
from lsreinit.oracles import two_bump_u0


def test_make_grid_spacing():
    g = make_grid(-5, 5, 101)
    assert g.dim == 1
    assert g.dx == pytest.approx((0.1,))
    g2 = make_grid((0, 0), (1, 2), (11, 21))
    assert g2.dx == pytest.approx((0.1, 0.1))
    assert g2.shape == (11, 21)


@pytest.mark.parametrize("lo,hi,n", [(1, 1, 10), (0, 1, 2), (2, 1, 5), ((0, 0), (1,), (3, 3)),
                                     ((0, 0, 0), (1, 1, 1), (3, 3, 3))])
def test_make_grid_rejects(lo, hi, n):
    with pytest.raises(ConfigError):
        make_grid(lo, hi, n)


def test_coordinates_are_fused():
    g = make_grid(-8, 8, 1601)
    x = g.axis(0)
    assert x[0] == -8.0
    i = np.arange(1601)
    assert np.array_equal(x, -8.0 + i * g.dx[0])
    # same floats on a second call
    assert np.array_equal(x, g.axis(0))


def test_sample_examples():
    g = make_grid(-8, 8, 1601)
    f = sample(two_bump_u0, g)
    assert f.values[g.index_of(2.0)] == 1.0
    z = sample(lambda x: 0 * x, make_grid(0, 1, 11))
    assert np.all(z.values == 0)
    lin = sample(lambda x: x, make_grid(0, 1, 11))
    np.testing.assert_allclose(lin.values, np.linspace(0, 1, 11), atol=1e-15)


def test_sample_scalar_function_fallback():
    g = make_grid((0, 0), (1, 1), (3, 3))
    f = sample(lambda x, y: float(max(x, y)), g)
    assert f.values[2, 0] == 1.0


def test_sample_non_finite_names_node():
    g = make_grid(0, 1, 11)
    with pytest.raises(DataError, match=r"node \(10,\)"):
        sample(lambda x: np.where(x < 1, 0.0, np.inf), g)


def test_field_rejects_bad_values():
    g = make_grid(0, 1, 3)
    with pytest.raises(DataError):
        Field(g, [0.0, np.nan, 1.0])
    with pytest.raises(DataError):
        Field(g, [0.0, 1.0])
    f = Field(g, [0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        f.values[0] = 3.0


def test_one_sided_examples():
    g = make_grid(0, 2, 3)
    f = Field(g, [0, 1, 2])
    assert one_sided_gradients(f, 1) == (pytest.approx([1.0]), pytest.approx([1.0]))
    f = Field(g, [0, 1, 0])
    Dm, Dp = one_sided_gradients(f, 1)
    assert Dm[0] == 1.0 and Dp[0] == -1.0
    Dm, Dp = one_sided_gradients(Field(g, [0, 1, 2]), 0)
    assert Dm[0] == Dp[0] == 1.0


def test_vectorised_differences_match_pointwise():
    g = make_grid((0, 0), (1, 2), (5, 7))
    rng = np.random.default_rng(0)
    f = Field(g, rng.normal(size=g.shape))
    Dm, Dp = one_sided_differences(f.values, g.dx)
    for idx in np.ndindex(*g.shape):
        dm, dp = one_sided_gradients(f, idx)
        np.testing.assert_allclose(Dm[(slice(None),) + idx], dm, rtol=1e-14)
        np.testing.assert_allclose(Dp[(slice(None),) + idx], dp, rtol=1e-14)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-5, 5), c=st.floats(-5, 5))
def test_linear_fields_exact(a, b, c):
    g = make_grid((-1, 0), (1, 3), (6, 9))
    f = sample(lambda x, y: a * x + b * y + c, g)
    Dm, Dp = one_sided_differences(f.values, g.dx)
    tol = 1e-12 * (1 + abs(a) + abs(b) + abs(c))
    for k, slope in enumerate((a, b)):
        np.testing.assert_allclose(Dm[k], slope, atol=tol / g.dx[k])
        np.testing.assert_allclose(Dp[k], slope, atol=tol / g.dx[k])


def test_linf_distance():
    # grids need three nodes; the third node is kept equal in a and b
    g = make_grid(0, 2, 3)
    a = Field(g, [0, 2, 5])
    b = Field(g, [1, 1, 5])
    assert linf_distance(a, a) == 0
    assert linf_distance(Field(g, [1, 1, 1]), Field(g, [0, 0, 0])) == 1
    assert linf_distance(a, b, region=[0]) == 1
    assert linf_distance(a, b, region=lambda x: x < 0.5) == 1
    assert linf_distance(a, b) == 1
    with pytest.raises(UsageError):
        linf_distance(a, Field(make_grid(0, 3, 3), [0, 0, 0]))


def test_sample_against_analytic_is_exact():
    g = make_grid(-8, 8, 801)
    x = g.axis(0)
    f = sample(two_bump_u0, g)
    assert linf_distance(f, Field(g, two_bump_u0(x))) == 0.0


def test_trajectory_invariants():
    g = make_grid(0, 1, 3)
    a, b = Field(g, [0, 0, 0], 0.0), Field(g, [1, 1, 1], 0.5)
    tr = Trajectory([a, b])
    assert tr.at(0.5) is b
    assert tr.between(0.0, 0.5) == [b]
    with pytest.raises(DataError):
        Trajectory([b, a])
    with pytest.raises(DataError):
        Trajectory([a, Field(make_grid(0, 2, 3), [0, 0, 0], 1.0)])


def test_csv_round_trip(tmp_path):
    g = make_grid((0, -1), (1, 1), (4, 3))
    f = sample(lambda x, y: x * y + 0.1, g, t=0.25)
    write_field_csv(f, tmp_path / "f.csv")
    text = (tmp_path / "f.csv").read_text().splitlines()
    assert text[0] == "# t=0.25"
    # row-major: y varies fastest
    assert text[1].split(",")[:2] == ["0", "-1"]
    assert text[2].split(",")[:2] == ["0", "0"]
    back = read_field_csv(tmp_path / "f.csv")
    assert back.time == 0.25
    assert back.grid == g
    assert np.array_equal(back.values, f.values)

    tr = Trajectory([f, f.with_values(f.values * 2, 0.5)])
    write_trajectory(tr, tmp_path / "traj")
    lines = (tmp_path / "traj" / "manifest.csv").read_text().splitlines()
    assert lines[0] == "index,time,file"
    assert len(lines) == 3
    tr2 = read_trajectory(tmp_path / "traj")
    assert np.array_equal(tr2.times, tr.times)
