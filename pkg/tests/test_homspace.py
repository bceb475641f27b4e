import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from hausdorff_h1 import homspace as hs
from hausdorff_h1.errors import InvalidInputError

from conftest import ALL_GROUPS

H1 = hs.GroupSpec("heisenberg", 1)
UT3 = hs.GroupSpec("upper_triangular", 3)
SU2 = hs.GroupSpec("su2")


@pytest.mark.parametrize("spec, dim, Q, C", [
    (hs.GroupSpec("euclidean", 3), 3, 3, 8),
    (hs.GroupSpec("torus", 2), 2, 2, 4),
    (SU2, 3, 3, 8),
    (H1, 3, 4, 16),
    (hs.GroupSpec("heisenberg", 2), 5, 6, 64),
    (UT3, 3, 4, 16),
    (hs.GroupSpec("upper_triangular", 4), 6, 10, 1024),
])
def test_constants(spec, dim, Q, C):
    assert spec.dimension == dim
    assert spec.homogeneous_dimension == Q
    assert spec.doubling_constant == C
    assert spec.s == Q


def test_group_descriptor_round_trip():
    for spec in ALL_GROUPS:
        assert hs.GroupSpec.from_dict(spec.to_dict()) == spec
    assert hs.GroupSpec("SU(2)") == SU2
    with pytest.raises(InvalidInputError):
        hs.GroupSpec.from_dict({"family": "torus", "n": 1, "m": 2})
    with pytest.raises(InvalidInputError):
        hs.GroupSpec("lie", 2)
    with pytest.raises(InvalidInputError):
        hs.GroupSpec("upper_triangular", 1)


def test_heisenberg_product():
    np.testing.assert_array_equal(hs.multiply([1, 0, 0], [0, 1, 0], H1), [1, 1, 0.5])
    np.testing.assert_array_equal(hs.multiply([0, 1, 0], [1, 0, 0], H1), [1, 1, -0.5])


@pytest.mark.parametrize("n", [3, 4, 5])
def test_upper_triangular_product_is_matrix_product(n, rng):
    spec = hs.GroupSpec("upper_triangular", n)
    I, J = hs.ut_pairs(n)
    g = rng.normal(size=(20, I.size))
    h = rng.normal(size=(20, I.size))
    dense = hs.ut_to_matrix(g, n) @ hs.ut_to_matrix(h, n)
    np.testing.assert_allclose(hs.multiply(g, h, spec), dense[:, I, J], atol=1e-12)
    inv = np.linalg.inv(hs.ut_to_matrix(g, n))
    np.testing.assert_allclose(hs.inverse(g, spec), inv[:, I, J], atol=1e-10)


@pytest.mark.parametrize("spec", ALL_GROUPS, ids=lambda s: s.label)
def test_group_axioms(spec, rng):
    g, h, k = (hs.sample_region(spec, 200, rng) for _ in range(3))
    e = spec.identity()

    def eq(a, b):
        # the torus compares through its wrap-around metric, the rest coordinate-wise
        if spec.family == "torus":
            np.testing.assert_allclose(hs.distance(a, b, spec), 0.0, atol=1e-12)
        else:
            np.testing.assert_allclose(a, np.broadcast_to(b, np.shape(a)), atol=1e-10)
    eq(hs.multiply(g, e, spec), g)
    eq(hs.multiply(e, g, spec), g)
    eq(hs.multiply(g, hs.inverse(g, spec), spec), np.broadcast_to(e, g.shape))
    eq(hs.multiply(hs.multiply(g, h, spec), k, spec), hs.multiply(g, hs.multiply(h, k, spec), spec))


@pytest.mark.parametrize("spec", ALL_GROUPS, ids=lambda s: s.label)
def test_left_invariance(spec, rng):
    x, y, z = (hs.sample_region(spec, 1000, rng) for _ in range(3))
    d0 = hs.distance(x, y, spec)
    d1 = hs.distance(hs.multiply(z, x, spec), hs.multiply(z, y, spec), spec)
    np.testing.assert_allclose(d1, d0, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("spec", ALL_GROUPS, ids=lambda s: s.label)
def test_metric_basics(spec, rng):
    x, y = hs.sample_region(spec, 500, rng), hs.sample_region(spec, 500, rng)
    np.testing.assert_allclose(hs.distance(x, x, spec), 0.0, atol=1e-7)
    np.testing.assert_allclose(hs.distance(x, y, spec), hs.distance(y, x, spec), rtol=1e-9)
    assert np.all(hs.distance(x, y, spec) > 0)


@pytest.mark.parametrize("spec", [g for g in ALL_GROUPS if g.family in ("euclidean", "torus", "su2")],
                         ids=lambda s: s.label)
def test_triangle_inequality_for_metrics(spec, rng):
    x, y, z = (hs.sample_region(spec, 2000, rng) for _ in range(3))
    lhs = hs.distance(x, z, spec)
    rhs = hs.distance(x, y, spec) + hs.distance(y, z, spec)
    assert np.all(lhs <= rhs * (1 + 1e-9) + 1e-12)


def test_distance_examples():
    assert hs.distance([0.9, 0.1], [0.1, 0.2], hs.GroupSpec("torus", 2)) == pytest.approx(0.2, abs=1e-15)
    assert hs.heisenberg_gauge([0.0, 0.0, 1.0], 1, c=1.0) == 1.0
    assert hs.heisenberg_gauge([1.0, 0.0, 0.0], 1, c=2.0) == 2.0
    assert hs.distance([1, 0, 0, 0], [0, 1, 0, 0], SU2) == pytest.approx(math.pi / 2)


def test_shape_errors():
    with pytest.raises(InvalidInputError):
        hs.distance([0.0, 0.0], [0.0, 0.0, 0.0], H1)
    with pytest.raises(InvalidInputError):
        hs.multiply(np.zeros((2, 2, 3)), np.zeros(3), H1)
    with pytest.raises(InvalidInputError):
        SU2.point([1.0, 1.0, 0.0, 0.0])
    with pytest.raises(InvalidInputError):
        hs.Ball([0.0], 0.0)
    with pytest.raises(InvalidInputError):
        hs.snowflake_distance([0.0], [1.0], hs.GroupSpec("euclidean", 1), 1.5)


def test_torus_point_reduction():
    np.testing.assert_allclose(hs.GroupSpec("torus", 2).point([1.25, -0.25]), [0.25, 0.75])


# ---------------------------------------------------------------- measures


def test_ball_measure_examples():
    assert hs.ball_measure(hs.Ball(np.zeros(3), 2.0), H1) / hs.ball_measure(hs.Ball(np.zeros(3), 1.0), H1) \
        == pytest.approx(16.0, rel=1e-12)
    assert hs.ball_measure(hs.Ball([0.3], 0.7), hs.GroupSpec("torus", 1)) == 1.0
    assert hs.ball_measure(hs.Ball([0.0, 0.0], 1.0), hs.GroupSpec("euclidean", 2)) == 4.0
    assert hs.ball_measure(math.pi, SU2) == pytest.approx(1.0)
    with pytest.raises(InvalidInputError):
        hs.ball_measure(-1.0, H1)


def test_su2_cap_measure_against_quadrature():
    # normalised Haar measure has radial density (2/pi) sin^2(theta)
    for r in (0.1, 0.6, 1.5, 3.0):
        val, _ = integrate.quad(lambda t: 2.0 / math.pi * math.sin(t) ** 2, 0.0, r)
        assert hs.su2_cap_measure(r) == pytest.approx(val, rel=1e-12)


def test_heisenberg_calibration_closed_form():
    # unit Koranyi ball volumes: H_1 pi^2/2, H_2 2 pi^2/3
    assert hs.calibrate_gauge(H1) ** 4 == pytest.approx(math.pi ** 2 / 2, rel=1e-12)
    assert hs.calibrate_gauge(hs.GroupSpec("heisenberg", 2)) ** 6 == pytest.approx(2 * math.pi ** 2 / 3, rel=1e-12)
    assert hs.calibrate_gauge(H1) is hs.calibrate_gauge(H1)


def test_heisenberg_unit_ball_by_slices():
    val, se = hs.estimate_ball_measure(H1, hs.Ball(np.zeros(3), 1.0), method="grid", resolution=2000)
    assert se == 0.0
    assert abs(val - 1.0) <= 1e-4


def test_upper_triangular_calibration_by_counting():
    # uncalibrated symmetric gauge ball of T_1(3): |x12|, |x23| < 1, |x13| < 1, |x13 - x12 x23| < 1
    rng = np.random.default_rng(7)
    n = 400_000
    x = rng.uniform(-1.0, 1.0, size=(n, 3))
    inside = np.abs(x[:, 1] - x[:, 0] * x[:, 2]) < 1.0
    p = inside.mean()
    vol, se = 8 * p, 8 * math.sqrt(p * (1 - p) / n)
    c4 = hs.calibrate_gauge(UT3) ** 4
    assert abs(c4 - vol) < 4 * se
    assert c4 == pytest.approx(7.0, rel=1e-12)


@pytest.mark.parametrize("spec", ALL_GROUPS, ids=lambda s: s.label)
def test_ball_measure_matches_monte_carlo(spec, rng):
    center = hs.sample_region(spec, 1, rng, extent=0.5)[0]
    r = {"torus": 0.3, "su2": 1.0}.get(spec.family, 0.8)
    ball = hs.Ball(center, r)
    est, se = hs.estimate_ball_measure(spec, ball, 200_000, seed=3)
    exact = hs.ball_measure(ball, spec)
    assert abs(est - exact) <= 4 * se + 1e-12


def test_ball_measure_independent_of_center():
    for spec in (SU2, H1):
        a, sa = hs.estimate_ball_measure(spec, hs.Ball(spec.identity(), 0.7), 200_000, seed=1)
        c = hs.sample_region(spec, 1, np.random.default_rng(0))[0]
        b, sb = hs.estimate_ball_measure(spec, hs.Ball(c, 0.7), 200_000, seed=2)
        assert abs(a - b) <= 4 * math.hypot(sa, sb)


# ---------------------------------------------------------------- doubling


def test_doubling_examples():
    R2 = hs.GroupSpec("euclidean", 2)
    rep = hs.doubling_profile(R2, [np.zeros(2)], [0.1, 1.0, 10.0])
    assert np.all(rep.ratios == 4.0) and rep.passed
    t1 = hs.doubling_profile(hs.GroupSpec("torus", 1), [np.zeros(1)], [0.4])
    assert t1.ratios[0, 0] == pytest.approx(1.25)
    h = hs.doubling_profile(H1, [np.zeros(3)], [0.5, 2.0])
    np.testing.assert_allclose(h.ratios, 16.0, rtol=1e-12)


def test_su2_doubling_with_monte_carlo_cross_check():
    rng = np.random.default_rng(1)
    centers = hs.sample_region(SU2, 3, rng)
    rep = hs.doubling_profile(SU2, centers, [0.05, 0.5, 1.0, 2.0], mc_samples=100_000, seed=5)
    assert rep.passed and rep.max_ratio <= 8.0
    z = np.abs(rep.mc_ratios - rep.ratios) / rep.mc_stderr
    assert z.max() < 4


def test_doubling_needs_input():
    with pytest.raises(InvalidInputError):
        hs.doubling_profile(H1, [], [1.0])


def test_snowflake():
    R1 = hs.GroupSpec("euclidean", 1)
    assert hs.snowflake_distance([0.0], [4.0], R1, 0.5) == pytest.approx(2.0)
    assert hs.snowflake_distance([0.0], [4.0], R1, 1.0) == 4.0
    out = hs.snowflake_doubling(R1, [0.01, 0.3, 1.0, 7.0], 0.5)
    assert out["max_ratio"] == pytest.approx(4.0) and out["passed"]
    assert out["bound"] == 8.0


@settings(max_examples=50, deadline=None)
@given(st.floats(0.2, 1.0), st.floats(1e-3, 50.0))
def test_snowflake_ratio_is_power_of_doubling(theta, r):
    out = hs.snowflake_doubling(hs.GroupSpec("euclidean", 2), [r], theta)
    assert out["max_ratio"] == pytest.approx(4.0 ** (1 / theta), rel=1e-9)
    assert out["passed"]


# ---------------------------------------------------------------- Struble


def test_struble_metric():
    fam = hs.StrubleFamily(hs.GroupSpec("torus", 1))
    assert hs.struble_metric([0.0], [0.25], fam) == pytest.approx(0.5)
    assert hs.struble_metric([0.3], [0.3], fam) == 0.0
    np.testing.assert_allclose(fam.sides[:3], [0.5, 0.25, 0.125])
    with pytest.raises(InvalidInputError):
        hs.StrubleFamily(H1)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=6, max_size=6))
def test_struble_metric_invariance(c):
    fam = hs.StrubleFamily(hs.GroupSpec("torus", 2))
    x, y, z = np.array(c[:2]), np.array(c[2:4]), np.array(c[4:])
    d = hs.struble_metric(x, y, fam)
    assert d == pytest.approx(hs.struble_metric(y, x, fam), abs=1e-12)
    assert d == pytest.approx(hs.struble_metric(hs.reduce_torus(x + z), hs.reduce_torus(y + z), fam), abs=1e-12)
    assert 0.0 <= d <= 2.0


# ---------------------------------------------------------------- grids


def test_box_grid_total():
    g = hs.box_grid([(0, 2), (-1, 0.5)], 17)
    assert g.total == pytest.approx(3.0, rel=1e-13)
    gg = hs.box_grid([(1, 2)], 7, rule="gauss")
    assert np.dot(gg.weights, gg.points[:, 0] ** 5) == pytest.approx((64 - 1) / 6, rel=1e-13)
    with pytest.raises(InvalidInputError):
        hs.box_grid([(1, 1)], 4)


def test_su2_grid_is_probability_and_integrates_polynomials():
    g = hs.su2_grid(16)
    assert g.total == pytest.approx(1.0, rel=1e-12)
    # E[x_0^2] = 1/4 on S^3
    assert np.dot(g.weights, g.points[:, 0] ** 2) == pytest.approx(0.25, rel=1e-3)


@pytest.mark.parametrize("spec", ALL_GROUPS, ids=lambda s: s.label)
def test_ball_grid(spec, rng):
    center = hs.sample_region(spec, 1, rng, extent=0.5)[0]
    r = {"torus": 0.2, "su2": 0.6}.get(spec.family, 0.5)
    ball = hs.Ball(center, r)
    g = hs.ball_grid(spec, ball, 12)
    assert np.all(hs.distance(g.points, center, spec) < r * (1 + 1e-9))
    exact = hs.ball_measure(ball, spec)
    if spec.family in ("euclidean", "torus", "su2"):
        assert g.total == pytest.approx(exact, rel=1e-10)
    else:
        assert g.error == pytest.approx(abs(g.total - exact))
        assert g.total == pytest.approx(exact, rel=0.15)
