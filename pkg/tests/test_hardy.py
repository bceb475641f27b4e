import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hausdorff_h1 import cases
from hausdorff_h1 import homspace as hs
from hausdorff_h1.automorphisms import AutomorphismSpec
from hausdorff_h1.errors import AtomValidationError, InvalidInputError, RepresentationError
from hausdorff_h1.hardy import (
    Atom, AtomicRepresentation, GridFunction, HomogeneityConstants, h1_upper_bound, make_atom,
    make_random_atom, pushforward_atom, represent, validate_atom,
)

from conftest import ALL_GROUPS

T1 = hs.GroupSpec("torus", 1)
R1 = hs.GroupSpec("euclidean", 1)
H1 = hs.GroupSpec("heisenberg", 1)


def step_atom(height=2.0):
    """+h on (0, 1/4), -h on (-1/4, 0) in T^1."""
    ball = hs.Ball([0.0], 0.25)
    grid = hs.ball_grid(T1, ball, 64)
    offset = hs.torus_offsets(grid.points, 0.0)[:, 0] * np.where(grid.points[:, 0] < 0.5, 1, -1)
    return make_atom(T1, ball, grid, height * np.sign(offset))


def test_step_atom_is_valid():
    rep = validate_atom(step_atom())
    assert rep.passed
    assert rep.sup_residual == pytest.approx(0.0, abs=1e-12)
    assert rep.cancellation_residual == pytest.approx(0.0, abs=1e-12)


def test_oversized_atom_fails_sup_condition():
    rep = validate_atom(step_atom().scaled(1.1))
    assert not rep.passed_sup and rep.passed_support and rep.passed_cancellation
    assert rep.sup_residual == pytest.approx(0.2, rel=1e-9)
    assert not rep.passed


def test_zero_atom_is_valid():
    ball = hs.Ball([0.5], 0.2)
    assert validate_atom(make_atom(T1, ball, hs.ball_grid(T1, ball, 8), np.zeros(8))).passed


def test_support_and_cancellation_failures():
    ball = hs.Ball([0.0], 0.5)
    grid = hs.ball_grid(R1, ball, 10)
    vals = np.ones(10)
    assert not validate_atom(make_atom(R1, ball, grid, vals)).passed_cancellation
    shifted = hs.Ball([0.3], 0.5)
    vals = np.where(np.arange(10) < 5, 1.0, -1.0)
    rep = validate_atom(make_atom(R1, shifted, grid, vals))
    assert not rep.passed_support and rep.support_residual > 0
    empty = Atom(ball, GridFunction(R1, np.zeros((0, 1)), [], []), 0.0)
    with pytest.raises(AtomValidationError):
        validate_atom(empty)


@pytest.mark.parametrize("spec", ALL_GROUPS, ids=lambda s: s.label)
def test_random_atoms(spec):
    ball = cases.atom_ball(spec, np.random.default_rng(5))
    a = make_random_atom(spec, ball, seed=3, resolution=8)
    assert validate_atom(a, 1e-8).passed
    assert abs(a.fn.integral()) <= 1e-10
    b = make_random_atom(spec, ball, seed=3, resolution=8)
    assert np.array_equal(a.fn.values, b.fn.values) and np.array_equal(a.fn.points, b.fn.points)
    assert a.fn.sup_norm() == pytest.approx(1.0 / hs.ball_measure(ball, spec), rel=1e-12)


def test_random_atom_radius_on_torus():
    with pytest.raises(InvalidInputError):
        make_random_atom(T1, hs.Ball([0.0], 0.6))


def test_atom_evaluation_inside_and_outside():
    a = step_atom()
    np.testing.assert_allclose(a([[0.1], [0.9], [0.5]]), [2.0, -2.0, 0.0])


# ---------------------------------------------------------------- pushforward


def test_pushforward_identity():
    for spec in (R1, T1, H1):
        a = make_random_atom(spec, hs.Ball(spec.identity(), 0.25), seed=1, resolution=6)
        C = spec.doubling_constant
        scale, ap = pushforward_atom(a, AutomorphismSpec.identity(spec), HomogeneityConstants.of(spec))
        assert scale == C
        np.testing.assert_allclose(ap.fn.values, a.fn.values / C)


def test_pushforward_reflection_on_circle():
    a = step_atom()
    scale, ap = pushforward_atom(a, AutomorphismSpec.linear(T1, [[-1]]), HomogeneityConstants.of(T1))
    assert scale == 2.0
    assert ap.ball.radius == 0.25
    np.testing.assert_allclose(ap([[0.1], [0.9]]), [-1.0, 1.0])


def test_pushforward_heisenberg_dilation():
    a = make_random_atom(H1, hs.Ball(np.zeros(3), 0.5), seed=4, resolution=8)
    scale, ap = pushforward_atom(a, AutomorphismSpec.dilation(H1, 2.0), HomogeneityConstants.of(H1))
    assert scale == 1.0
    assert ap.ball.radius == 0.25
    assert validate_atom(ap).passed


def _pool(spec, rng):
    fam = spec.family
    if fam == "euclidean":
        M = np.triu(rng.uniform(-1, 1, (spec.n, spec.n)))
        np.fill_diagonal(M, rng.uniform(0.5, 2.0, spec.n) * rng.choice([-1, 1], spec.n))
        return AutomorphismSpec.linear(spec, M)
    if fam == "torus":
        mats = [[[1, 1], [0, 1]], [[0, 1], [1, 0]], [[2, 1], [1, 1]], [[1, 0], [-1, 1]]]
        if spec.n == 1:
            return AutomorphismSpec.linear(spec, [[rng.choice([-1, 1])]])
        return AutomorphismSpec.linear(spec, mats[rng.integers(len(mats))])
    if fam == "su2":
        return AutomorphismSpec.inner(rng.normal(size=4))
    return AutomorphismSpec.dilation(spec, rng.uniform(0.5, 2.0))


@pytest.mark.parametrize("spec", cases.DEFAULT_GROUPS, ids=lambda s: s.label)
def test_pushforward_composition(spec):
    # λ a'(y) = a(A y) on the cells of a' and through the evaluator
    rng = np.random.default_rng(17)
    consts = HomogeneityConstants.of(spec)
    for i in range(100):
        A = _pool(spec, rng)
        ball = cases.atom_ball(spec, rng)
        if spec.family == "torus":
            ball = hs.Ball(ball.center, 0.2 / A.k_constant())
        a = make_random_atom(spec, ball, seed=i, resolution=4)
        scale, ap = pushforward_atom(a, A, consts)
        assert scale == pytest.approx(consts.atom_scale(A.k_constant()))
        np.testing.assert_allclose(scale * ap.fn.values, a.fn.values, rtol=1e-12)
        back = A.apply(ap.fn.points)
        if spec.family == "torus":
            np.testing.assert_allclose(hs.distance(back, a.fn.points, spec), 0.0, atol=1e-10)
        else:
            np.testing.assert_allclose(back, a.fn.points, atol=1e-10)
        y = ap.fn.points[:5]
        np.testing.assert_allclose(scale * ap(y), a(A.apply(y)), atol=1e-10)
        assert abs(ap.fn.integral()) <= 1e-6 * ap.sup_bound * hs.ball_measure(ap.ball, spec)


def test_pushforward_rejects_mismatch():
    a = step_atom()
    with pytest.raises(InvalidInputError):
        pushforward_atom(a, AutomorphismSpec.identity(R1), HomogeneityConstants.of(R1))
    with pytest.raises(AtomValidationError):
        pushforward_atom(a.scaled(3.0), AutomorphismSpec.identity(T1), HomogeneityConstants.of(T1))
    # a radius factor that is too small makes the image fail the sup condition
    A = AutomorphismSpec.dilation(H1, 0.5)
    b = make_random_atom(H1, hs.Ball(np.zeros(3), 0.5), seed=1, resolution=6)
    with pytest.raises(AtomValidationError):
        pushforward_atom(b, A, HomogeneityConstants(1.0, 4.0), k=1.0)


# ---------------------------------------------------------------- representations


def _atom_on(center, seed=0):
    return make_random_atom(R1, hs.Ball([center], 0.5), seed=seed, resolution=32)


def test_represent_multiple_of_atom():
    a = _atom_on(0.0)
    rep = represent(a.fn.scaled(3.0), [a.ball])
    assert len(rep) == 1 and rep.terms[0][0] == pytest.approx(3.0)
    np.testing.assert_allclose(rep(a.fn.points), 3 * a.fn.values)


def test_represent_zero():
    a = _atom_on(0.0)
    rep = represent(a.fn.scaled(0.0), [a.ball])
    assert len(rep) == 0 and h1_upper_bound(rep).value == 0.0


def test_represent_two_atoms():
    a1, a2 = _atom_on(0.0, 1), _atom_on(3.0, 2)
    pts = np.vstack([a1.fn.points, a2.fn.points])
    f = GridFunction(R1, pts, np.concatenate([a1.fn.weights, a2.fn.weights]),
                     np.concatenate([a1.fn.values, -2 * a2.fn.values]))
    rep = represent(f, [a1.ball, a2.ball])
    assert h1_upper_bound(rep).value == pytest.approx(3.0)
    np.testing.assert_allclose(rep(pts), f.values, atol=1e-8)
    assert f.l1_norm() <= h1_upper_bound(rep).value * (1 + 1e-12)


def test_represent_failures():
    a = _atom_on(0.0)
    with pytest.raises(RepresentationError) as err:
        represent(a.fn, [hs.Ball([5.0], 0.5)])
    assert err.value.residual > 0
    ones = GridFunction(R1, a.fn.points, a.fn.weights, np.ones(a.fn.values.size))
    with pytest.raises(RepresentationError):
        represent(ones, [a.ball])


def test_h1_upper_bound():
    a = _atom_on(0.0)
    assert h1_upper_bound(AtomicRepresentation([(1.0, a)])).value == 1.0
    assert h1_upper_bound(AtomicRepresentation([(3.0, a), (-4.0, a)])).value == 7.0
    scale, ap = pushforward_atom(a, AutomorphismSpec.linear(R1, [[0.5]]), HomogeneityConstants.of(R1))
    assert h1_upper_bound(AtomicRepresentation([(scale, ap)])).value == pytest.approx(2.0 * 2.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=4))
def test_l1_norm_below_atomic_bound(coefs):
    atoms = [_atom_on(3.0 * j, j) for j in range(len(coefs))]
    rep = AtomicRepresentation([(c, a) for c, a in zip(coefs, atoms)])
    pts = np.vstack([a.fn.points for a in atoms])
    w = np.concatenate([a.fn.weights for a in atoms])
    l1 = float(np.dot(np.abs(rep(pts)), w))
    assert l1 <= h1_upper_bound(rep).value * (1 + 1e-9) + 1e-12


def test_atom_json_round_trip():
    a = make_random_atom(H1, hs.Ball([0.1, 0.2, 0.3], 0.5), seed=9, resolution=6)
    b = Atom.from_json(a.to_json())
    assert b.group == a.group and b.ball.radius == a.ball.radius
    np.testing.assert_array_equal(b.fn.values, a.fn.values)
    np.testing.assert_array_equal(b.fn.points, a.fn.points)
    assert b.sup_bound == a.sup_bound
    assert validate_atom(b).passed


def test_grid_function_shapes():
    with pytest.raises(InvalidInputError):
        GridFunction(R1, np.zeros((3, 1)), np.ones(2), np.ones(3))
