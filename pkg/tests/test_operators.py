import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plgraph.graph_core import Branching, LatticeSpec, TreeSpec, build_lattice_ball, build_tree_ball
from plgraph.operators import (
    Classification,
    Potential,
    classify,
    laplacian,
    laplacian_apply,
    schrodinger_residual,
)

from conftest import lattice_neighbors


def test_constant_is_harmonic(binary_tree, cube_ball):
    for ball in (binary_tree, cube_ball):
        # W @ f and deg * f are summed in different orders: round-off only
        np.testing.assert_allclose(laplacian(ball, 3.7), 0.0, atol=1e-14)


def test_square_on_line():
    ball = build_lattice_ball(LatticeSpec(1, 3))
    f = ball.ids[:, 0].astype(float) ** 2
    assert laplacian_apply(ball, f, (0,)) == 1.0


def test_identity_on_tree_root():
    ball = build_tree_ball(TreeSpec(Branching("constant", b0=2), 3))
    f = ball.layer.astype(float)
    assert laplacian_apply(ball, f, (0, 0)) == 2.0


def test_laplacian_rejects_halo(binary_tree):
    with pytest.raises(ValueError):
        laplacian_apply(binary_tree, np.zeros(binary_tree.n_vertices), binary_tree.halo_index[0])


def test_vectorised_matches_pointwise_oracle(plane_ball, rng):
    # independent oracle: neighbor sums by coordinate arithmetic
    f = rng.normal(size=plane_ball.n_vertices)
    value = {plane_ball.vertex_id(i): f[i] for i in range(plane_ball.n_vertices)}
    lap = laplacian(plane_ball, f)
    for k, i in enumerate(plane_ball.interior_index):
        x = plane_ball.vertex_id(i)
        expected = sum(value[y] - value[x] for y in lattice_neighbors(x)) / 4.0
        assert lap[k] == pytest.approx(expected, abs=1e-13)
        assert laplacian_apply(plane_ball, f, x) == pytest.approx(expected, abs=1e-13)


def test_residual_examples(binary_tree):
    n = binary_tree.n_vertices
    assert np.all(schrodinger_residual(binary_tree, 1.0, np.zeros(n), 0.0) == 0)
    r = schrodinger_residual(binary_tree, 1.0, np.ones(n), 0.0)
    assert np.all(r == -1.0)
    assert classify(r, 1e-9) is Classification.SUPERSOLUTION


def test_classify():
    assert classify(np.zeros(4)) is Classification.SOLUTION
    assert classify(-np.ones(3), 1e-9) is Classification.SUPERSOLUTION
    assert classify(np.ones(3), 1e-9) is Classification.SUBSOLUTION
    assert classify(np.array([-1.0, 1.0])) is Classification.NEITHER
    assert classify(np.array([-1e-10, 1e-10]), 1e-9) is Classification.SOLUTION
    with pytest.raises(ValueError):
        classify(np.zeros(2), -1.0)


def test_potential_values(cube_ball, binary_tree):
    v = Potential(2.0, 1.5, "euclidean").evaluate(cube_ball)
    np.testing.assert_allclose(v, 2.0 * (1 + cube_ball.distance) ** -1.5)
    assert np.all(v > 0)
    vt = Potential(1.0, 1.0).evaluate(binary_tree)
    np.testing.assert_allclose(vt, 1.0 / (1 + binary_tree.layer))
    with pytest.raises(ValueError):
        Potential(1.0, 1.0, "euclidean").evaluate(binary_tree)
    floored = Potential(1.0, 1.0, floor=5.0).evaluate(binary_tree)
    assert floored[0] == 5.0 and floored[1] == 0.5


def test_potential_json():
    p = Potential.from_dict({"kind": "power", "c0": 1.0, "alpha": 1.0, "metric": "combinatorial"})
    assert p == Potential(1.0, 1.0, "combinatorial")
    assert Potential.from_dict(p.to_dict()) == p
    with pytest.raises(ValueError):
        Potential.from_dict({"kind": "gaussian"})
    with pytest.raises(ValueError):
        Potential(0.0, 1.0)


FIELD_BALL = build_lattice_ball(LatticeSpec(2, 4.0))
TREE_BALL = build_tree_ball(TreeSpec(Branching("constant", b0=3), 3))


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    a=st.floats(-10, 10, allow_nan=False),
    b=st.floats(-10, 10, allow_nan=False),
    tree=st.booleans(),
)
def test_residual_linearity(seed, a, b, tree):
    ball = TREE_BALL if tree else FIELD_BALL
    g = np.random.default_rng(seed)
    n = ball.n_vertices
    u1, u2, f1, f2 = (g.normal(size=n) for _ in range(4))
    V = Potential(1.3, 0.7)
    lhs = schrodinger_residual(ball, V, a * u1 + b * u2, a * f1 + b * f2)
    rhs = a * schrodinger_residual(ball, V, u1, f1) + b * schrodinger_residual(ball, V, u2, f2)
    scale = 1.0 + np.abs(lhs).max() + (abs(a) + abs(b)) * 10
    assert np.abs(lhs - rhs).max() <= 1e-12 * scale


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), tree=st.booleans())
def test_green_identity(seed, tree):
    ball = TREE_BALL if tree else FIELD_BALL
    g = np.random.default_rng(seed)
    n = ball.n_vertices
    # support strictly inside: off the halo and off interior vertices touching it
    touching = np.asarray(ball.weights[:, ball.halo_index].sum(axis=1)).ravel() > 0
    inner = ball.interior & ~touching
    phi = np.where(inner, g.normal(size=n), 0.0)
    psi = np.where(inner, g.normal(size=n), 0.0)
    idx = ball.interior_index
    lhs = np.sum(ball.mu[idx] * laplacian(ball, phi) * psi[idx])
    w = ball.weights.tocoo()
    rhs = -0.5 * np.sum(w.data * (phi[w.col] - phi[w.row]) * (psi[w.col] - psi[w.row]))
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)
