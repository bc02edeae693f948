import json
from dataclasses import replace

import numpy as np
import pytest
import scipy.sparse as sp

from plgraph.graph_core import (
    Branching,
    LatticeSpec,
    TreeSpec,
    VertexCapError,
    build_ball,
    build_lattice_ball,
    build_tree_ball,
    is_weakly_spherically_symmetric,
    layer_degrees,
    outer_inner_degree,
    spec_from_dict,
    tree_layer_sizes,
    validate,
)

from conftest import brute_lattice


def layer_sizes(ball):
    return [int((ball.layer == r).sum()) for r in range(ball.max_layer + 1)]


def test_binary_tree_layers():
    ball = build_tree_ball(TreeSpec(Branching("constant", b0=2), 2))
    assert layer_sizes(ball) == [1, 2, 4, 8]
    assert int(ball.halo.sum()) == 8
    assert np.array_equal(ball.halo, ball.layer == 3)


def test_power_tree_layers():
    ball = build_tree_ball(TreeSpec(Branching("power", p=2), 3))
    assert layer_sizes(ball) == [1, 1, 4, 36, 576]
    assert int(ball.halo.sum()) == 576


def test_path_tree_degrees():
    ball = build_tree_ball(TreeSpec(Branching("constant", b0=1), 5))
    assert layer_sizes(ball) == [1] * 7
    for r in range(1, 6):
        assert outer_inner_degree(ball, (r, 0)) == (1.0, 1.0)


@pytest.mark.parametrize("branching", [Branching("constant", b0=3), Branching("power", p=1)])
def test_tree_parent_and_children(branching):
    ball = build_tree_ball(TreeSpec(branching, 3))
    for i in range(ball.n_vertices):
        nb, w = ball.neighbors(i)
        r = ball.layer[i]
        assert np.all(w == 1)
        assert int((ball.layer[nb] == r - 1).sum()) == (1 if r > 0 else 0)
        if ball.interior[i]:
            assert int((ball.layer[nb] == r + 1).sum()) == branching(int(r))


def test_tree_cardinality_recursion():
    b = Branching("power", p=1)
    sizes = tree_layer_sizes(b, 6)
    for r in range(6):
        assert sizes[r + 1] == b(r) * sizes[r]


def test_lattice_line():
    ball = build_lattice_ball(LatticeSpec(1, 2.5))
    assert sorted(ball.ids[ball.interior, 0].tolist()) == [-2, -1, 0, 1, 2]
    assert sorted(ball.ids[ball.halo, 0].tolist()) == [-3, 3]


def test_lattice_plus_shape():
    # |x| < 1.2 leaves exactly the origin and the 4 unit vectors
    ball = build_lattice_ball(LatticeSpec(2, 1.2))
    got = {tuple(x) for x in ball.ids[ball.interior].tolist()}
    assert got == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}


def test_lattice_radius_one_and_a_half_includes_diagonals():
    ball = build_lattice_ball(LatticeSpec(2, 1.5))
    got = {tuple(x) for x in ball.ids[ball.interior].tolist()}
    interior, _ = brute_lattice(2, 1.5)
    assert got == interior
    assert len(got) == 9


@pytest.mark.parametrize("n,R", [(1, 4.0), (2, 3.3), (3, 2.5), (4, 2.0)])
def test_lattice_matches_enumeration(n, R):
    ball = build_lattice_ball(LatticeSpec(n, R))
    interior, halo = brute_lattice(n, R)
    assert {tuple(x) for x in ball.ids[ball.interior].tolist()} == interior
    assert {tuple(x) for x in ball.ids[ball.halo].tolist()} == halo
    ids = [tuple(x) for x in ball.ids.tolist()]
    assert ids == sorted(ids)


def test_cube_degrees(cube_ball):
    deg = cube_ball.degree[cube_ball.interior]
    assert np.all(deg == 6)
    assert np.all(cube_ball.mu == 6)


@pytest.mark.parametrize("x,expected", [((1, 0), (0.75, 0.25)), ((1, 1), (0.5, 0.5)), ((0, 2), (0.75, 0.25))])
def test_plane_outer_inner(plane_ball, x, expected):
    assert outer_inner_degree(plane_ball, x) == pytest.approx(expected, abs=1e-15)


def test_line_outer_inner():
    ball = build_lattice_ball(LatticeSpec(1, 7))
    assert outer_inner_degree(ball, (5,)) == (0.5, 0.5)


def test_tree_outer_inner(square_tree):
    for r in (1, 2, 3):
        assert outer_inner_degree(square_tree, (r, 0)) == (float((r + 1) ** 2), 1.0)


def test_outer_inner_rejects_halo_and_center(binary_tree):
    with pytest.raises(ValueError):
        outer_inner_degree(binary_tree, (5, 0))
    with pytest.raises(ValueError):
        outer_inner_degree(binary_tree, (0, 0))


@pytest.mark.parametrize("fixture", ["binary_tree", "square_tree", "cube_ball", "plane_ball"])
def test_degree_identity(fixture, request):
    ball = request.getfixturevalue(fixture)
    dplus, dminus = layer_degrees(ball)
    sel = ball.interior & (ball.layer >= 1)
    deg_ratio = ball.degree[sel] / ball.mu[sel]
    np.testing.assert_allclose(dplus[sel] + dminus[sel], deg_ratio, rtol=1e-12)


@pytest.mark.parametrize("fixture", ["binary_tree", "square_tree", "cube_ball", "plane_ball"])
def test_generated_balls_validate(fixture, request):
    assert validate(request.getfixturevalue(fixture)) == []


def test_validate_flags_asymmetry(binary_tree):
    w = binary_tree.weights.tolil(copy=True)
    w[1, 3] = 2.0
    bad = replace(binary_tree, weights=w.tocsr())
    problems = validate(bad)
    sym = [p for p in problems if p.startswith("symmetry")]
    assert len(sym) == 1


def test_validate_flags_missing_neighbor(binary_tree):
    halo = binary_tree.halo.copy()
    halo[binary_tree.halo_index[0]] = False
    problems = validate(replace(binary_tree, halo=halo))
    assert len(problems) == 1 and problems[0].startswith("closure")


def test_validate_flags_intra_layer_edge(binary_tree):
    w = binary_tree.weights.tolil(copy=True)
    w[1, 2] = w[2, 1] = 1.0
    problems = validate(replace(binary_tree, weights=w.tocsr()))
    assert any(p.startswith("layering") for p in problems)


def test_validate_flags_disconnected_interior(binary_tree):
    w = binary_tree.weights.tolil(copy=True)
    w[0, 1] = w[1, 0] = 0.0
    problems = validate(replace(binary_tree, weights=sp.csr_matrix(w)))
    assert any(p.startswith("connectivity") for p in problems)


def test_symmetric_storage(cube_ball):
    w = cube_ball.weights
    assert (w != w.T).nnz == 0
    assert np.all(w.diagonal() == 0)


def test_vertex_cap():
    with pytest.raises(VertexCapError):
        build_tree_ball(TreeSpec(Branching("power", p=3), 6), cap=10_000)
    with pytest.raises(VertexCapError):
        build_lattice_ball(LatticeSpec(3, 30), cap=1000)


def test_weak_symmetry(binary_tree, plane_ball):
    assert is_weakly_spherically_symmetric(binary_tree)
    assert not is_weakly_spherically_symmetric(plane_ball)


def test_ball_is_immutable(binary_tree):
    with pytest.raises(ValueError):
        binary_tree.mu[0] = 2.0
    with pytest.raises(AttributeError):
        binary_tree.family = "lattice"


def test_spec_json_roundtrip():
    docs = [
        '{"family":"tree","branching":{"kind":"constant","b0":2},"radius":3}',
        '{"family":"tree","branching":{"kind":"power","p":2},"radius":2}',
        '{"family":"lattice","n":3,"radius":4}',
    ]
    for text in docs:
        d = json.loads(text)
        spec = spec_from_dict(d)
        again = spec.to_dict()
        assert spec_from_dict(again) == spec
        assert validate(build_ball(spec)) == []


def test_bad_spec():
    with pytest.raises(ValueError):
        spec_from_dict({"family": "hypercube"})
    with pytest.raises(ValueError):
        Branching("constant", b0=0)
    with pytest.raises(ValueError):
        Branching.parse("exponential:2")
