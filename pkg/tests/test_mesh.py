import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from simplexft import shapes
from simplexft.mesh import (
    AffineMap,
    BoundaryDefectError,
    DegenerateBoundsError,
    MeshFormatError,
    WeightedSimplexMesh,
    check_boundary,
    content,
    contents,
    count_degenerate,
    distortion_factor,
    load_mesh,
    normalize_to_unit_cell,
    save_mesh,
    signed_distortion,
    validate_boundary,
)

from conftest import random_simplex


def gram_content(x):
    e = np.asarray(x[1:]) - x[0]
    return math.sqrt(abs(np.linalg.det(e @ e.T))) / math.factorial(len(e))


# -- contents ---------------------------------------------------------------


def test_segment_and_triangle_contents():
    assert content([[0, 0], [1, 0]]) == pytest.approx(1.0, abs=1e-15)
    assert content([[0, 0], [1, 0], [0, 1]]) == pytest.approx(0.5, abs=1e-15)


def test_point_content_is_one():
    assert content([[0.3, 0.4]]) == 1.0


def test_regular_tetrahedron_content():
    x = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / (2 * math.sqrt(2))
    expected = abs(np.linalg.det(x[:3] - x[3])) / 6
    assert content(x) == pytest.approx(expected, rel=1e-12)
    assert content(x) == pytest.approx(0.11785113019775792, rel=1e-12)


def test_distortion_factor_examples():
    tri = np.array([[0, 0], [1, 0], [0, 1.0]])
    assert distortion_factor(tri) == pytest.approx(1.0, rel=1e-12)
    assert distortion_factor(2 * tri) == pytest.approx(4.0, rel=1e-12)
    tet = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1.0]])
    assert distortion_factor(tet) == pytest.approx(1.0, rel=1e-12)


def test_signed_distortion_examples():
    assert signed_distortion(np.eye(3)) == pytest.approx(1.0)
    assert signed_distortion(np.eye(3)[[1, 0, 2]]) == pytest.approx(-1.0)


def test_collinear_round_off_clamps_to_zero():
    x = np.array([[[0.0, 0.0], [1.0, 1.0 / 3.0], [3.0, 1.0]]])
    assert 0.0 <= contents(x)[0] < 1e-6


def test_degenerate_elements_counted():
    m = WeightedSimplexMesh(np.array([[0, 0], [1, 0], [2, 0], [0, 1.0]]), [[0, 1, 2], [0, 1, 3]], None, 2)
    assert count_degenerate(m) == 1


@given(st.integers(1, 3), st.integers(0, 10_000))
def test_content_matches_gram_and_permutations(j, seed):
    rng = np.random.default_rng(seed)
    x = random_simplex(rng, j, 3)
    c = content(x)
    assert c == pytest.approx(gram_content(x), rel=1e-9)
    perm = rng.permutation(j + 1)
    assert content(x[perm]) == pytest.approx(c, rel=1e-10)
    assert distortion_factor(x) == pytest.approx(math.factorial(j) * c, rel=1e-12)


@given(st.integers(1, 3), st.integers(0, 10_000))
def test_content_rigid_motion_invariance(j, seed):
    rng = np.random.default_rng(seed)
    x = random_simplex(rng, j, 3)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    moved = x @ q.T + rng.normal(size=3)
    assert content(moved) == pytest.approx(content(x), rel=1e-10)


@given(st.integers(2, 3), st.integers(0, 10_000), st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_signed_distortion_multilinear_and_abs(d, seed, c):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, (d, d))
    s = signed_distortion(x)
    y = x.copy()
    y[0] *= c
    assert signed_distortion(y) == pytest.approx(c * s, rel=1e-10, abs=1e-14)
    aux = np.vstack([np.zeros(d), x])
    assert abs(s) == pytest.approx(distortion_factor(aux), rel=1e-8, abs=1e-12)


# -- normalization ----------------------------------------------------------


def test_normalize_bbox_and_affine():
    m = WeightedSimplexMesh(np.array([[-1, -1, -1], [1, 1, 1.0], [1, -1, 0]]), [[0, 1, 2]], None, 2)
    n, aff = normalize_to_unit_cell(m, 0.125)
    assert np.allclose(n.vertices.min(axis=0), 0.125)
    assert np.allclose(n.vertices.max(axis=0), 0.875)
    assert np.allclose(aff.invert(n.vertices), m.vertices)


def test_normalize_identity_and_point():
    m = WeightedSimplexMesh(np.array([[0, 0], [1, 0], [0, 1.0]]), [[0, 1, 2]], None, 2)
    n, aff = normalize_to_unit_cell(m, 0.0)
    assert aff == AffineMap.identity(2)
    p = WeightedSimplexMesh(np.array([[5, 5, 5.0]]), [[0]], None, 0)
    n, _ = normalize_to_unit_cell(p)
    assert np.allclose(n.vertices, 0.5)


def test_normalize_zero_extent():
    pts = WeightedSimplexMesh(np.array([[1, 1.0], [1, 1.0]]), [[0], [1]], None, 0)
    assert normalize_to_unit_cell(pts)[0].vertices.tolist() == [[0.5, 0.5], [0.5, 0.5]]
    lines = WeightedSimplexMesh(np.array([[1, 1.0], [1, 1.0]]), np.zeros((0, 2), int), None, 1)
    with pytest.raises(DegenerateBoundsError):
        normalize_to_unit_cell(lines)


# -- validation -------------------------------------------------------------


def test_invariants_enforced():
    with pytest.raises(MeshFormatError):
        WeightedSimplexMesh(np.zeros((3, 2)), [[0, 0, 1]], None, 2)
    with pytest.raises(MeshFormatError):
        WeightedSimplexMesh(np.zeros((3, 2)), [[0, 1, 5]], None, 2)
    with pytest.raises(MeshFormatError):
        WeightedSimplexMesh(np.zeros((4, 2)), [[0, 1, 2, 3]], None, 3)
    with pytest.raises(MeshFormatError):
        WeightedSimplexMesh(np.zeros((3, 2)), [[0, 1, 2]], [1.0, 2.0], 2)
    with pytest.raises(MeshFormatError):
        WeightedSimplexMesh(np.zeros((3, 2)), [[0, 1, 2]], [np.nan], 2)


def test_square_loop_valid_and_reversed():
    b = validate_boundary(shapes.square_loop(1.0))
    assert b.signed_measure == pytest.approx(1.0)
    r = check_boundary(shapes.square_loop(1.0, ccw=False))
    assert not r.valid
    assert r.signed_measure == pytest.approx(-1.0)
    assert r.defects[0]["kind"] == "inward_orientation"


def test_cube_with_flipped_triangle_reports_that_element():
    m = shapes.cube_surface()
    e = m.elements.copy()
    e[5] = e[5, ::-1]
    r = check_boundary(WeightedSimplexMesh(m.vertices, e, None, 2))
    assert not r.valid
    kinds = {d["kind"]: d["elements"] for d in r.defects}
    assert kinds["inconsistent_orientation"] == [5]
    assert json.loads(r.to_json())["valid"] is False
    with pytest.raises(BoundaryDefectError):
        validate_boundary(WeightedSimplexMesh(m.vertices, e, None, 2))


def test_open_surface_is_non_manifold():
    m = shapes.cube_surface()
    r = check_boundary(WeightedSimplexMesh(m.vertices, m.elements[:-1], None, 2))
    assert r.defects[0]["kind"] == "non_manifold"


def test_shapes_enclose_expected_measure():
    assert validate_boundary(shapes.cube_surface()).signed_measure == pytest.approx(1.0)
    assert validate_boundary(shapes.l_shape_loop()).signed_measure == pytest.approx(0.75)
    assert contents(shapes.cube_solid().simplices()).sum() == pytest.approx(1.0)


# -- files ------------------------------------------------------------------


def test_load_off_cube(tmp_path):
    p = tmp_path / "cube.off"
    save_mesh(shapes.cube_surface(), p)
    m = load_mesh(p)
    assert (m.dimension, m.degree, len(m)) == (3, 2, 12)


def test_load_xyz_density(tmp_path):
    p = tmp_path / "p.xyz"
    p.write_text("0 0 0 2.5\n")
    m = load_mesh(p)
    assert m.degree == 0 and len(m) == 1 and m.densities[0] == 2.5


def test_obj_quad_fan(tmp_path):
    p = tmp_path / "q.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    m = load_mesh(p)
    assert m.elements.tolist() == [[0, 1, 2], [0, 2, 3]]
    assert load_mesh(p, dimension=2).dimension == 2


def test_obj_mixed_degrees_rejected(tmp_path):
    p = tmp_path / "mix.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nl 1 2\nf 1 2 3\n")
    with pytest.raises(MeshFormatError):
        load_mesh(p)


def test_malformed_files_rejected(tmp_path):
    p = tmp_path / "bad.off"
    p.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 9\n")
    with pytest.raises(MeshFormatError):
        load_mesh(p)
    q = tmp_path / "bad.xyz"
    q.write_text("0 0 zero\n")
    with pytest.raises(MeshFormatError):
        load_mesh(q)


def test_json_round_trip(tmp_path):
    m = WeightedSimplexMesh(np.array([[0, 0], [1, 0], [0, 1.0]]), [[0, 1], [1, 2]], [2.0, 3.0], 1)
    p = tmp_path / "m.json"
    save_mesh(m, p)
    back = load_mesh(p)
    assert np.array_equal(back.vertices, m.vertices)
    assert np.array_equal(back.densities, m.densities)
    assert back.degree == 1


def test_skeleton():
    edges = shapes.cube_surface().skeleton(1)
    assert len(edges) == 18
    assert len(shapes.cube_surface().skeleton(0)) == 8
