import numpy as np
import pytest

from simplexft import shapes
from simplexft.baselines import (
    cell_centers,
    polygonize_raster,
    rasterize_binary,
    rasterize_distance,
    read_pgm,
    upsample_linear,
    write_pgm,
)
from simplexft.contour import component_measures
from simplexft.mesh import WeightedSimplexMesh, validate_boundary
from simplexft.spectral import ScalarField


def square(side=0.5, center=(0.5, 0.5)):
    return validate_boundary(shapes.square_loop(side, center))


def test_point_marks_its_cell():
    m = WeightedSimplexMesh(np.array([[0.53, 0.27]]), [[0]], None, 0)
    f = rasterize_binary(m, 10)
    assert f.values.sum() == 1
    assert f.values[5, 2] == 1
    assert f.meta["fill"] == "touch"


def test_point_on_shared_corner_marks_all_neighbours():
    m = WeightedSimplexMesh(np.array([[0.5, 0.5]]), [[0]], None, 0)
    assert rasterize_binary(m, 8).values.sum() == 4


def test_square_fills_exact_cell_count():
    f = rasterize_binary(square(), 16)
    assert f.values.sum() == 64
    assert f.meta["fill"] == "parity"
    assert f.provenance == "binary"


def test_square_boundary_touch_rule():
    f = rasterize_binary(square(), 16, solid=False)
    # edges lie on cell walls, so both neighbouring rings are marked
    assert f.values.sum() == 10**2 - 6**2
    assert f.values[8, 8] == 0
    assert f.values[4, 8] == 1 and f.values[3, 8] == 1


def test_triangle_touch_matches_dense_sampling():
    tri = WeightedSimplexMesh(np.array([[0.12, 0.21], [0.83, 0.33], [0.4, 0.77]]), [[0, 1, 2]], None, 2)
    n = 24
    f = rasterize_binary(tri, n).values.astype(bool)
    rng = np.random.default_rng(3)
    lam = rng.dirichlet(np.ones(3), 200_000)
    pts = lam @ tri.vertices
    hit = np.zeros((n, n), dtype=bool)
    hit[tuple(np.minimum((pts * n).astype(int), n - 1).T)] = True
    # every sampled cell is marked; marked cells only differ by boundary slivers
    assert np.all(f[hit])
    assert np.sum(f & ~hit) <= 4 * n


def test_cube_surface_touch_count():
    cube = validate_boundary(shapes.cube_surface(0.5, (0.25, 0.25, 0.25)))
    f = rasterize_binary(cube, 16, solid=False)
    # faces lie on cell walls: shells 4..11 closed plus one cell each side
    assert f.values.sum() == 10**3 - 6**3


def test_distance_to_point_is_euclidean():
    p = np.array([0.31, 0.74])
    m = WeightedSimplexMesh(p[None], [[0]], None, 0)
    f = rasterize_distance(m, 12)
    c = cell_centers((12, 12)).reshape(12, 12, 2)
    assert np.allclose(f.values, np.linalg.norm(c - p, axis=-1), atol=1e-14)


def test_signed_distance_of_square():
    f = rasterize_distance(square(), 16, signed=True)
    c = cell_centers((16, 16)).reshape(16, 16, 2)
    inside = np.all(np.abs(c - 0.5) < 0.25, axis=-1)
    assert np.all(f.values[inside] < 0) and np.all(f.values[~inside] > 0)
    # the closest centers to the square's center are 1/32 off-axis
    assert f.values[7, 7] == pytest.approx(-(0.25 - 1 / 32), abs=1e-14)
    with pytest.raises(ValueError):
        rasterize_distance(shapes.square_loop(0.5), 8, signed=True)


def test_distance_field_is_lipschitz():
    b = validate_boundary(shapes.random_convex_polygon(np.random.default_rng(0)))
    n = 32
    f = rasterize_distance(b, n, signed=True).values
    h = 1.0 / n
    assert np.max(np.abs(np.diff(f, axis=0))) <= h + 1e-12
    assert np.max(np.abs(np.diff(f, axis=1))) <= h + 1e-12


def test_binary_volume_converges():
    b = validate_boundary(shapes.random_convex_polygon(np.random.default_rng(5)))
    area = abs(b.signed_measure)
    errs = [abs(rasterize_binary(b, n).values.mean() - area) for n in (16, 64, 256)]
    assert errs[2] < errs[0]
    assert errs[2] < 2e-3


def test_linear_upsample_keeps_constants_and_bounds():
    f = ScalarField(np.full((5, 5), 0.7))
    g = upsample_linear(f, 4)
    assert g.resolution == (20, 20)
    assert np.allclose(g.values, 0.7)
    h = upsample_linear(rasterize_binary(square(), 8), 4)
    assert h.values.min() >= 0.0 and h.values.max() <= 1.0


def test_polygonize_constant_field_is_empty():
    with pytest.warns(UserWarning):
        b = polygonize_raster(ScalarField(np.zeros((8, 8))), 4)
    assert len(b) == 0


def test_polygonize_disk_area():
    c = cell_centers((64, 64)).reshape(64, 64, 2)
    disk = (np.linalg.norm(c - 0.5, axis=-1) < 0.3).astype(float)
    b = polygonize_raster(ScalarField(disk, "binary"), 4)
    assert b.signed_measure == pytest.approx(np.pi * 0.09, rel=0.05)


def test_polygonize_two_blobs_give_two_loops():
    c = cell_centers((32, 32)).reshape(32, 32, 2)
    img = (np.linalg.norm(c - [0.25, 0.3], axis=-1) < 0.12) | (np.linalg.norm(c - [0.7, 0.7], axis=-1) < 0.15)
    b = polygonize_raster(ScalarField(img.astype(float), "binary"), 2)
    labels, measures = component_measures(b)
    assert len(measures) == 2
    assert np.all(measures > 0)


def test_pgm_round_trip_and_orientation(tmp_path):
    vals = np.zeros((6, 4))
    vals[1, 3] = 1.0  # x = 1, top row
    p = tmp_path / "img.pgm"
    write_pgm(ScalarField(vals, "binary"), p)
    raw = p.read_bytes()
    assert raw.startswith(b"P5\n6 4\n255\n")
    pix = np.frombuffer(raw[len(b"P5\n6 4\n255\n"):], dtype=np.uint8).reshape(4, 6)
    assert pix[0, 1] == 255
    back = read_pgm(p)
    assert np.array_equal(back.values, vals)


def test_pgm_header_comments_and_errors(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# made by hand\n2 2\n255\n" + bytes([0, 255, 255, 0]))
    f = read_pgm(p)
    assert f.values.shape == (2, 2)
    assert f.values[0, 1] == 0.0 and f.values[1, 1] == 1.0
    p.write_bytes(b"P2\n2 2\n255\n0 0 0 0")
    with pytest.raises(ValueError):
        read_pgm(p)
    p.write_bytes(b"P5\n2 2\n255\n\0")
    with pytest.raises(ValueError):
        read_pgm(p)
