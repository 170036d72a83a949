import warnings

import numpy as np
import pytest

from simplexft import shapes
from simplexft.baselines import cell_centers, rasterize_distance
from simplexft.contour import drop_small_components, extract_contour, marching_squares
from simplexft.mesh import check_boundary, validate_boundary
from simplexft.nuft import KGridSpec, auxnode_ft
from simplexft.recon import SweepConfig, cell_seed, fidelity_sweep, iou
from simplexft.spectral import ScalarField, inverse_transform, upsample


def square(side=0.5, center=(0.5, 0.5)):
    return validate_boundary(shapes.square_loop(side, center))


def test_contour_of_signed_distance_square():
    sdf = rasterize_distance(square(), 64, signed=True)
    b = extract_contour(ScalarField(-sdf.values, "distance"), 0.0)
    assert b.signed_measure == pytest.approx(0.25, rel=1e-3)
    assert check_boundary(b.mesh).valid


def test_constant_field_gives_empty_contour():
    with pytest.warns(UserWarning):
        b = extract_contour(ScalarField(np.zeros((6, 6, 6))), 0.5)
    assert len(b) == 0 and b.dimension == 3


def test_saddle_cells_produce_closed_loops():
    rng = np.random.default_rng(2)
    v = rng.random((20, 20))
    pts, seg = marching_squares(v, 0.5)
    # every vertex has exactly one incoming and one outgoing segment
    assert np.array_equal(np.bincount(seg[:, 0], minlength=len(pts)), np.bincount(seg[:, 1], minlength=len(pts)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        b = extract_contour(ScalarField(v), 0.5)
    assert check_boundary(b.mesh).valid


def test_nuft_square_area():
    spec = auxnode_ft(square(), KGridSpec((32, 32)))
    b = extract_contour(inverse_transform(upsample(spec, (128, 128))), 0.5)
    assert b.signed_measure == pytest.approx(0.25, rel=0.01)


def test_nuft_cube_contour_is_closed_and_outward():
    cube = validate_boundary(shapes.cube_surface(0.5, (0.25, 0.25, 0.25)))
    spec = auxnode_ft(cube, KGridSpec((16, 16, 16)))
    b = extract_contour(inverse_transform(upsample(spec, (32, 32, 32))), 0.5)
    assert check_boundary(b.mesh).valid
    assert b.signed_measure == pytest.approx(0.125, rel=0.05)


def test_component_filter_drops_specks():
    c = cell_centers((64, 64)).reshape(64, 64, 2)
    big = np.linalg.norm(c - 0.5, axis=-1) < 0.3
    speck = np.zeros_like(big)
    speck[5, 5] = True
    v = (big | speck).astype(float)
    b = extract_contour(ScalarField(v), 0.5)
    kept, dropped = drop_small_components(b, 1e-3)
    assert dropped == 1
    assert kept.signed_measure == pytest.approx(b.signed_measure - 0.5 / 64**2, rel=1e-9)
    same, none = drop_small_components(kept, 1e-3)
    assert none == 0 and same is kept


def test_iou_identity_and_disjoint():
    a = square(0.3, (0.3, 0.3))
    assert iou(a, a, 10_000).iou == 1.0
    assert iou(a, a, 10_000).rel_error == 0.0
    far = square(0.3, (0.75, 0.75))
    r = iou(a, far, 10_000)
    assert r.iou == 0.0 and r.rel_error == pytest.approx(2.0, rel=0.05)


def test_iou_empty_reconstruction():
    from simplexft.mesh import BoundaryMesh

    r = iou(square(), BoundaryMesh.empty(2), 10_000)
    assert r.iou == 0.0
    assert r.rel_error == pytest.approx(1.0, rel=0.02)


def test_iou_shifted_square_and_symmetry():
    a = square(0.5, (0.5, 0.5))
    b = square(0.5, (0.5 + 0.25, 0.5))
    ab = iou(a, b, 200_000, seed=4)
    ba = iou(b, a, 200_000, seed=4)
    # overlap 1/2 of each, union 3/2
    assert abs(ab.iou - 1 / 3) < 4 * ab.stderr + 1e-3
    assert ab.iou == ba.iou


def test_iou_3d_cubes():
    a = validate_boundary(shapes.cube_surface(0.5, (0.1, 0.1, 0.1)))
    b = validate_boundary(shapes.cube_surface(0.5, (0.35, 0.1, 0.1)))
    r = iou(a, b, 100_000)
    assert abs(r.iou - 1 / 3) < 5 * r.stderr + 2e-3


def test_cell_seed_depends_only_on_cell():
    assert cell_seed(0, "nuft", 16) == cell_seed(0, "nuft", 16)
    assert len({cell_seed(0, r, n) for r in ("nuft", "binary") for n in (8, 16)}) == 4


def test_sweep_rows_and_trend():
    poly = validate_boundary(shapes.random_convex_polygon(np.random.default_rng(1)))
    cfg = SweepConfig(samples=40_000, workers=1)
    rep = fidelity_sweep(poly, [4, 16, 64], ("nuft", "binary", "distance"), cfg)
    assert len(rep.rows) == 9
    assert rep.row("binary", 4).iou < 1.0
    for r in ("nuft", "binary", "distance"):
        assert rep.row(r, 64).iou > rep.row(r, 4).iou
    lines = rep.to_csv().splitlines()
    assert lines[0] == "rep,resolution,iou,rel_error,stderr,samples,seed"
    assert len(lines) == 10


def test_sweep_csv_independent_of_workers():
    poly = validate_boundary(shapes.l_shape_loop(0.6, (0.2, 0.2)))
    a = fidelity_sweep(poly, [8, 16], config=SweepConfig(samples=10_000, workers=1)).to_csv()
    b = fidelity_sweep(poly, [8, 16], config=SweepConfig(samples=10_000, workers=4)).to_csv()
    assert a == b


def test_sweep_rejects_unknown_representation():
    with pytest.raises(ValueError):
        fidelity_sweep(square(), [8], ("voxels",))
