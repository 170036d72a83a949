import math

import numpy as np
import pytest

from simplexft import shapes
from simplexft.mesh import validate_boundary
from simplexft.oracle import (
    QuadratureSpec,
    kuhn_subdivision,
    quad_polytope_ft,
    quad_simplex_ft,
    quad_simplex_ft_many,
    richardson_ratio,
)

from conftest import random_simplex

# exact integral of exp(-i k.x) over the L-shape (unit square minus upper-right quadrant), k = (2pi, 2pi)
L_SHAPE_2PI = 0.10132118364233777144

TRI = np.array([[0.1, 0.2], [0.7, 0.3], [0.25, 0.8]])
TRI_AREA = 0.5 * abs(0.6 * 0.6 - 0.1 * 0.15)


@pytest.mark.parametrize("j,K", [(1, 4), (2, 3), (3, 2)])
def test_kuhn_pieces_tile_the_simplex(j, K):
    lam = kuhn_subdivision(j, K)
    assert lam.shape == (K**j, j + 1, j + 1)
    assert np.allclose(lam.sum(axis=-1), 1.0)
    assert np.all(lam >= -1e-15)
    # equal volume in barycentric space
    vols = [abs(np.linalg.det(p[1:, 1:] - p[0, 1:])) if j else 1.0 for p in lam]
    assert np.allclose(vols, vols[0])
    assert np.isclose(vols[0] * K**j, 1.0)


@pytest.mark.parametrize("method", ["stratified-monte-carlo", "recursive-subdivision-midpoint"])
def test_zero_frequency_gives_content(method):
    r = quad_simplex_ft(TRI, [0.0, 0.0], QuadratureSpec(method, 10_000, depth=3))
    assert r.value == pytest.approx(TRI_AREA, abs=1e-14)
    assert r.error == pytest.approx(0.0, abs=1e-14)


def test_full_period_segment_vanishes():
    seg = np.array([[0.0, 0.3], [1.0, 0.3]])
    r = quad_simplex_ft(seg, [2 * np.pi, 0.0], QuadratureSpec("recursive-subdivision-midpoint", depth=6))
    assert abs(r.value) < 1e-12
    mc = quad_simplex_ft(seg, [2 * np.pi, 0.0], QuadratureSpec(samples=100_000))
    assert abs(mc.value) < 4 * mc.error


def test_point_is_a_single_phase():
    r = quad_simplex_ft([[0.25, 0.5]], [np.pi, 2 * np.pi], QuadratureSpec())
    assert r.value == pytest.approx(np.exp(-1j * (np.pi / 4 + np.pi)), abs=1e-15)


def test_standard_error_scales_as_inverse_root_n():
    k = [[9.0, -4.0]]
    e = [quad_simplex_ft_many(TRI, k, QuadratureSpec(samples=n, seed=1))[1][0] for n in (4_096, 65_536)]
    # stratification only helps, so the ratio is at least the iid rate
    assert e[0] / e[1] >= 4.0 * 0.7


def test_monte_carlo_error_covers_the_truth():
    # the oracle's own midpoint rule at depth 9 is a tight reference
    k = [[7.0, 3.0]]
    ref = quad_simplex_ft(TRI, k[0], QuadratureSpec("recursive-subdivision-midpoint", depth=9))
    z = []
    for seed in range(10):
        v, e, _ = quad_simplex_ft_many(TRI, k, QuadratureSpec(samples=20_000, seed=seed))
        z.append(abs(v[0] - ref.value) / e[0])
    assert np.median(z) < 2.0
    assert ref.error < 1e-6


@pytest.mark.parametrize("j", [1, 2, 3])
def test_midpoint_rule_is_second_order(j):
    x = random_simplex(np.random.default_rng(j), j, 3)
    ratio = richardson_ratio(x, [5.0, -3.0, 4.0], depth=5 if j < 3 else 4)
    assert 3.5 <= ratio <= 4.5


def test_reproducible_with_seed():
    a = quad_simplex_ft(TRI, [3.0, 1.0], QuadratureSpec(samples=5_000, seed=7))
    b = quad_simplex_ft(TRI, [3.0, 1.0], QuadratureSpec(samples=5_000, seed=7))
    assert a == b


def test_integer_mode_path_matches_general_path():
    modes = np.array([[1, -2], [3, 0], [-4, 5]]) * 2 * np.pi
    spec = QuadratureSpec(samples=8_192, seed=3)
    fast, _, _ = quad_simplex_ft_many(TRI, modes, spec)
    slow, _, _ = quad_simplex_ft_many(TRI, modes * (1 + 1e-15) + 1e-10, spec)
    assert np.allclose(fast, slow, atol=1e-9)


def test_polytope_cube():
    cube = validate_boundary(shapes.cube_surface(1.0))
    spec = QuadratureSpec(samples=20_000, seed=0)
    r0 = quad_polytope_ft(cube, [0.0, 0.0, 0.0], spec)
    assert r0.value == pytest.approx(1.0, abs=1e-12)
    r1 = quad_polytope_ft(cube, [2 * np.pi, 0.0, 0.0], spec)
    assert abs(r1.value) < 4 * r1.error


def test_polytope_l_shape_against_exact_value():
    b = validate_boundary(shapes.l_shape_loop())
    r = quad_polytope_ft(b, [2 * np.pi, 2 * np.pi], QuadratureSpec(samples=400_000, seed=2))
    assert abs(r.value - L_SHAPE_2PI) < 4 * r.error
    assert r.error < 2e-3


def test_invalid_specs():
    with pytest.raises(ValueError):
        QuadratureSpec(method="gauss")
    with pytest.raises(ValueError):
        QuadratureSpec(samples=0)
    with pytest.raises(ValueError):
        quad_polytope_ft(validate_boundary(shapes.l_shape_loop()), [1.0, 1.0],
                         QuadratureSpec("recursive-subdivision-midpoint"))
    with pytest.raises(ValueError):
        quad_simplex_ft(np.zeros((5, 4)), np.zeros(4))
