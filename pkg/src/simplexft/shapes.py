"""Reference shapes: squares, cubes, L-polygons, convex polygons and a bumpy sphere."""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull

from .mesh import WeightedSimplexMesh, validate_boundary

CUBE_VERTICES = np.array(
    [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]],
    dtype=np.float64,
)

# outward under the right-hand rule
CUBE_FACES = np.array(
    [
        [0, 3, 2], [0, 2, 1],  # z = 0
        [4, 5, 6], [4, 6, 7],  # z = 1
        [0, 1, 5], [0, 5, 4],  # y = 0
        [3, 7, 6], [3, 6, 2],  # y = 1
        [0, 4, 7], [0, 7, 3],  # x = 0
        [1, 2, 6], [1, 6, 5],  # x = 1
    ]
)

# Kuhn triangulation along the main diagonal 0 -> 6
CUBE_TETS = np.array(
    [[0, 1, 2, 6], [0, 2, 3, 6], [0, 3, 7, 6], [0, 7, 4, 6], [0, 4, 5, 6], [0, 5, 1, 6]]
)


def polygon_loop(points) -> WeightedSimplexMesh:
    """Closed segment loop through ``points`` in the given order."""
    p = np.asarray(points, dtype=np.float64)
    n = len(p)
    e = np.column_stack([np.arange(n), (np.arange(n) + 1) % n])
    return WeightedSimplexMesh(p, e, None, 1)


def square_loop(side=1.0, center=(0.5, 0.5), ccw=True):
    c = np.asarray(center, dtype=np.float64)
    h = 0.5 * side
    pts = c + np.array([[-h, -h], [h, -h], [h, h], [-h, h]])
    return polygon_loop(pts if ccw else pts[::-1])


def square_triangles(side=1.0, center=(0.5, 0.5)) -> WeightedSimplexMesh:
    c = np.asarray(center, dtype=np.float64)
    h = 0.5 * side
    pts = c + np.array([[-h, -h], [h, -h], [h, h], [-h, h]])
    return WeightedSimplexMesh(pts, [[0, 1, 2], [0, 2, 3]], None, 2)


def l_shape_loop(side=1.0, origin=(0.0, 0.0)):
    """Unit square minus its upper-right quadrant (area 0.75 * side**2)."""
    o = np.asarray(origin, dtype=np.float64)
    pts = np.array([[0, 0], [1, 0], [1, 0.5], [0.5, 0.5], [0.5, 1], [0, 1]]) * side + o
    return polygon_loop(pts)


def cube_surface(side=1.0, origin=(0.0, 0.0, 0.0)) -> WeightedSimplexMesh:
    v = CUBE_VERTICES * side + np.asarray(origin, dtype=np.float64)
    return WeightedSimplexMesh(v, CUBE_FACES, None, 2)


def cube_solid(side=1.0, origin=(0.0, 0.0, 0.0)) -> WeightedSimplexMesh:
    v = CUBE_VERTICES * side + np.asarray(origin, dtype=np.float64)
    return WeightedSimplexMesh(v, CUBE_TETS, None, 3)


def random_convex_polygon(rng, n_points=12, center=(0.5, 0.5), radius=0.3):
    """CCW loop on the convex hull of random points in a disk."""
    r = radius * np.sqrt(rng.uniform(0.05, 1.0, n_points))
    t = rng.uniform(0, 2 * np.pi, n_points)
    pts = np.asarray(center) + np.column_stack([r * np.cos(t), r * np.sin(t)])
    hull = ConvexHull(pts)
    # scipy returns 2D hull vertices counter-clockwise
    return polygon_loop(pts[hull.vertices])


def icosphere(subdivisions=3):
    """Unit icosphere; 20 * 4**subdivisions outward faces."""
    t = (1.0 + 5**0.5) / 2.0
    v = [
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ]
    f = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    verts = [np.array(p, dtype=np.float64) / np.linalg.norm(p) for p in v]
    faces = f
    for _ in range(subdivisions):
        cache = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = new
    return np.array(verts), np.array(faces)


def bumpy_sphere(seed=0, subdivisions=3, amplitude=0.25, n_bumps=6):
    """Genus-0 star-shaped blob; 1280 faces at the default subdivision level."""
    rng = np.random.default_rng(seed)
    v, f = icosphere(subdivisions)
    dirs = rng.normal(size=(n_bumps, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    weights = rng.uniform(-1.0, 1.0, n_bumps)
    sharp = rng.uniform(2.0, 6.0, n_bumps)
    r = 1.0 + amplitude * np.sum(weights * np.exp(sharp * (v @ dirs.T - 1.0)), axis=1)
    mesh = WeightedSimplexMesh(v * r[:, None], f, None, 2)
    return validate_boundary(mesh)
