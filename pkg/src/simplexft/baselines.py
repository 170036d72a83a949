"""Grid baselines: binary occupancy, distance rasters and raster polygonization."""

from __future__ import annotations

import warnings
from pathlib import Path

import numpy as np
import scipy.ndimage

from .contour import extract_contour
from .geometry import points_inside, simplex_box_overlap, unsigned_distance
from .mesh import BoundaryMesh, WeightedSimplexMesh
from .spectral import ScalarField

PAIR_CHUNK = 200_000


def _resolution(res, d):
    return tuple(int(n) for n in np.broadcast_to(res, (d,)))


def cell_centers(resolution) -> np.ndarray:
    axes = [(np.arange(n) + 0.5) / n for n in resolution]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(resolution))


def _touch_any(mesh: WeightedSimplexMesh, res) -> np.ndarray:
    """Cells (closed boxes) that share at least one point with any element."""
    d = len(res)
    n = np.array(res)
    x = mesh.simplices()
    occ = np.zeros(res, dtype=bool)
    if len(x) == 0:
        return occ
    # cell i spans [i/n, (i+1)/n]; it touches [lo, hi] iff lo*n - 1 <= i <= hi*n
    first = np.maximum(np.ceil(x.min(axis=1) * n - 1.0), 0).astype(np.int64)
    last = np.minimum(np.floor(x.max(axis=1) * n), n - 1).astype(np.int64)
    span = np.maximum(last - first + 1, 0)
    count = np.prod(span, axis=1)
    elems = np.flatnonzero(count > 0)
    start = 0
    while start < len(elems):
        # chunk so the expanded (element, cell) pair list stays bounded
        csum = np.cumsum(count[elems[start:]])
        stop = start + max(1, int(np.searchsorted(csum, PAIR_CHUNK, side="right")))
        chunk = elems[start:stop]
        start = stop
        ei = np.repeat(chunk, count[chunk])
        local = np.arange(len(ei)) - np.repeat(np.cumsum(count[chunk]) - count[chunk], count[chunk])
        cell = np.empty((len(ei), d), dtype=np.int64)
        rem = local
        for a in range(d - 1, -1, -1):
            rem, r = np.divmod(rem, span[ei, a])
            cell[:, a] = first[ei, a] + r
        hit = simplex_box_overlap(x[ei], cell / n, (cell + 1) / n)
        occ[tuple(cell[hit].T)] = True
    return occ


def rasterize_binary(shape, resolution, seed: int = 0, solid: bool | None = None) -> ScalarField:
    """Binary occupancy at cell centers of the unit cell.

    A closed boundary (``BoundaryMesh``) is filled by the parity test at each
    cell center. Any other mesh marks every cell whose closed box touches an
    element. ``solid=False`` forces the touch rule for a boundary.
    """
    if isinstance(shape, BoundaryMesh) and solid is not False:
        d = shape.mesh.dimension
        res = _resolution(resolution, d)
        inside = points_inside(shape, cell_centers(res), seed=seed).reshape(res)
        mode = "parity"
    else:
        mesh = shape.mesh if isinstance(shape, BoundaryMesh) else shape
        res = _resolution(resolution, mesh.dimension)
        inside = _touch_any(mesh, res)
        mode = "touch"
    return ScalarField(inside.astype(np.float64), "binary", meta={"fill": mode})


def rasterize_distance(shape, resolution, signed: bool = False, seed: int = 0) -> ScalarField:
    """Distance from each cell center to the nearest element; negative inside if signed."""
    mesh = shape.mesh if isinstance(shape, BoundaryMesh) else shape
    res = _resolution(resolution, mesh.dimension)
    pts = cell_centers(res)
    dist = unsigned_distance(mesh, pts)
    if signed:
        if not isinstance(shape, BoundaryMesh):
            raise ValueError("a signed distance needs a closed boundary")
        dist = np.where(points_inside(shape, pts, seed=seed), -dist, dist)
    return ScalarField(dist.reshape(res), "distance", meta={"signed": bool(signed)})


def upsample_linear(field: ScalarField, factor: int = 4) -> ScalarField:
    """Multilinear resampling onto a grid ``factor`` times finer (cell-center aligned)."""
    if factor == 1:
        return field
    vals = scipy.ndimage.zoom(field.values, factor, order=1, mode="nearest", grid_mode=True)
    meta = dict(field.meta)
    meta["upsampled_from"] = list(field.resolution)
    return ScalarField(vals, field.provenance, field.affine, meta)


def polygonize_raster(field: ScalarField, upsample: int = 4, iso: float = 0.5) -> BoundaryMesh:
    """Bilinear upsampling followed by marching squares/cubes at ``iso``."""
    fine = upsample_linear(field, upsample)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        boundary = extract_contour(fine, iso)
    for w in caught:
        warnings.warn(str(w.message), w.category, stacklevel=2)
    return boundary


def read_pgm(path) -> ScalarField:
    """Read a binary (P5) 8-bit PGM into a [0, 1] field; image row 0 is the top (largest y)."""
    raw = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        tokens.append(raw[start:pos])
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: only binary P5 PGM is supported")
    w, h, maxval = (int(t) for t in tokens[1:])
    if not 0 < maxval < 256:
        raise ValueError(f"{path}: only 8-bit PGM is supported")
    pos += 1  # single whitespace after maxval
    data = np.frombuffer(raw[pos : pos + w * h], dtype=np.uint8)
    if data.size != w * h:
        raise ValueError(f"{path}: pixel data truncated")
    img = data.reshape(h, w).astype(np.float64) / maxval
    # field[x, y] with y growing upward
    return ScalarField(img[::-1].T.copy(), "binary", meta={"source": "pgm"})


def write_pgm(field: ScalarField, path) -> None:
    vals = np.clip(np.rint(field.values * 255.0), 0, 255).astype(np.uint8)
    img = vals.T[::-1]
    h, w = img.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode() + img.tobytes())
