"""Iso-contour extraction: marching squares (2D) and marching cubes (3D)."""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .mesh import BoundaryMesh, WeightedSimplexMesh, signed_distortions

# edges of a square cell, walked counter-clockwise from corner 0 = (i, j):
# edge k joins corner k to corner k+1; corners (i,j) (i+1,j) (i+1,j+1) (i,j+1)


def _square_table():
    table = {}
    for code in range(16):
        inside = [(code >> k) & 1 for k in range(4)]
        cross = []
        for k in range(4):
            a, b = inside[k], inside[(k + 1) % 4]
            if a and not b:
                cross.append((k, "exit"))
            elif b and not a:
                cross.append((k, "entry"))
        for center in (False, True):
            segs = []
            n = len(cross)
            for p, (edge, kind) in enumerate(cross):
                if kind != "exit":
                    continue
                # joined saddle: cut off the outside corner ahead; else the inside corner behind
                q = (p + 1) % n if center else (p - 1) % n
                segs.append((edge, cross[q][0]))
            table[code, center] = segs
    return table


_SQUARE = _square_table()


def marching_squares(values, iso=0.5):
    """Closed, counter-clockwise loops around the region ``values > iso``.

    Returns vertices in cell-index coordinates and (from, to) segments. The
    field is padded with a low border so every loop closes; saddle cells are
    resolved with the asymptotic decider.
    """
    f = np.asarray(values, dtype=np.float64)
    low = min(float(f.min()), iso) - 1.0
    f = np.pad(f, 1, constant_values=low)
    nx, ny = f.shape
    ins = f > iso
    code = (
        ins[:-1, :-1].astype(np.int64)
        | (ins[1:, :-1] << 1)
        | (ins[1:, 1:] << 2)
        | (ins[:-1, 1:] << 3)
    )
    f0, f1, f2, f3 = f[:-1, :-1], f[1:, :-1], f[1:, 1:], f[:-1, 1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        saddle = (f0 * f2 - f1 * f3) / (f0 + f2 - f1 - f3)
    center = np.nan_to_num(saddle, nan=0.25 * (f0 + f1 + f2 + f3)) > iso

    n_h = (nx - 1) * ny
    ii, jj = np.indices(code.shape)
    edge_ids = np.stack(
        [
            ii * ny + jj,                       # bottom: H[i, j]
            n_h + (ii + 1) * (ny - 1) + jj,     # right:  V[i+1, j]
            ii * ny + (jj + 1),                 # top:    H[i, j+1]
            n_h + ii * (ny - 1) + jj,           # left:   V[i, j]
        ],
        axis=-1,
    )
    src, dst = [], []
    mixed = (code != 0) & (code != 15)
    for c in np.unique(code[mixed]):
        for cen in (False, True):
            sel = (code == c) & (center == cen)
            if not sel.any():
                continue
            ids = edge_ids[sel]
            for a, b in _SQUARE[int(c), cen]:
                src.append(ids[:, a])
                dst.append(ids[:, b])
    if not src:
        return np.zeros((0, 2)), np.zeros((0, 2), dtype=np.int64)
    src = np.concatenate(src)
    dst = np.concatenate(dst)

    # crossing point on every edge used
    used = np.unique(np.concatenate([src, dst]))
    pts = np.empty((len(used), 2))
    horiz = used < n_h
    hi, hj = np.divmod(used[horiz], ny)
    t = (iso - f[hi, hj]) / (f[hi + 1, hj] - f[hi, hj])
    pts[horiz] = np.column_stack([hi + t, hj])
    vi, vj = np.divmod(used[~horiz] - n_h, ny - 1)
    t = (iso - f[vi, vj]) / (f[vi, vj + 1] - f[vi, vj])
    pts[~horiz] = np.column_stack([vi, vj + t])
    remap = {int(u): k for k, u in enumerate(used)}

    nxt = dict(zip(src.tolist(), dst.tolist()))
    segs = []
    seen = set()
    for start in src.tolist():
        if start in seen:
            continue
        cur = start
        while cur not in seen:
            seen.add(cur)
            segs.append((remap[cur], remap[nxt[cur]]))
            cur = nxt[cur]
    # undo the one-cell padding
    return pts - 1.0, np.array(segs, dtype=np.int64)


def marching_cubes(values, iso=0.5):
    """Closed outward triangle surface around ``values > iso`` (cell-index coordinates)."""
    from skimage.measure import marching_cubes as _mc

    f = np.asarray(values, dtype=np.float64)
    low = min(float(f.min()), iso) - 1.0
    f = np.pad(f, 1, constant_values=low)
    if not (f.max() > iso):
        return np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64)
    verts, faces, _, _ = _mc(f, level=iso, method="lewiner", allow_degenerate=False)
    verts = verts.astype(np.float64) - 1.0
    faces = faces.astype(np.int64)
    if len(faces) and np.sum(signed_distortions(verts[faces])) < 0:
        faces = faces[:, ::-1]
    return verts, faces


def extract_contour(field, iso: float = 0.5) -> BoundaryMesh:
    """Iso-contour of a cell-centered field in unit-cell coordinates.

    Larger field values are inside. An empty result (no crossings) is returned
    as an empty :class:`BoundaryMesh` with a warning.
    """
    values = field.values
    shape = np.array(values.shape, dtype=np.float64)
    if values.ndim == 2:
        pts, elems = marching_squares(values, iso)
    elif values.ndim == 3:
        pts, elems = marching_cubes(values, iso)
    else:
        raise ValueError("contours need a 2D or 3D field")
    d = values.ndim
    if len(elems) == 0:
        warnings.warn("no iso-crossings; contour is empty", stacklevel=2)
        return BoundaryMesh.empty(d)
    pts = (pts + 0.5) / shape
    mesh = WeightedSimplexMesh(pts, elems, None, d - 1)
    measure = float(np.sum(signed_distortions(mesh.simplices())) / math.factorial(d))
    return BoundaryMesh(mesh, np.ones(len(elems)), measure)


def component_measures(boundary: BoundaryMesh):
    """Connected components of a boundary and the signed measure each encloses."""
    m = boundary.mesh
    n = len(m)
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    e = m.elements
    rows = np.repeat(np.arange(n), e.shape[1])
    graph = coo_matrix((np.ones(rows.size), (rows, e.ravel())), shape=(n, len(m.vertices)))
    # elements sharing a vertex are connected
    adj = (graph @ graph.T).tocoo()
    _, labels = connected_components(adj, directed=False)
    per_elem = signed_distortions(m.simplices()) / math.factorial(m.dimension)
    measures = np.bincount(labels, weights=per_elem)
    return labels, measures


def drop_small_components(boundary: BoundaryMesh, rel: float = 1e-3):
    """Remove components enclosing less than ``rel`` of the largest one.

    Returns the filtered boundary and the number of components discarded.
    """
    labels, measures = component_measures(boundary)
    if len(measures) <= 1:
        return boundary, 0
    size = np.abs(measures)
    keep_comp = size >= rel * size.max()
    dropped = int(np.sum(~keep_comp))
    if dropped == 0:
        return boundary, 0
    keep = keep_comp[labels]
    m = boundary.mesh
    used = np.unique(m.elements[keep])
    remap = np.full(len(m.vertices), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    mesh = WeightedSimplexMesh(m.vertices[used], remap[m.elements[keep]], m.densities[keep], m.degree)
    measure = float(np.sum(measures[keep_comp]))
    return BoundaryMesh(mesh, boundary.orientation[keep], measure), dropped
