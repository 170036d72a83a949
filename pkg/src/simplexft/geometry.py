"""Point-in-solid parity tests, point-to-simplex distances and simplex/box overlap."""

from __future__ import annotations

import numpy as np

from .mesh import BoundaryMesh, WeightedSimplexMesh

RAY_SHEAR = 1e-7
PAIR_BUDGET = 4_000_000


def _as_mesh(m) -> WeightedSimplexMesh:
    return m.mesh if isinstance(m, BoundaryMesh) else m


def _shear(x, eta):
    # tilting the +x ray by eta equals shearing space the other way
    y = np.array(x, dtype=np.float64, copy=True)
    for a in range(1, y.shape[1]):
        y[:, a] -= eta[a - 1] * x[:, 0]
    return y


def ray_shear(seed: int, d: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 0x5EED])
    return RAY_SHEAR * rng.uniform(0.5, 1.0, d - 1) * rng.choice([-1.0, 1.0], d - 1)


def _bin_pairs(pkey_lo, elo, ehi, nbins):
    """(point, element) candidate pairs that share a bin of the projected grid.

    ``pkey_lo`` are per-point bin coordinates (P, q); ``elo``/``ehi`` are the
    inclusive bin ranges per element (E, q). Yields index arrays in chunks.
    """
    q = pkey_lo.shape[1]
    strides = np.cumprod([1] + [nbins] * (q - 1))
    pbin = pkey_lo @ strides
    porder = np.argsort(pbin, kind="stable")
    counts = np.bincount(pbin, minlength=nbins**q)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])

    span = ehi - elo + 1
    per_elem = np.prod(span, axis=1)
    ent_elem = np.repeat(np.arange(len(elo)), per_elem)
    local = np.arange(per_elem.sum()) - np.repeat(np.cumsum(per_elem) - per_elem, per_elem)
    ent_bin = np.zeros(len(ent_elem), dtype=np.int64)
    rem = local
    for a in range(q):
        sa = span[ent_elem, a]
        ent_bin += (elo[ent_elem, a] + rem % sa) * strides[a]
        rem = rem // sa
    reps = counts[ent_bin]
    keep = reps > 0
    ent_elem, ent_bin, reps = ent_elem[keep], ent_bin[keep], reps[keep]
    csum = np.cumsum(reps)
    lo = 0
    while lo < len(reps):
        base_total = csum[lo - 1] if lo else 0
        hi = int(np.searchsorted(csum, base_total + PAIR_BUDGET, side="right"))
        hi = max(hi, lo + 1)
        r = reps[lo:hi]
        total = int(r.sum())
        pe = np.repeat(ent_elem[lo:hi], r)
        first = np.repeat(starts[ent_bin[lo:hi]], r)
        offs = np.arange(total) - np.repeat(np.cumsum(r) - r, r)
        yield porder[first + offs], pe
        lo = hi


def _crossings_2d(q, v, e, pi, ei):
    a = np.minimum(e[ei, 0], e[ei, 1])
    b = np.maximum(e[ei, 0], e[ei, 1])
    xa, ya = v[a, 0], v[a, 1]
    xb, yb = v[b, 0], v[b, 1]
    px, py = q[pi, 0], q[pi, 1]
    straddle = (ya > py) != (yb > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = xa + (py - ya) * (xb - xa) / (yb - ya)
    return straddle & (px < xi)


def _edge_fn(v, ia, ib, py, pz):
    # evaluate with the lower vertex index as origin so shared edges agree exactly
    swap = ia > ib
    s = np.where(swap, ib, ia)
    t = np.where(swap, ia, ib)
    val = (v[t, 1] - v[s, 1]) * (pz - v[s, 2]) - (v[t, 2] - v[s, 2]) * (py - v[s, 1])
    return np.where(swap, -val, val)


def _crossings_3d(q, v, f, pi, ei):
    py, pz, px = q[pi, 1], q[pi, 2], q[pi, 0]
    i0, i1, i2 = f[ei, 0], f[ei, 1], f[ei, 2]
    w0 = _edge_fn(v, i1, i2, py, pz)
    w1 = _edge_fn(v, i2, i0, py, pz)
    w2 = _edge_fn(v, i0, i1, py, pz)
    area = (v[i1, 1] - v[i0, 1]) * (v[i2, 2] - v[i0, 2]) - (v[i1, 2] - v[i0, 2]) * (v[i2, 1] - v[i0, 1])
    sgn = np.sign(area)
    inside = sgn != 0
    for w, (ia, ib) in ((w0, (i1, i2)), (w1, (i2, i0)), (w2, (i0, i1))):
        ws = w * sgn
        dy = (v[ib, 1] - v[ia, 1]) * sgn
        dz = (v[ib, 2] - v[ia, 2]) * sgn
        top_left = (dz < 0) | ((dz == 0) & (dy < 0))
        inside &= (ws > 0) | ((ws == 0) & top_left)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = (w0 * v[i0, 0] + w1 * v[i1, 0] + w2 * v[i2, 0]) / (w0 + w1 + w2)
    return inside & (px < xi)


def points_inside(boundary, points, seed: int = 0) -> np.ndarray:
    """Parity of +x ray crossings against a closed boundary (segments or triangles).

    The ray is tilted by a tiny seeded angle so it misses vertices and edges of
    axis-aligned geometry; ties on shared edges are broken consistently.
    """
    m = _as_mesh(boundary)
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    d = m.dimension
    if pts.shape[1] != d:
        raise ValueError("point and mesh dimensions differ")
    if m.degree != d - 1:
        raise ValueError("parity tests need a (d-1)-simplex boundary")
    result = np.zeros(len(pts), dtype=bool)
    if len(m) == 0 or len(pts) == 0:
        return result
    eta = ray_shear(seed, d)
    q = _shear(pts, eta)
    v = _shear(m.vertices, eta)
    e = m.elements
    proj = slice(1, d)
    lo = np.minimum(q[:, proj].min(axis=0), v[:, proj].min(axis=0))
    hi = np.maximum(q[:, proj].max(axis=0), v[:, proj].max(axis=0))
    width = np.where(hi > lo, hi - lo, 1.0)
    nb = int(np.clip(4 * len(e), 1, 4096)) if d == 2 else int(np.clip(2 * np.sqrt(len(e)), 1, 512))

    def key(x):
        return np.clip(((x - lo) / width * nb).astype(np.int64), 0, nb - 1)

    pk = key(q[:, proj])
    ev = v[e][:, :, proj]
    elo, ehi = key(ev.min(axis=1)), key(ev.max(axis=1))
    count = np.zeros(len(pts), dtype=np.int64)
    cross = _crossings_2d if d == 2 else _crossings_3d
    for pi, ei in _bin_pairs(pk, elo, ehi, nb):
        hit = cross(q, v, e, pi, ei)
        count += np.bincount(pi[hit], minlength=len(pts))
    return (count % 2) == 1


# ---------------------------------------------------------------------------
# distances (pairwise over aligned arrays)


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def dist_point_segment(p, a, b):
    ab = b - a
    ll = _dot(ab, ab)
    t = np.where(ll > 0, _dot(p - a, ab) / np.where(ll > 0, ll, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    c = a + t[..., None] * ab
    return np.linalg.norm(p - c, axis=-1)


def _closest_on_triangle(p, a, b, c):
    """Closest points on 3D triangles (a, b, c) to p; all arrays (P, 3)."""
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = _dot(ab, ap), _dot(ac, ap)
    bp = p - b
    d3, d4 = _dot(ab, bp), _dot(ac, bp)
    cp = p - c
    d5, d6 = _dot(ab, cp), _dot(ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    out = np.empty_like(p)
    done = np.zeros(len(p), dtype=bool)

    def put(mask, val):
        nonlocal done
        m = mask & ~done
        out[m] = val[m] if val.ndim == 2 else val
        done |= m

    with np.errstate(divide="ignore", invalid="ignore"):
        put((d1 <= 0) & (d2 <= 0), a)
        put((d3 >= 0) & (d4 <= d3), b)
        put((d6 >= 0) & (d5 <= d6), c)
        v = d1 / (d1 - d3)
        put((vc <= 0) & (d1 >= 0) & (d3 <= 0), a + v[:, None] * ab)
        w = d2 / (d2 - d6)
        put((vb <= 0) & (d2 >= 0) & (d6 <= 0), a + w[:, None] * ac)
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        put((va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0), b + w[:, None] * (c - b))
        denom = va + vb + vc
        v = vb / denom
        w = vc / denom
        put(np.ones(len(p), dtype=bool), a + v[:, None] * ab + w[:, None] * ac)
    # degenerate triangles: fall back to the nearest edge
    bad = ~np.all(np.isfinite(out), axis=1)
    if np.any(bad):
        segs = [(a, b), (b, c), (c, a)]
        dists = np.stack([dist_point_segment(p[bad], s[bad], t[bad]) for s, t in segs])
        best = np.argmin(dists, axis=0)
        for k, (s, t) in enumerate(segs):
            sel = np.flatnonzero(bad)[best == k]
            ab_ = t[sel] - s[sel]
            ll = np.maximum(_dot(ab_, ab_), 1e-300)
            tt = np.clip(_dot(p[sel] - s[sel], ab_) / ll, 0, 1)
            out[sel] = s[sel] + tt[:, None] * ab_
    return out


def _barycentric(p, x):
    """Barycentric coordinates of p in full-dimensional simplices x (P, d+1, d)."""
    t = np.swapaxes(x[:, 1:] - x[:, :1], 1, 2)
    with np.errstate(all="ignore"):
        lam = np.linalg.solve(t, (p - x[:, 0])[..., None])[..., 0] if len(p) else np.zeros((0, x.shape[2]))
    return np.column_stack([1.0 - lam.sum(axis=1), lam])


def dist_point_simplex(p, x):
    """Exact Euclidean distance from points p (P, d) to simplices x (P, j+1, d)."""
    j = x.shape[1] - 1
    d = p.shape[1]
    if j == 0:
        return np.linalg.norm(p - x[:, 0], axis=1)
    if j == 1:
        return dist_point_segment(p, x[:, 0], x[:, 1])
    if j == 2 and d == 3:
        return np.linalg.norm(p - _closest_on_triangle(p, x[:, 0], x[:, 1], x[:, 2]), axis=1)
    # full-dimensional simplex: zero inside, else nearest facet
    with np.errstate(all="ignore"):
        lam = _barycentric(p, x)
    inside = np.all(lam >= -1e-15, axis=1) & np.all(np.isfinite(lam), axis=1)
    best = np.full(len(p), np.inf)
    for skip in range(j + 1):
        facet = np.delete(x, skip, axis=1)
        best = np.minimum(best, dist_point_simplex(p, facet))
    return np.where(inside, 0.0, best)


def unsigned_distance(mesh, points, block: int = 512) -> np.ndarray:
    """Distance from each point to the nearest element, exact, with block pruning.

    Points are grouped into spatial blocks; an element is examined for a block
    only if the box-to-box lower bound does not exceed the best upper bound
    (furthest block corner to an element vertex) over all elements.
    """
    m = _as_mesh(mesh)
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    x = m.simplices()
    if len(x) == 0:
        return np.full(len(pts), np.inf)
    elo, ehi = x.min(axis=1), x.max(axis=1)
    anchor = x[:, 0]
    d = pts.shape[1]
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    nblk = max(1, int(round((len(pts) / block) ** (1.0 / d))))
    width = np.where(hi > lo, hi - lo, 1.0)
    bkey = np.clip(((pts - lo) / width * nblk).astype(np.int64), 0, nblk - 1)
    bid = np.ravel_multi_index(bkey.T, (nblk,) * d)
    order = np.argsort(bid, kind="stable")
    bounds = np.flatnonzero(np.diff(bid[order])) + 1
    out = np.empty(len(pts))
    corners = np.array(np.meshgrid(*[[0, 1]] * d, indexing="ij")).reshape(d, -1).T
    for idx in np.split(order, bounds):
        p = pts[idx]
        plo, phi = p.min(axis=0), p.max(axis=0)
        gap = np.maximum(0.0, np.maximum(elo - phi, plo - ehi))
        lower = np.linalg.norm(gap, axis=1)
        cpts = plo + corners * (phi - plo)
        upper = np.max(np.linalg.norm(cpts[None, :, :] - anchor[:, None, :], axis=2), axis=1)
        cand = np.flatnonzero(lower <= upper.min())
        best = np.full(len(p), np.inf)
        step = max(1, PAIR_BUDGET // (4 * max(1, len(p))))
        for c0 in range(0, len(cand), step):
            cc = cand[c0 : c0 + step]
            pp = np.repeat(p, len(cc), axis=0)
            xx = np.tile(x[cc], (len(p), 1, 1))
            dist = dist_point_simplex(pp, xx).reshape(len(p), len(cc))
            best = np.minimum(best, dist.min(axis=1))
        out[idx] = best
    return out


# ---------------------------------------------------------------------------
# separating-axis overlap of simplices with axis-aligned boxes


def _sat_axes(x):
    """Candidate separating axes per simplex, shape (E, A, d)."""
    e, jp1, d = x.shape
    eye = np.broadcast_to(np.eye(d), (e, d, d))
    edges = [x[:, b] - x[:, a] for a in range(jp1) for b in range(a + 1, jp1)]
    axes = [eye]
    if d == 2:
        for ed in edges:
            axes.append(np.stack([-ed[:, 1], ed[:, 0]], axis=1)[:, None])
    else:
        for ed in edges:
            axes.append(np.cross(ed[:, None, :], eye))
        for i in range(len(edges)):
            for k in range(i + 1, len(edges)):
                axes.append(np.cross(edges[i], edges[k])[:, None])
    return np.concatenate(axes, axis=1)


def simplex_box_overlap(x, box_lo, box_hi):
    """Closed-set overlap of simplices x (P, j+1, d) with boxes (P, d)."""
    axes = _sat_axes(x)
    proj = np.einsum("pvd,pad->pav", x, axes)
    smin, smax = proj.min(axis=2), proj.max(axis=2)
    c = 0.5 * (box_lo + box_hi)
    h = 0.5 * (box_hi - box_lo)
    bc = np.einsum("pd,pad->pa", c, axes)
    br = np.einsum("pd,pad->pa", h, np.abs(axes))
    separated = (smin > bc + br) | (smax < bc - br)
    return ~np.any(separated, axis=1)
