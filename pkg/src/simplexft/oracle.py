"""Brute-force quadrature of exp(-i k.x) over simplices and enclosed solids.

Independent of the closed-form kernels: only sampling, subdivision and the
parity inside test are used.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import points_inside
from .mesh import validate_boundary

METHODS = ("stratified-monte-carlo", "recursive-subdivision-midpoint")
BATCH = 16_384
MIN_PER_STRATUM = 64


@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "stratified-monte-carlo"
    samples: int = 1_000_000
    depth: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown quadrature method {self.method!r}")
        if self.samples < 1:
            raise ValueError("sample count must be at least 1")
        if self.depth < 0:
            raise ValueError("depth must be non-negative")


class QuadResult(NamedTuple):
    value: complex
    error: float
    samples: int


def _gram_content(x):
    e = x[1:] - x[0]
    j = len(e)
    if j == 0:
        return 1.0
    g = e @ e.T
    return math.sqrt(max(np.linalg.det(g), 0.0)) / math.factorial(j)


def kuhn_subdivision(j: int, K: int) -> np.ndarray:
    """K^j equal-volume sub-simplices of the ordered simplex 1 >= t_1 >= ... >= t_j >= 0.

    Returned as barycentric weights of the parent vertices, shape (K^j, j+1, j+1).
    """
    if j == 0:
        return np.ones((1, 1, 1))
    cubes = np.indices((K,) * j).reshape(j, -1).T
    pieces = []
    for perm in itertools.permutations(range(j)):
        steps = np.zeros((j + 1, j))
        for i, a in enumerate(perm):
            steps[i + 1 :, a] += 1.0
        verts = cubes[:, None, :] + steps[None]          # (C, j+1, j) in t-space
        cen = verts.mean(axis=1)
        ok = np.all(np.diff(cen, axis=1) < 0, axis=1)    # t_1 > t_2 > ...
        pieces.append(verts[ok] / K)
    t = np.concatenate(pieces)
    # parent vertices in t-space are 0, e1, e1+e2, ..., 1: lambda_i = t_i - t_{i+1}
    nxt = np.concatenate([t[..., 1:], np.zeros(t.shape[:-1] + (1,))], axis=-1)
    lam = t - nxt
    lam0 = 1.0 - t[..., :1]
    return np.concatenate([lam0, lam], axis=-1)


def _uniform_barycentric(rng, n, j):
    # sorted uniforms give exactly uniform barycentric coordinates
    u = np.sort(rng.random((n, j)), axis=1)
    edges = np.concatenate([np.zeros((n, 1)), u, np.ones((n, 1))], axis=1)
    return np.diff(edges, axis=1)


def _integer_modes(kvecs):
    m = kvecs / (2.0 * np.pi)
    r = np.rint(m)
    return r.astype(np.int64) if np.all(np.abs(m - r) < 1e-12) else None


def _phase_sum(points, kvecs, modes=None):
    """exp(-i k.x) for every point (rows) and k (columns)."""
    if modes is None:
        ph = points @ kvecs.T
        out = np.empty(ph.shape, dtype=np.complex128)
        np.cos(ph, out=out.real)
        np.sin(ph, out=out.imag)
        np.negative(out.imag, out=out.imag)
        return out
    # k = 2 pi m: one exponential per axis, then integer powers by recurrence
    out = np.ones((len(points), len(modes)), dtype=np.complex128)
    for a in range(points.shape[1]):
        lo, hi = int(modes[:, a].min()), int(modes[:, a].max())
        base = np.exp(-2j * np.pi * points[:, a])
        table = np.empty((hi - lo + 1, len(points)), dtype=np.complex128)
        table[0] = np.exp(-2j * np.pi * lo * points[:, a])
        for t in range(1, hi - lo + 1):
            table[t] = table[t - 1] * base
        out *= table[modes[:, a] - lo].T
    return out


def _mc_simplex(x, kvecs, spec):
    j = len(x) - 1
    vol = _gram_content(x)
    if j == 0:
        return _phase_sum(x[:1], kvecs)[0], np.zeros(len(kvecs)), 1
    K = 1
    while (2 * K) ** j * MIN_PER_STRATUM <= spec.samples:
        K *= 2
    strata = kuhn_subdivision(j, K) @ x                   # (S, j+1, d)
    S = len(strata)
    per = max(2, -(-spec.samples // S))
    modes = _integer_modes(kvecs)
    rng = np.random.default_rng(spec.seed)
    total = np.zeros(len(kvecs), dtype=np.complex128)
    var = np.zeros(len(kvecs))
    w = vol / S
    chunk = max(1, BATCH // per)
    for s0 in range(0, S, chunk):
        sub = strata[s0 : s0 + chunk]
        bary = _uniform_barycentric(rng, len(sub) * per, j).reshape(len(sub), per, j + 1)
        pts = np.einsum("spv,svd->spd", bary, sub).reshape(-1, x.shape[1])
        f = _phase_sum(pts, kvecs, modes).reshape(len(sub), per, len(kvecs))
        mean = f.mean(axis=1)
        total += w * mean.sum(axis=0)
        # |f| = 1, so the within-stratum sum of squares is per * (1 - |mean|^2)
        svar = np.maximum(1.0 - (mean.real**2 + mean.imag**2), 0.0) * per / (per - 1)
        var += (w * w * svar / per).sum(axis=0)
    return total, np.sqrt(var), S * per


def _midpoint(x, kvecs, depth):
    j = len(x) - 1
    if j == 0:
        return _phase_sum(x[:1], kvecs)[0]
    sub = kuhn_subdivision(j, 2**depth) @ x
    cen = sub.mean(axis=1)
    vol = _gram_content(x) / len(sub)
    out = np.zeros(len(kvecs), dtype=np.complex128)
    for c0 in range(0, len(cen), BATCH):
        out += vol * _phase_sum(cen[c0 : c0 + BATCH], kvecs).sum(axis=0)
    return out


def quad_simplex_ft_many(vertex_coords, kvecs, spec: QuadratureSpec | None = None):
    """Quadrature of the simplex transform at several k sharing one sample set.

    Returns (values, errors, samples). Monte Carlo errors are standard errors
    of the stratified estimator; midpoint errors are the Richardson estimate
    |Q_depth - Q_(depth-1)| / 3.
    """
    spec = spec or QuadratureSpec()
    x = np.asarray(vertex_coords, dtype=np.float64)
    if x.ndim != 2 or not 1 <= len(x) <= 4:
        raise ValueError("expected 1 to 4 vertices")
    kv = np.atleast_2d(np.asarray(kvecs, dtype=np.float64))
    if spec.method == "stratified-monte-carlo":
        return _mc_simplex(x, kv, spec)
    q = _midpoint(x, kv, spec.depth)
    if spec.depth == 0 or len(x) == 1:
        err = np.full(len(kv), np.inf) if len(x) > 1 else np.zeros(len(kv))
    else:
        err = np.abs(q - _midpoint(x, kv, spec.depth - 1)) / 3.0
    return q, err, (2**spec.depth) ** (len(x) - 1)


def quad_simplex_ft(vertex_coords, k, spec: QuadratureSpec | None = None) -> QuadResult:
    """Estimate of the integral of exp(-i k.x) over a simplex, with an error estimate."""
    v, e, n = quad_simplex_ft_many(vertex_coords, np.atleast_2d(k), spec)
    return QuadResult(complex(v[0]), float(e[0]), int(n))


def richardson_ratio(vertex_coords, k, depth: int) -> float:
    """(Q_(d-1) - Q_(d-2)) / (Q_d - Q_(d-1)) for the midpoint rule; about 4 for order 2."""
    x = np.asarray(vertex_coords, dtype=np.float64)
    kv = np.atleast_2d(np.asarray(k, dtype=np.float64))
    q = [_midpoint(x, kv, depth - t)[0] for t in (2, 1, 0)]
    return abs(q[1] - q[0]) / abs(q[2] - q[1])


def quad_polytope_ft_many(boundary, kvecs, spec: QuadratureSpec | None = None):
    """Monte Carlo over the bounding box with parity inside tests (several k)."""
    spec = spec or QuadratureSpec()
    if spec.method != "stratified-monte-carlo":
        raise ValueError("solids support Monte Carlo only")
    b = validate_boundary(boundary)
    kv = np.atleast_2d(np.asarray(kvecs, dtype=np.float64))
    v = b.mesh.vertices
    lo, hi = v.min(axis=0), v.max(axis=0)
    box = float(np.prod(hi - lo))
    rng = np.random.default_rng(spec.seed)
    s1 = np.zeros(len(kv), dtype=np.complex128)
    s2 = np.zeros(len(kv))
    n = spec.samples
    for c0 in range(0, n, BATCH):
        m = min(BATCH, n - c0)
        pts = lo + rng.random((m, len(lo))) * (hi - lo)
        inside = points_inside(b, pts, seed=spec.seed)
        f = np.zeros((m, len(kv)), dtype=np.complex128)
        f[inside] = _phase_sum(pts[inside], kv)
        s1 += f.sum(axis=0)
        s2 += (np.abs(f) ** 2).sum(axis=0)
    mean = s1 / n
    var = (s2 / n - np.abs(mean) ** 2) * n / max(n - 1, 1)
    return box * mean, box * np.sqrt(np.maximum(var, 0.0) / n), n


def quad_polytope_ft(boundary, k, spec: QuadratureSpec | None = None) -> QuadResult:
    """Estimate of the integral of exp(-i k.x) over the solid a boundary encloses."""
    v, e, n = quad_polytope_ft_many(boundary, np.atleast_2d(k), spec)
    return QuadResult(complex(v[0]), float(e[0]), int(n))
