"""Pure numpy transform kernel.

Evaluates, for every frequency k and element n, the divided difference of
g(z) = exp(-i z) at the element's projected vertices sigma_t = k . x_t, and
accumulates ``coeff[n] * g[sigma_0, ..., sigma_r]`` in element index order.

Divided differences are formed with a Newton table over the sorted sigmas.
Entries whose sub-range spread is below ``TAYLOR_SPREAD`` use a Taylor series
about the range midpoint, so clustered sigmas never cancel catastrophically.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

TAYLOR_SPREAD = 1.0
TAYLOR_TERMS = 18
# (-i)^n / n!
_COEF = np.array([(-1j) ** n / math.factorial(n) for n in range(TAYLOR_TERMS + 4)])

NAME = "python"


def _taylor(s):
    """Divided difference of exp(-iz) over the rows of a sorted (P, q+1) array."""
    q = s.shape[1] - 1
    c = 0.5 * (s[:, 0] + s[:, -1])
    d = s - c[:, None]
    h = np.empty((TAYLOR_TERMS, len(s)))
    h[0] = 1.0
    for m in range(1, TAYLOR_TERMS):
        h[m] = h[m - 1] * d[:, 0]
    for t in range(1, q + 1):
        for m in range(1, TAYLOR_TERMS):
            h[m] += d[:, t] * h[m - 1]
    total = _COEF[q : q + TAYLOR_TERMS] @ h
    return total * (np.cos(c) - 1j * np.sin(c))


def exp_divided_differences(sig, phases=None):
    """g[sigma_0..sigma_r] for g(z) = exp(-iz), row-wise over a (P, r+1) array.

    Returns the values and the minimum gap between consecutive sorted sigmas.
    """
    sig = np.asarray(sig, dtype=np.float64)
    if phases is None:
        phases = np.cos(sig) - 1j * np.sin(sig)
    order = np.argsort(sig, axis=1, kind="stable")
    s = np.take_along_axis(sig, order, axis=1)
    table = list(np.take_along_axis(phases, order, axis=1).T)
    r = sig.shape[1] - 1
    for lvl in range(1, r + 1):
        for i in range(r + 1 - lvl):
            spread = s[:, i + lvl] - s[:, i]
            far = spread >= TAYLOR_SPREAD
            val = np.empty(len(s), dtype=np.complex128)
            val[far] = (table[i + 1][far] - table[i][far]) / spread[far]
            near = ~far
            if near.any():
                val[near] = _taylor(s[near, i : i + lvl + 1])
            table[i] = val
    gaps = np.min(np.diff(s, axis=1), axis=1) if r > 0 else np.full(len(s), np.inf)
    return table[0], gaps


def vertex_sigmas(verts, kvecs):
    """sigma[v, m] = k_m . x_v, summed axis by axis (bitwise equal to the compiled kernel)."""
    sig = verts[:, 0, None] * kvecs[None, :, 0]
    for a in range(1, verts.shape[1]):
        sig = sig + verts[:, a, None] * kvecs[None, :, a]
    return sig


def _chunk(verts, elems, coeff, kvecs, aux, kahan):
    nm = len(kvecs)
    sig_v = vertex_sigmas(verts, kvecs)
    ph_v = np.cos(sig_v) - 1j * np.sin(sig_v)
    n, r = elems.shape
    sig = sig_v[elems]  # (N, r, M)
    ph = ph_v[elems]
    if aux:
        sig = np.concatenate([np.zeros((n, 1, nm)), sig], axis=1)
        ph = np.concatenate([np.ones((n, 1, nm), dtype=np.complex128), ph], axis=1)
    npts = sig.shape[1]
    flat_s = sig.transpose(0, 2, 1).reshape(-1, npts)
    flat_p = ph.transpose(0, 2, 1).reshape(-1, npts)
    dd, gaps = exp_divided_differences(flat_s, flat_p)
    dd = dd.reshape(n, nm)
    minsep = gaps.reshape(n, nm).min(axis=0) if n else np.full(nm, np.inf)
    acc = np.zeros(nm, dtype=np.complex128)
    if kahan:
        comp = np.zeros(nm, dtype=np.complex128)
        for e in range(n):
            y = coeff[e] * dd[e] - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
    else:
        for e in range(n):
            acc += coeff[e] * dd[e]
    return acc, minsep


def transform_modes(verts, elems, coeff, kvecs, aux=False, kahan=False, workers=1, budget=2_000_000):
    """Sum over elements of ``coeff[n] * g[sigma]`` for every row of ``kvecs``.

    Returns ``(values, minsep)``; ``minsep[m]`` is the smallest sigma gap seen at
    mode m (the auxiliary node contributes sigma = 0 when ``aux`` is set).
    """
    verts = np.ascontiguousarray(verts, dtype=np.float64)
    elems = np.ascontiguousarray(elems, dtype=np.int64)
    coeff = np.ascontiguousarray(coeff, dtype=np.float64)
    kvecs = np.ascontiguousarray(kvecs, dtype=np.float64).reshape(-1, verts.shape[1])
    m = len(kvecs)
    npts = elems.shape[1] + (1 if aux else 0)
    step = max(1, min(m, budget // max(1, len(elems) * npts)))
    bounds = [(a, min(m, a + step)) for a in range(0, m, step)]
    values = np.zeros(m, dtype=np.complex128)
    minsep = np.full(m, np.inf)

    def run(b):
        lo, hi = b
        values[lo:hi], minsep[lo:hi] = _chunk(verts, elems, coeff, kvecs[lo:hi], aux, kahan)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, bounds))
    else:
        for b in bounds:
            run(b)
    return values, minsep
