# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled transform kernel; same contract as ``_kernels_py.transform_modes``."""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport parallel, prange
from libc.math cimport cos, sin, INFINITY
from libc.stdlib cimport free, malloc

cnp.import_array()

NAME = "cython"

cdef enum:
    TAYLOR_TERMS = 18
    MAX_POINTS = 4

cdef double TAYLOR_SPREAD = 1.0
cdef double INV_FACT[TAYLOR_TERMS + 4]

INV_FACT[0] = 1.0
for _n in range(1, TAYLOR_TERMS + 4):
    INV_FACT[_n] = INV_FACT[_n - 1] / _n


cdef inline double complex _taylor(const double* s, int lo, int q) noexcept nogil:
    cdef double c = 0.5 * (s[lo] + s[lo + q])
    cdef double h[TAYLOR_TERMS]
    cdef double d
    cdef double re = 0.0, im = 0.0, v
    cdef int m, t, n
    d = s[lo] - c
    h[0] = 1.0
    for m in range(1, TAYLOR_TERMS):
        h[m] = h[m - 1] * d
    for t in range(1, q + 1):
        d = s[lo + t] - c
        for m in range(1, TAYLOR_TERMS):
            h[m] = h[m] + d * h[m - 1]
    # (-i)^n cycles through 1, -i, -1, i
    for m in range(TAYLOR_TERMS):
        n = m + q
        v = h[m] * INV_FACT[n]
        if n & 3 == 0:
            re = re + v
        elif n & 3 == 1:
            im = im - v
        elif n & 3 == 2:
            re = re - v
        else:
            im = im + v
    return (re + 1j * im) * (cos(c) - 1j * sin(c))


cdef inline double complex _divided_difference(double* s, double complex* p, int npts, double* gap) noexcept nogil:
    cdef int a, b, lvl, i
    cdef double ts, spread
    cdef double complex tp
    # insertion sort, at most four points
    for a in range(1, npts):
        ts = s[a]
        tp = p[a]
        b = a - 1
        while b >= 0 and s[b] > ts:
            s[b + 1] = s[b]
            p[b + 1] = p[b]
            b = b - 1
        s[b + 1] = ts
        p[b + 1] = tp
    for a in range(1, npts):
        if s[a] - s[a - 1] < gap[0]:
            gap[0] = s[a] - s[a - 1]
    for lvl in range(1, npts):
        for i in range(npts - lvl):
            spread = s[i + lvl] - s[i]
            if spread >= TAYLOR_SPREAD:
                p[i] = (p[i + 1] - p[i]) / spread
            else:
                p[i] = _taylor(s, i, lvl)
    return p[0]


def transform_modes(verts, elems, coeff, kvecs, aux=False, kahan=False, workers=1, budget=None):
    cdef const double[:, ::1] X = np.ascontiguousarray(verts, dtype=np.float64)
    cdef const cnp.int64_t[:, ::1] E = np.ascontiguousarray(elems, dtype=np.int64)
    cdef const double[::1] C = np.ascontiguousarray(coeff, dtype=np.float64)
    kv = np.ascontiguousarray(kvecs, dtype=np.float64).reshape(-1, X.shape[1])
    cdef const double[:, ::1] K = kv
    cdef Py_ssize_t nm = K.shape[0], nv = X.shape[0], ne = E.shape[0]
    cdef int d = <int>X.shape[1], r = <int>E.shape[1]
    cdef bint use_aux = aux, use_kahan = kahan
    cdef int nthreads = max(1, int(workers))
    out = np.zeros(nm, dtype=np.complex128)
    sep = np.full(nm, np.inf)
    cdef double complex[::1] O = out
    cdef double[::1] S = sep

    cdef Py_ssize_t m, v, e
    cdef int t, a, off, npts
    cdef double* sig
    cdef double complex* ph
    cdef double* s
    cdef double complex* p
    cdef double complex acc, comp, y, tot, val
    cdef double gap, sv

    off = 1 if use_aux else 0
    npts = r + off
    if npts > MAX_POINTS:
        raise ValueError("at most four points per simplex")

    with nogil, parallel(num_threads=nthreads):
        sig = <double*>malloc(nv * sizeof(double))
        ph = <double complex*>malloc(nv * sizeof(double complex))
        s = <double*>malloc(MAX_POINTS * sizeof(double))
        p = <double complex*>malloc(MAX_POINTS * sizeof(double complex))
        for m in prange(nm, schedule="static"):
            # per-frequency sigma cache
            for v in range(nv):
                sv = X[v, 0] * K[m, 0]
                for a in range(1, d):
                    sv = sv + X[v, a] * K[m, a]
                sig[v] = sv
                ph[v] = cos(sv) - 1j * sin(sv)
            acc = 0.0
            comp = 0.0
            gap = INFINITY
            for e in range(ne):
                if use_aux:
                    s[0] = 0.0
                    p[0] = 1.0
                for t in range(r):
                    s[t + off] = sig[E[e, t]]
                    p[t + off] = ph[E[e, t]]
                val = _divided_difference(s, p, npts, &gap)
                if use_kahan:
                    y = C[e] * val - comp
                    tot = acc + y
                    comp = (tot - acc) - y
                    acc = tot
                else:
                    acc = acc + C[e] * val
            O[m] = acc
            S[m] = gap
        free(sig)
        free(ph)
        free(s)
        free(p)
    return out, sep
