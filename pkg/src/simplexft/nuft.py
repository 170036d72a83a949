"""Exact Fourier transforms of weighted simplex meshes on integer-mode grids.

Convention: the frequency grid samples k = 2*pi*m for integer mode vectors m
(unit-period cell). A j-simplex with vertices x_0..x_j transforms to

    F(k) = i^j * gamma * g[k.x_0, ..., k.x_j],    g(z) = exp(-i z),

where g[...] is the divided difference and gamma = j! * content. Solids given
by an oriented boundary are summed over auxiliary simplices that join each
boundary element to the origin, using the signed factor det([x_1 .. x_j]).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import _backend
from ._kernels_py import vertex_sigmas
from .mesh import (
    AffineMap,
    BoundaryMesh,
    WeightedSimplexMesh,
    count_degenerate,
    contents,
    distortion_factor,
    distortion_factors,
    signed_distortions,
    validate_boundary,
)

COLLISION_THRESHOLD = 1e-9
KAHAN_MIN_ELEMENTS = 1_000_000
SPECTRUM_FORMAT = "simplexft.spectrum"


class SigmaCollisionError(ArithmeticError):
    """Two projected vertices k.x coincide; the geometry needs jitter."""


class SpectrumFormatError(ValueError):
    pass


def default_workers() -> int:
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class KGridSpec:
    """Box of the lowest Fourier modes; ``resolution[a]`` modes along axis a.

    Modes along an axis of n entries run over -(n//2) .. (n-1)//2, so even n
    carries one unpaired Nyquist mode -n/2. ``layout`` is ``"natural"``
    (FFT order, DC first) or ``"centered"`` (ascending modes).
    """

    resolution: tuple
    layout: str = "natural"

    def __post_init__(self):
        res = tuple(int(n) for n in np.atleast_1d(self.resolution))
        if not res or any(n < 1 for n in res):
            raise ValueError("resolution must be positive along every axis")
        if self.layout not in ("natural", "centered"):
            raise ValueError(f"unknown layout {self.layout!r}")
        object.__setattr__(self, "resolution", res)

    @classmethod
    def cube(cls, n: int, dimension: int, layout: str = "natural") -> "KGridSpec":
        return cls((n,) * dimension, layout)

    @property
    def dimension(self) -> int:
        return len(self.resolution)

    @property
    def size(self) -> int:
        return int(np.prod(self.resolution))

    def axis_modes(self, axis: int) -> np.ndarray:
        n = self.resolution[axis]
        m = np.fft.fftfreq(n, 1.0 / n).round().astype(np.int64)
        return np.fft.fftshift(m) if self.layout == "centered" else m

    def mode_grid(self) -> np.ndarray:
        axes = [self.axis_modes(a) for a in range(self.dimension)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def modes(self) -> np.ndarray:
        """Integer mode vectors, shape (size, d), row-major in this layout."""
        return self.mode_grid().reshape(-1, self.dimension)

    def kvectors(self) -> np.ndarray:
        return 2.0 * np.pi * self.modes()

    def dc_index(self) -> tuple:
        return tuple(int(np.flatnonzero(self.axis_modes(a) == 0)[0]) for a in range(self.dimension))

    def mirror(self):
        """Flat index of the mode -m for each mode m, and a mask of paired modes."""
        idx, ok = [], []
        for a in range(self.dimension):
            m = self.axis_modes(a)
            pos = {int(v): i for i, v in enumerate(m)}
            idx.append(np.array([pos.get(-int(v), i) for i, v in enumerate(m)]))
            ok.append(np.array([-int(v) in pos for v in m]))
        grids = np.meshgrid(*idx, indexing="ij")
        oks = np.meshgrid(*ok, indexing="ij")
        flat = np.ravel_multi_index([g.ravel() for g in grids], self.resolution)
        mask = np.logical_and.reduce([o.ravel() for o in oks])
        return flat, mask

    def with_layout(self, layout: str) -> "KGridSpec":
        return replace(self, layout=layout)


@dataclass
class SpectralGrid:
    grid: KGridSpec
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.resolution:
            v = v.reshape(self.grid.resolution)
        self.values = v

    @property
    def dimension(self) -> int:
        return self.grid.dimension

    def to_layout(self, layout: str) -> "SpectralGrid":
        if layout == self.grid.layout:
            return self
        shift = np.fft.fftshift if layout == "centered" else np.fft.ifftshift
        return SpectralGrid(self.grid.with_layout(layout), shift(self.values), dict(self.meta))

    def natural(self) -> "SpectralGrid":
        return self.to_layout("natural")

    def centered(self) -> "SpectralGrid":
        return self.to_layout("centered")

    def value_at(self, mode) -> complex:
        idx = []
        for a, m in enumerate(np.atleast_1d(mode)):
            hit = np.flatnonzero(self.grid.axis_modes(a) == int(m))
            if not len(hit):
                raise KeyError(f"mode {tuple(mode)} outside the grid")
            idx.append(int(hit[0]))
        return complex(self.values[tuple(idx)])

    def dc(self) -> complex:
        return complex(self.values[self.grid.dc_index()])

    def hermitian_defect(self) -> float:
        """max |F(-k) - conj F(k)| / (1 + |F(k)|) over mirrored mode pairs."""
        flat = self.values.ravel()
        mirror, paired = self.grid.mirror()
        f, g = flat[paired], flat[mirror[paired]]
        if not len(f):
            return 0.0
        return float(np.max(np.abs(g - np.conj(f)) / (1.0 + np.abs(f))))

    # -- files ------------------------------------------------------------

    def header(self) -> dict:
        head = {
            "format": SPECTRUM_FORMAT,
            "version": 1,
            "dimension": self.dimension,
            "resolution": list(self.grid.resolution),
            "layout": "natural",
            "dtype": "<f8",
            "payload": "interleaved re,im; row-major; natural mode order",
        }
        head.update(self.meta)
        return head

    def save(self, path) -> Path:
        """Write raw little-endian (re, im) pairs to ``path`` and a JSON sidecar."""
        path = Path(path)
        nat = self.natural()
        payload = np.ascontiguousarray(nat.values, dtype="<c16").tobytes()
        path.write_bytes(payload)
        sidecar = sidecar_path(path)
        sidecar.write_text(json.dumps(_jsonable(self.header()), indent=2, sort_keys=True) + "\n")
        return sidecar

    @classmethod
    def load(cls, path) -> "SpectralGrid":
        path = Path(path)
        try:
            head = json.loads(sidecar_path(path).read_text())
        except (OSError, ValueError) as exc:
            raise SpectrumFormatError(f"{path}: unreadable spectrum header ({exc})") from None
        if head.get("format") != SPECTRUM_FORMAT:
            raise SpectrumFormatError(f"{path}: not a spectrum file")
        res = tuple(int(n) for n in head["resolution"])
        raw = path.read_bytes()
        if len(raw) != 16 * int(np.prod(res)):
            raise SpectrumFormatError(
                f"{path}: payload holds {len(raw)} bytes, header implies {16 * int(np.prod(res))}"
            )
        values = np.frombuffer(raw, dtype="<c16").astype(np.complex128).reshape(res)
        meta = {k: v for k, v in head.items() if k not in _HEADER_KEYS}
        return cls(KGridSpec(res, "natural"), values, meta)


_HEADER_KEYS = {"format", "version", "dimension", "resolution", "layout", "dtype", "payload"}


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, AffineMap):
        return obj.to_dict()
    return obj


# ---------------------------------------------------------------------------
# jitter and caching


@dataclass(frozen=True)
class JitterConfig:
    """Vertex perturbation applied once before any frequency is evaluated.

    ``epsilon`` is relative to the bounding-box diagonal. ``dc_policy`` is
    ``"analytic"`` (exact mass / enclosed volume at k = 0) or ``"jittered"``
    (evaluate the closed form at a k perturbed away from zero).
    """

    epsilon: float = 1e-6
    seed: int = 0
    dc_policy: str = "analytic"
    collision_threshold: float = COLLISION_THRESHOLD
    retries: int = 1

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.dc_policy not in ("analytic", "jittered"):
            raise ValueError(f"unknown dc policy {self.dc_policy!r}")


def _jitter_offsets(vertices, epsilon, seed):
    rng = np.random.default_rng(seed)
    d = vertices.shape[1]
    if len(vertices) == 0:
        return np.zeros_like(vertices), rng
    diag = float(np.linalg.norm(vertices.max(axis=0) - vertices.min(axis=0)))
    amp = epsilon * diag / math.sqrt(d)
    # always draw, so the generator state after jitter does not depend on epsilon
    u = rng.uniform(-1.0, 1.0, size=vertices.shape)
    return amp * u, rng


def jitter_vertices(mesh, jitter: JitterConfig):
    """Perturb every vertex by at most ``epsilon * bbox diagonal`` (seeded)."""
    inner = mesh.mesh if isinstance(mesh, BoundaryMesh) else mesh
    if jitter.epsilon == 0:
        return mesh
    off, _ = _jitter_offsets(inner.vertices, jitter.epsilon, jitter.seed)
    moved = inner.with_vertices(inner.vertices + off)
    if isinstance(mesh, BoundaryMesh):
        return BoundaryMesh(moved, mesh.orientation, mesh.signed_measure)
    return moved


class SigmaCache:
    """Per-frequency vertex projections with vertices laid out in BFS order.

    Elements are remapped onto the BFS numbering so that the vertices an element
    touches sit close together in the cache; element order itself is unchanged.
    """

    def __init__(self, mesh: WeightedSimplexMesh):
        order = mesh.bfs_vertex_order()
        position = np.empty(len(order), dtype=np.int64)
        position[order] = np.arange(len(order))
        self.order = order
        self.position = position
        self.vertices = np.ascontiguousarray(mesh.vertices[order])
        self.elements = np.ascontiguousarray(position[mesh.elements])

    def sigmas(self, k) -> np.ndarray:
        """sigma for every cached vertex at one frequency ``k``."""
        return vertex_sigmas(self.vertices, np.atleast_2d(np.asarray(k, dtype=np.float64)))[:, 0]

    def phases(self, k) -> np.ndarray:
        s = self.sigmas(k)
        return np.cos(s) - 1j * np.sin(s)


# ---------------------------------------------------------------------------
# single simplices


def _sigmas_of(coords, k):
    x = np.asarray(coords, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    if x.ndim == 1:
        x = x[None]
    if x.shape[1] != k.shape[0]:
        raise ValueError("vertex and frequency dimensions differ")
    return x, vertex_sigmas(x, k[None])[:, 0]


def _check_separation(sig, threshold):
    if len(sig) < 2:
        return
    s = np.sort(sig)
    gap = float(np.min(np.diff(s)))
    if gap < threshold:
        raise SigmaCollisionError(f"projected vertices collide (gap {gap:.3e} < {threshold:.1e}); needs jitter")


def simplex_ft(vertex_coords, k, threshold: float = COLLISION_THRESHOLD, backend=None) -> complex:
    """Fourier transform of the indicator of one j-simplex at frequency ``k``."""
    x, sig = _sigmas_of(vertex_coords, k)
    j = len(x) - 1
    if j > 3:
        raise ValueError("simplices of degree > 3 are not supported")
    _check_separation(sig, threshold)
    gamma = distortion_factor(x)
    kern = _backend.get(backend)
    val, _ = kern.transform_modes(x, np.arange(j + 1)[None], np.array([gamma]), np.asarray(k, float)[None])
    return complex((1j**j) * val[0])


def simplex_ft_specialized(vertex_coords, k, degree: int | None = None, threshold: float = COLLISION_THRESHOLD) -> complex:
    """Degree-specific closed forms for points, segments, triangles and tetrahedra.

    Denominators use k.(x_a - x_b) from coordinate differences, independently of
    the general divided-difference path.
    """
    x, sig = _sigmas_of(vertex_coords, k)
    j = len(x) - 1 if degree is None else int(degree)
    if j != len(x) - 1:
        raise ValueError(f"degree {j} needs {j + 1} vertices, got {len(x)}")
    _check_separation(sig, threshold)
    k = np.asarray(k, dtype=np.float64)
    ph = np.exp(-1j * sig)
    if j == 0:
        return complex(ph[0])
    gamma = distortion_factor(x)

    def w(a, b):
        return float(np.dot(k, x[a] - x[b]))

    if j == 1:
        return complex(1j * gamma * (ph[0] / w(0, 1) + ph[1] / w(1, 0)))
    if j == 2:
        return complex(
            -gamma
            * (
                ph[0] / (w(0, 1) * w(0, 2))
                + ph[1] / (w(1, 0) * w(1, 2))
                + ph[2] / (w(2, 0) * w(2, 1))
            )
        )
    if j == 3:
        return complex(
            -1j
            * gamma
            * (
                ph[0] / (w(0, 1) * w(0, 2) * w(0, 3))
                + ph[1] / (w(1, 0) * w(1, 2) * w(1, 3))
                + ph[2] / (w(2, 0) * w(2, 1) * w(2, 3))
                + ph[3] / (w(3, 0) * w(3, 1) * w(3, 2))
            )
        )
    raise ValueError(f"unsupported degree {j}")


# ---------------------------------------------------------------------------
# meshes


def _run(mesh, coeff, kvecs, aux, jitter, workers, backend, kahan, check_mask):
    """Evaluate the kernel, re-jittering once on a sigma collision."""
    kern = _backend.get(backend)
    workers = default_workers() if workers is None else int(workers)
    last = None
    for attempt in range(jitter.retries + 1):
        cfg = replace(jitter, seed=jitter.seed + attempt)
        moved = jitter_vertices(mesh, cfg)
        cache = SigmaCache(moved)
        c = coeff(moved)
        kern_k = kvecs
        if cfg.dc_policy == "jittered" and not check_mask.all():
            _, rng = _jitter_offsets(mesh.vertices, cfg.epsilon, cfg.seed)
            u = rng.normal(size=kvecs.shape[1])
            kern_k = kvecs.copy()
            kern_k[~check_mask] = 2.0 * np.pi * max(cfg.epsilon, 1e-12) * u / np.linalg.norm(u)
        values, gaps = kern.transform_modes(
            cache.vertices, cache.elements, c, kern_k, aux=aux, kahan=kahan, workers=workers
        )
        worst = float(np.min(gaps[check_mask])) if check_mask.any() else np.inf
        if worst >= cfg.collision_threshold:
            return values, cfg
        last = worst
    raise SigmaCollisionError(
        f"sigma collision (gap {last:.3e}) persists after {jitter.retries} re-jitter attempt(s)"
    )


def transform_modes(mesh: WeightedSimplexMesh, modes, jitter: JitterConfig | None = None, workers=None, backend=None, kahan=None):
    """Mesh transform at arbitrary integer mode vectors (k = 2*pi*m).

    Zero modes follow the jitter's DC policy exactly as on a grid.
    """
    if isinstance(mesh, BoundaryMesh):
        mesh = mesh.mesh
    jitter = jitter or JitterConfig()
    modes = np.atleast_2d(np.asarray(modes, dtype=np.float64))
    kahan = len(mesh) > KAHAN_MIN_ELEMENTS if kahan is None else kahan
    coeff = lambda m: m.densities * distortion_factors(m.simplices())
    mask = np.any(modes != 0, axis=1)
    values, _ = _run(mesh, coeff, 2 * np.pi * modes, False, jitter, workers, backend, kahan, mask)
    values = (1j**mesh.degree) * values
    if jitter.dc_policy == "analytic":
        values[~mask] = float(np.dot(mesh.densities, contents(mesh.simplices())))
    return values


def boundary_transform_modes(boundary, modes, jitter: JitterConfig | None = None, density: float = 1.0, workers=None, backend=None, kahan=None):
    """Enclosed-solid transform at arbitrary integer mode vectors."""
    boundary = validate_boundary(boundary)
    mesh = boundary.mesh
    d = mesh.dimension
    jitter = jitter or JitterConfig()
    modes = np.atleast_2d(np.asarray(modes, dtype=np.float64))
    kahan = len(mesh) > KAHAN_MIN_ELEMENTS if kahan is None else kahan
    coeff = lambda m: density * signed_distortions(m.simplices())
    mask = np.any(modes != 0, axis=1)
    values, _ = _run(mesh, coeff, 2 * np.pi * modes, True, jitter, workers, backend, kahan, mask)
    values = (1j**d) * values
    if jitter.dc_policy == "analytic":
        values[~mask] = density * float(np.sum(signed_distortions(mesh.simplices()))) / math.factorial(d)
    return values


def _dc_setup(grid, jitter):
    kvecs = grid.kvectors()
    dc = int(np.ravel_multi_index(grid.dc_index(), grid.resolution))
    mask = np.ones(len(kvecs), dtype=bool)
    mask[dc] = False
    return kvecs, dc, mask


def mesh_ft(mesh: WeightedSimplexMesh, grid: KGridSpec, jitter: JitterConfig | None = None, workers=None, backend=None, kahan=None) -> SpectralGrid:
    """F(k) = sum_n rho_n F_n(k) on every mode of ``grid``."""
    if isinstance(mesh, BoundaryMesh):
        mesh = mesh.mesh
    jitter = jitter or JitterConfig()
    if grid.dimension != mesh.dimension:
        raise ValueError(f"{grid.dimension}D grid for a {mesh.dimension}D mesh")
    kahan = len(mesh) > KAHAN_MIN_ELEMENTS if kahan is None else kahan
    kvecs, dc, mask = _dc_setup(grid, jitter)
    coeff = lambda m: m.densities * distortion_factors(m.simplices())
    values, used = _run(mesh, coeff, kvecs, False, jitter, workers, backend, kahan, mask)
    values = (1j**mesh.degree) * values
    if jitter.dc_policy == "analytic":
        values[dc] = float(np.dot(mesh.densities, contents(mesh.simplices())))
    meta = {
        "degree": mesh.degree,
        "element_count": len(mesh),
        "seed": used.seed,
        "epsilon": used.epsilon,
        "dc_policy": used.dc_policy,
        "aux_node": False,
        "degenerate_elements": count_degenerate(mesh),
    }
    return SpectralGrid(grid, values.reshape(grid.resolution), meta)


def auxnode_ft(boundary, grid: KGridSpec, jitter: JitterConfig | None = None, density: float = 1.0, workers=None, backend=None, kahan=None) -> SpectralGrid:
    """Transform of the uniform solid enclosed by an oriented watertight boundary."""
    boundary = validate_boundary(boundary)
    mesh = boundary.mesh
    jitter = jitter or JitterConfig()
    d = mesh.dimension
    if grid.dimension != d:
        raise ValueError(f"{grid.dimension}D grid for a {d}D boundary")
    kahan = len(mesh) > KAHAN_MIN_ELEMENTS if kahan is None else kahan
    kvecs, dc, mask = _dc_setup(grid, jitter)
    coeff = lambda m: density * signed_distortions(m.simplices())
    values, used = _run(mesh, coeff, kvecs, True, jitter, workers, backend, kahan, mask)
    values = (1j**d) * values
    if jitter.dc_policy == "analytic":
        values[dc] = density * float(np.sum(signed_distortions(mesh.simplices()))) / math.factorial(d)
    meta = {
        "degree": d,
        "element_count": len(mesh),
        "seed": used.seed,
        "epsilon": used.epsilon,
        "dc_policy": used.dc_policy,
        "aux_node": True,
        "degenerate_elements": count_degenerate(mesh),
    }
    return SpectralGrid(grid, values.reshape(grid.resolution), meta)
