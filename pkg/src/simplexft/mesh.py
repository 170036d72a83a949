"""Weighted simplex meshes: loading, normalization, contents and boundary checks."""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

RADICAND_TOL = 1e-12


class MeshFormatError(ValueError):
    """A mesh file could not be parsed or violates the mesh invariants."""


class DegenerateBoundsError(ValueError):
    pass


class BoundaryDefectError(ValueError):
    """Raised by :func:`validate_boundary`; carries the full defect report."""

    def __init__(self, report: "DefectReport"):
        self.report = report
        kinds = ", ".join(sorted({d["kind"] for d in report.defects})) or "unknown"
        super().__init__(f"invalid boundary mesh ({kinds})")


@dataclass(frozen=True)
class WeightedSimplexMesh:
    """Homogeneous j-simplex mesh in R^d with one density per element."""

    vertices: np.ndarray
    elements: np.ndarray
    densities: np.ndarray
    degree: int

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] not in (2, 3):
            raise MeshFormatError(f"vertices must be (V, 2) or (V, 3), got {v.shape}")
        j = int(self.degree)
        if j not in (0, 1, 2, 3):
            raise MeshFormatError(f"degree must be 0..3, got {j}")
        if j > v.shape[1]:
            raise MeshFormatError(f"a {j}-simplex cannot live in {v.shape[1]} dimensions")
        e = np.array(self.elements, dtype=np.int64).reshape(-1, j + 1)
        if e.size and (e.min() < 0 or e.max() >= len(v)):
            raise MeshFormatError("element references a vertex index out of range")
        if j > 0 and e.size:
            s = np.sort(e, axis=1)
            if np.any(s[:, 1:] == s[:, :-1]):
                raise MeshFormatError("element with repeated vertex index")
        rho = self.densities
        rho = np.ones(len(e)) if rho is None else np.array(rho, dtype=np.float64).reshape(-1)
        if rho.shape != (len(e),):
            raise MeshFormatError(f"expected {len(e)} densities, got {rho.size}")
        if not np.all(np.isfinite(v)) or not np.all(np.isfinite(rho)):
            raise MeshFormatError("non-finite coordinates or densities")
        for a in (v, e, rho):
            a.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "elements", e)
        object.__setattr__(self, "densities", rho)
        object.__setattr__(self, "degree", j)

    @classmethod
    def from_arrays(cls, vertices, elements=None, densities=None, degree=None):
        v = np.asarray(vertices, dtype=np.float64)
        if elements is None:
            degree = 0 if degree is None else degree
            if degree != 0:
                raise MeshFormatError("elements are required for degree > 0")
            elements = np.arange(len(v)).reshape(-1, 1)
        e = np.asarray(elements, dtype=np.int64)
        if degree is None:
            degree = e.shape[1] - 1
        return cls(v, e, densities, degree)

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]

    def __len__(self):
        return len(self.elements)

    def simplices(self) -> np.ndarray:
        """Element coordinates, shape (N, j+1, d)."""
        return self.vertices[self.elements]

    def with_vertices(self, vertices) -> "WeightedSimplexMesh":
        return WeightedSimplexMesh(vertices, self.elements, self.densities, self.degree)

    def with_densities(self, densities) -> "WeightedSimplexMesh":
        return WeightedSimplexMesh(self.vertices, self.elements, densities, self.degree)

    def total_mass(self) -> float:
        return float(np.dot(self.densities, contents(self.simplices())))

    def vertex_adjacency(self):
        """Sparse vertex graph whose edges join vertices of a common element."""
        nv = len(self.vertices)
        e = self.elements
        rows, cols = [], []
        for a in range(e.shape[1]):
            for b in range(e.shape[1]):
                if a != b:
                    rows.append(e[:, a])
                    cols.append(e[:, b])
        if not rows:
            return coo_matrix((nv, nv)).tocsr()
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        return coo_matrix((np.ones(len(r)), (r, c)), shape=(nv, nv)).tocsr()

    def bfs_vertex_order(self) -> np.ndarray:
        """Vertex permutation visiting each connected component breadth-first."""
        graph = self.vertex_adjacency()
        nv = len(self.vertices)
        seen = np.zeros(nv, dtype=bool)
        order = []
        for start in range(nv):
            if seen[start]:
                continue
            comp = breadth_first_order(graph, start, directed=False, return_predecessors=False)
            seen[comp] = True
            order.append(comp)
        return np.concatenate(order) if order else np.zeros(0, dtype=np.int64)

    def skeleton(self, degree: int) -> "WeightedSimplexMesh":
        """Unique ``degree``-faces of the elements, each with unit density."""
        if degree == self.degree:
            return self
        if not 0 <= degree < self.degree:
            raise MeshFormatError(f"cannot take the {degree}-skeleton of a degree-{self.degree} mesh")
        faces = [self.elements[:, list(c)] for c in itertools.combinations(range(self.degree + 1), degree + 1)]
        f = np.unique(np.sort(np.concatenate(faces), axis=1), axis=0)
        return WeightedSimplexMesh(self.vertices, f, None, degree)

    def concatenate(self, other: "WeightedSimplexMesh") -> "WeightedSimplexMesh":
        if other.degree != self.degree or other.dimension != self.dimension:
            raise MeshFormatError("can only concatenate meshes of equal degree and dimension")
        return WeightedSimplexMesh(
            np.vstack([self.vertices, other.vertices]),
            np.vstack([self.elements, other.elements + len(self.vertices)]),
            np.concatenate([self.densities, other.densities]),
            self.degree,
        )


@dataclass(frozen=True)
class DefectReport:
    valid: bool
    signed_measure: float
    defects: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {"valid": self.valid, "signed_measure": self.signed_measure, "defects": self.defects},
            indent=2,
        )


@dataclass(frozen=True)
class BoundaryMesh:
    """Watertight, consistently oriented (j-1)-simplex mesh bounding a solid.

    ``orientation`` holds +1 for outward elements; :meth:`reversed` produces an
    explicitly inward copy (all -1).
    """

    mesh: WeightedSimplexMesh
    orientation: np.ndarray
    signed_measure: float

    @property
    def dimension(self) -> int:
        return self.mesh.dimension

    @property
    def degree(self) -> int:
        return self.mesh.degree

    @property
    def solid_degree(self) -> int:
        return self.mesh.degree + 1

    def __len__(self):
        return len(self.mesh)

    def reversed(self) -> "BoundaryMesh":
        e = self.mesh.elements[:, ::-1]
        m = WeightedSimplexMesh(self.mesh.vertices, e, self.mesh.densities, self.mesh.degree)
        return BoundaryMesh(m, -self.orientation, -self.signed_measure)

    @classmethod
    def empty(cls, dimension: int) -> "BoundaryMesh":
        m = WeightedSimplexMesh(np.zeros((0, dimension)), np.zeros((0, dimension), int), None, dimension - 1)
        return cls(m, np.zeros(0), 0.0)


@dataclass(frozen=True)
class AffineMap:
    """x_normalized = scale * x + translation."""

    scale: float
    translation: tuple

    def apply(self, x):
        return self.scale * np.asarray(x, dtype=np.float64) + np.asarray(self.translation)

    def invert(self, y):
        return (np.asarray(y, dtype=np.float64) - np.asarray(self.translation)) / self.scale

    def to_dict(self) -> dict:
        return {"scale": self.scale, "translation": list(self.translation)}

    @classmethod
    def identity(cls, d: int) -> "AffineMap":
        return cls(1.0, (0.0,) * d)

    @classmethod
    def from_dict(cls, data) -> "AffineMap":
        return cls(float(data["scale"]), tuple(float(t) for t in data["translation"]))


# ---------------------------------------------------------------------------
# contents


def cayley_menger(simplices: np.ndarray) -> np.ndarray:
    """Bordered squared-distance matrices, shape (N, j+2, j+2)."""
    x = np.asarray(simplices, dtype=np.float64)
    diff = x[:, :, None, :] - x[:, None, :, :]
    d2 = np.einsum("nabk,nabk->nab", diff, diff)
    n, m = d2.shape[:2]
    b = np.ones((n, m + 1, m + 1))
    b[:, 0, 0] = 0.0
    b[:, 1:, 1:] = d2
    return b


def contents(simplices: np.ndarray) -> np.ndarray:
    """Cayley-Menger content of each simplex in a (N, j+1, d) stack."""
    x = np.asarray(simplices, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError("expected a (N, j+1, d) array of simplices")
    n, jp1 = x.shape[:2]
    j = jp1 - 1
    if j == 0:
        return np.ones(n)
    if n == 0:
        return np.zeros(0)
    det = np.linalg.det(cayley_menger(x))
    radicand = (-1) ** (j + 1) / (2**j * math.factorial(j) ** 2) * det
    # round-off scale: the squared content of a simplex with the longest edge
    edges = x[:, :, None, :] - x[:, None, :, :]
    scale = np.max(np.einsum("nabk,nabk->nab", edges, edges).reshape(n, -1), axis=1) ** j
    scale = np.where(scale > 0, scale, 1.0)
    bad = radicand < -RADICAND_TOL * scale
    if np.any(bad):
        raise ValueError(
            f"negative Cayley-Menger radicand for simplex {int(np.argmax(bad))}: "
            "distances are numerically inconsistent"
        )
    return np.sqrt(np.clip(radicand, 0.0, None))


def content(vertex_coords: Sequence) -> float:
    """Content (length / area / volume) of one simplex; 1 for a point."""
    x = np.asarray(vertex_coords, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[0] - 1 > 3:
        raise ValueError("simplices of degree > 3 are not supported")
    return float(contents(x[None])[0])


def distortion_factors(simplices: np.ndarray) -> np.ndarray:
    x = np.asarray(simplices)
    return math.factorial(x.shape[1] - 1) * contents(x)


def distortion_factor(vertex_coords: Sequence) -> float:
    """Content ratio to the unit orthogonal simplex, ``j! * content``."""
    x = np.asarray(vertex_coords, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    return math.factorial(x.shape[0] - 1) * content(x)


def signed_distortions(boundary_simplices: np.ndarray) -> np.ndarray:
    """det([x_1 .. x_j]) for each (j, j) stack; the origin is the auxiliary node."""
    x = np.asarray(boundary_simplices, dtype=np.float64)
    if x.shape[1] != x.shape[2]:
        raise ValueError("signed distortion needs j points in R^j")
    # rows of x are the points; det(X) == det(X^T)
    return np.linalg.det(x) if len(x) else np.zeros(0)


def signed_distortion(boundary_element_coords: Sequence) -> float:
    x = np.asarray(boundary_element_coords, dtype=np.float64)
    return float(signed_distortions(x[None])[0])


# ---------------------------------------------------------------------------
# normalization


def normalize_to_unit_cell(mesh: WeightedSimplexMesh, margin: float = 0.125):
    """Scale and center ``mesh`` into [margin, 1 - margin]^d.

    Returns the normalized mesh and the :class:`AffineMap` that produced it.
    A mesh with zero extent is only accepted when it is a point set; it is then
    translated to the cell center without scaling.
    """
    if not 0.0 <= margin < 0.5:
        raise ValueError("margin must be in [0, 0.5)")
    v = mesh.vertices
    if len(v) == 0:
        raise ValueError("cannot normalize an empty mesh")
    lo, hi = v.min(axis=0), v.max(axis=0)
    extent = float(np.max(hi - lo))
    center = 0.5 * (lo + hi)
    d = mesh.dimension
    if extent == 0.0:
        if mesh.degree != 0:
            raise DegenerateBoundsError("mesh has zero extent along every axis")
        scale = 1.0
    else:
        scale = (1.0 - 2.0 * margin) / extent
    translation = 0.5 - scale * center
    if scale == 1.0 and np.all(translation == 0.0):
        affine = AffineMap.identity(d)
        return mesh, affine
    affine = AffineMap(float(scale), tuple(float(t) for t in translation))
    return mesh.with_vertices(affine.apply(v)), affine


# ---------------------------------------------------------------------------
# boundary validation


def _faces_of(elements: np.ndarray):
    """Directed (j-2)-faces of each element: vertices for segments, edges for triangles."""
    if elements.shape[1] == 2:
        # start vertex carries -1, end vertex +1
        return [(elements[:, [0]], -1), (elements[:, [1]], +1)]
    e = elements
    return [(e[:, [0, 1]], +1), (e[:, [1, 2]], +1), (e[:, [2, 0]], +1)]


def _signed_measure(mesh: WeightedSimplexMesh) -> float:
    x = mesh.simplices()
    if len(x) == 0:
        return 0.0
    return float(np.sum(signed_distortions(x)) / math.factorial(mesh.degree + 1))


def check_boundary(mesh: WeightedSimplexMesh) -> DefectReport:
    """Watertightness and orientation report for a candidate boundary mesh."""
    j, d = mesh.degree, mesh.dimension
    defects = []
    if j not in (1, 2) or d != j + 1:
        defects.append({"kind": "unsupported", "elements": [], "detail": f"degree {j} in R^{d}"})
        return DefectReport(False, 0.0, defects)
    e = mesh.elements
    n = len(e)
    if n == 0:
        return DefectReport(False, 0.0, [{"kind": "empty", "elements": []}])

    # key each (j-2)-face canonically and record the incidences
    keys, owners, signs = [], [], []
    for faces, sign in _faces_of(e):
        if faces.shape[1] == 1:
            key = faces[:, 0]
            s = np.full(n, sign)
        else:
            a, b = faces[:, 0], faces[:, 1]
            key = np.minimum(a, b) * (len(mesh.vertices) + 1) + np.maximum(a, b)
            s = np.where(a < b, 1, -1)
        keys.append(key)
        owners.append(np.arange(n))
        signs.append(s)
    keys = np.concatenate(keys)
    owners = np.concatenate(owners)
    signs = np.concatenate(signs)
    order = np.argsort(keys, kind="stable")
    keys, owners, signs = keys[order], owners[order], signs[order]
    uniq, start, counts = np.unique(keys, return_index=True, return_counts=True)

    bad_faces = counts != 2
    if np.any(bad_faces):
        elems = set()
        for s0, c in zip(start[bad_faces], counts[bad_faces]):
            elems.update(owners[s0 : s0 + c].tolist())
        defects.append({"kind": "non_manifold", "elements": sorted(elems)})

    # element adjacency across faces shared by exactly two elements
    pair_start = start[~bad_faces]
    ea, eb = owners[pair_start], owners[pair_start + 1]
    # consistent neighbours traverse the shared face in opposite directions
    consistent = signs[pair_start] != signs[pair_start + 1]
    graph = coo_matrix((np.ones(len(ea)), (ea, eb)), shape=(n, n))
    ncomp, labels = connected_components(graph, directed=False)

    # propagate a relative orientation from each component's first element
    flip = np.zeros(n, dtype=np.int8)
    visited = np.zeros(n, dtype=bool)
    nbrs = [[] for _ in range(n)]
    for a, b, c in zip(ea.tolist(), eb.tolist(), consistent.tolist()):
        nbrs[a].append((b, c))
        nbrs[b].append((a, c))
    conflict = set()
    for root in range(n):
        if visited[root]:
            continue
        visited[root] = True
        queue = [root]
        members = [root]
        while queue:
            cur = queue.pop()
            for nb, c in nbrs[cur]:
                want = flip[cur] if c else 1 - flip[cur]
                if not visited[nb]:
                    visited[nb] = True
                    flip[nb] = want
                    queue.append(nb)
                    members.append(nb)
                elif flip[nb] != want:
                    conflict.add(nb)
        members = np.array(members)
        flipped = members[flip[members] == 1]
        if 0 < len(flipped):
            # report the minority as the offending elements
            kept = members[flip[members] == 0]
            offenders = flipped if len(flipped) <= len(kept) else kept
            defects.append({"kind": "inconsistent_orientation", "elements": sorted(offenders.tolist())})
    if conflict and not any(d["kind"] == "inconsistent_orientation" for d in defects):
        defects.append({"kind": "inconsistent_orientation", "elements": sorted(conflict)})

    measure = _signed_measure(mesh)
    if not defects and measure <= 0.0:
        defects.append(
            {
                "kind": "inward_orientation" if measure < 0 else "zero_measure",
                "elements": list(range(n)),
            }
        )
    return DefectReport(not defects, measure, defects)


def validate_boundary(mesh: WeightedSimplexMesh) -> BoundaryMesh:
    """Return a :class:`BoundaryMesh` or raise :class:`BoundaryDefectError`."""
    if isinstance(mesh, BoundaryMesh):
        return mesh
    report = check_boundary(mesh)
    if not report.valid:
        raise BoundaryDefectError(report)
    return BoundaryMesh(mesh, np.ones(len(mesh)), report.signed_measure)


def count_degenerate(mesh: WeightedSimplexMesh, rtol: float = 1e-14) -> int:
    """Number of zero-content elements (kept, but contributing nothing)."""
    if mesh.degree == 0 or len(mesh) == 0:
        return 0
    x = mesh.simplices()
    c = contents(x)
    lengths = np.linalg.norm(x[:, 1:] - x[:, :1], axis=2).max(axis=1)
    return int(np.sum(c <= rtol * np.maximum(lengths, 1e-300) ** mesh.degree))


# ---------------------------------------------------------------------------
# file formats

_FORMATS = {".off": "off", ".obj": "obj", ".xyz": "xyz", ".json": "json"}


def _fan(face):
    return [(face[0], face[i], face[i + 1]) for i in range(1, len(face) - 1)]


def _floats(tokens, path, lineno):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise MeshFormatError(f"{path}:{lineno}: malformed numeric record") from None


def _finish(vertices, elements, densities, degree, dimension, path):
    if not vertices:
        raise MeshFormatError(f"{path}: no vertices")
    width = {len(v) for v in vertices}
    if len(width) != 1:
        raise MeshFormatError(f"{path}: vertices have inconsistent coordinate counts")
    v = np.array(vertices, dtype=np.float64)
    if dimension is None:
        dimension = v.shape[1]
    if dimension == 2 and v.shape[1] == 3:
        if np.any(v[:, 2] != 0.0):
            raise MeshFormatError(f"{path}: 2D requested but z coordinates are non-zero")
        v = v[:, :2]
    elif dimension != v.shape[1]:
        raise MeshFormatError(f"{path}: cannot read {v.shape[1]}D coordinates as {dimension}D")
    if degree is None:
        degree = 0
        elements = [[i] for i in range(len(v))]
    return WeightedSimplexMesh(v, np.array(elements, dtype=np.int64).reshape(-1, degree + 1), densities, degree)


def _read_off(path, dimension):
    tokens_lines = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            tokens_lines.append(line.split())
    if not tokens_lines:
        raise MeshFormatError(f"{path}: empty file")
    head = tokens_lines[0]
    if head[0].upper() != "OFF":
        raise MeshFormatError(f"{path}: missing OFF header")
    rest = tokens_lines[1:] if len(head) == 1 else [head[1:]] + tokens_lines[1:]
    try:
        nv, nf = int(rest[0][0]), int(rest[0][1])
    except (IndexError, ValueError):
        raise MeshFormatError(f"{path}: malformed OFF counts line") from None
    if len(rest) < 1 + nv + nf:
        raise MeshFormatError(f"{path}: truncated OFF file")
    verts = [_floats(r[:3], path, i + 2) for i, r in enumerate(rest[1 : 1 + nv])]
    elements, degree = [], None
    for i, r in enumerate(rest[1 + nv : 1 + nv + nf]):
        try:
            k = int(r[0])
            idx = [int(t) for t in r[1 : 1 + k]]
        except ValueError:
            raise MeshFormatError(f"{path}: malformed face record {i}") from None
        if len(idx) != k or k < 1:
            raise MeshFormatError(f"{path}: face record {i} has wrong vertex count")
        deg = min(k - 1, 2)
        if degree is not None and deg != degree:
            raise MeshFormatError(f"{path}: mixed element degrees in one file")
        degree = deg
        elements.extend(_fan(idx) if k > 3 else [tuple(idx)])
    for el in elements:
        if any(i < 0 or i >= nv for i in el):
            raise MeshFormatError(f"{path}: face index out of range")
    return _finish(verts, elements, None, degree, dimension, path)


def _read_obj(path, dimension):
    verts, elements, degree = [], [], None

    def index(tok, lineno):
        try:
            i = int(tok.split("/")[0])
        except ValueError:
            raise MeshFormatError(f"{path}:{lineno}: malformed index {tok!r}") from None
        i = i - 1 if i > 0 else len(verts) + i
        if i < 0 or i >= len(verts):
            raise MeshFormatError(f"{path}:{lineno}: index out of range")
        return i

    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        tag, args = parts[0], parts[1:]
        if tag == "v":
            if len(args) < 2:
                raise MeshFormatError(f"{path}:{lineno}: vertex needs at least 2 coordinates")
            verts.append(_floats(args[:3], path, lineno))
            continue
        if tag not in ("p", "l", "f"):
            continue
        deg = {"p": 0, "l": 1, "f": 2}[tag]
        if degree is not None and deg != degree:
            raise MeshFormatError(f"{path}:{lineno}: mixed element degrees in one file")
        degree = deg
        idx = [index(t, lineno) for t in args]
        if tag == "p":
            elements.extend([i] for i in idx)
        elif tag == "l":
            if len(idx) < 2:
                raise MeshFormatError(f"{path}:{lineno}: line needs two vertices")
            elements.extend((idx[i], idx[i + 1]) for i in range(len(idx) - 1))
        else:
            if len(idx) < 3:
                raise MeshFormatError(f"{path}:{lineno}: face needs three vertices")
            elements.extend(_fan(idx))
    return _finish(verts, elements, None, degree, dimension, path)


def _read_xyz(path, dimension):
    verts, rho = [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        if len(parts) not in (3, 4):
            raise MeshFormatError(f"{path}:{lineno}: expected 'x y z [density]'")
        vals = _floats(parts, path, lineno)
        verts.append(vals[:3])
        rho.append(vals[3] if len(vals) == 4 else 1.0)
    return _finish(verts, None, rho, None, dimension, path)


def _read_json(path, dimension):
    try:
        data = json.loads(Path(path).read_text())
        d = int(data["dimension"])
        j = int(data["degree"])
        verts = data["vertices"]
        elems = data.get("elements")
        rho = data.get("densities")
    except (KeyError, TypeError, ValueError) as exc:
        raise MeshFormatError(f"{path}: malformed weighted-JSON mesh ({exc})") from None
    if elems is None:
        if j != 0:
            raise MeshFormatError(f"{path}: elements are required for degree {j}")
        elems = [[i] for i in range(len(verts))]
    v = np.array(verts, dtype=np.float64)
    if v.ndim != 2 or v.shape[1] != d:
        raise MeshFormatError(f"{path}: vertices do not match dimension {d}")
    e = np.array(elems, dtype=np.int64)
    if e.ndim != 2 or e.shape[1] != j + 1:
        raise MeshFormatError(f"{path}: elements must have {j + 1} indices each")
    if dimension is not None and dimension != d:
        raise MeshFormatError(f"{path}: file is {d}D, {dimension}D requested")
    return WeightedSimplexMesh(v, e, rho, j)


def load_mesh(path, format: str | None = None, dimension: int | None = None) -> WeightedSimplexMesh:
    """Read an OFF, OBJ, XYZ or weighted-JSON mesh.

    ``format`` defaults to the file suffix. ``dimension=2`` drops an all-zero
    z column so planar loops can be stored in 3-coordinate formats.
    """
    path = Path(path)
    fmt = (format or _FORMATS.get(path.suffix.lower(), "")).lower()
    readers = {"off": _read_off, "obj": _read_obj, "xyz": _read_xyz, "json": _read_json}
    if fmt not in readers:
        raise MeshFormatError(f"{path}: unknown mesh format {fmt!r}")
    if not path.exists():
        raise FileNotFoundError(path)
    return readers[fmt](path, dimension)


def save_mesh(mesh, path, format: str | None = None) -> None:
    """Write a mesh (or a BoundaryMesh) as OFF, OBJ or weighted JSON."""
    if isinstance(mesh, BoundaryMesh):
        mesh = mesh.mesh
    path = Path(path)
    fmt = (format or _FORMATS.get(path.suffix.lower(), "json")).lower()
    v, e = mesh.vertices, mesh.elements
    if fmt == "json":
        data = {
            "dimension": mesh.dimension,
            "degree": mesh.degree,
            "vertices": v.tolist(),
            "elements": e.tolist(),
            "densities": mesh.densities.tolist(),
        }
        path.write_text(json.dumps(data))
        return
    v3 = v if v.shape[1] == 3 else np.column_stack([v, np.zeros(len(v))])
    lines = []
    if fmt == "off":
        if mesh.degree != 2:
            raise MeshFormatError("OFF output supports triangle meshes only")
        lines.append("OFF")
        lines.append(f"{len(v)} {len(e)} 0")
        lines += [f"{a!r} {b!r} {c!r}" for a, b, c in v3.tolist()]
        lines += ["3 " + " ".join(str(i) for i in f) for f in e.tolist()]
    elif fmt == "obj":
        tag = {0: "p", 1: "l", 2: "f"}.get(mesh.degree)
        if tag is None:
            raise MeshFormatError("OBJ output supports degrees 0-2")
        lines += [f"v {a!r} {b!r} {c!r}" for a, b, c in v3.tolist()]
        lines += [f"{tag} " + " ".join(str(i + 1) for i in f) for f in e.tolist()]
    elif fmt == "xyz":
        if mesh.degree != 0:
            raise MeshFormatError("XYZ output supports point sets only")
        pts = v3[e[:, 0]]
        lines += [f"{a!r} {b!r} {c!r} {r!r}" for (a, b, c), r in zip(pts.tolist(), mesh.densities.tolist())]
    else:
        raise MeshFormatError(f"unknown mesh format {fmt!r}")
    path.write_text("\n".join(lines) + "\n")


def warn_degenerate(mesh: WeightedSimplexMesh) -> int:
    count = count_degenerate(mesh)
    if count:
        warnings.warn(f"{count} zero-content element(s) contribute nothing to the transform", stacklevel=3)
    return count
