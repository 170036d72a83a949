"""Shape recovery from fields and volumetric IoU against the ground truth."""

from __future__ import annotations

import csv
import io
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .baselines import rasterize_binary, rasterize_distance, upsample_linear
from .contour import drop_small_components, extract_contour
from .geometry import points_inside
from .mesh import BoundaryMesh, normalize_to_unit_cell, validate_boundary
from .nuft import JitterConfig, KGridSpec, auxnode_ft, default_workers
from .spectral import ScalarField, inverse_transform, upsample

CSV_HEADER = ("rep", "resolution", "iou", "rel_error", "stderr", "samples", "seed")
REPRESENTATIONS = ("nuft", "binary", "distance")
MIN_COMPONENT = 1e-3


class SweepCellError(RuntimeError):
    """A sweep cell failed; ``cause`` keeps the original error."""

    def __init__(self, rep, resolution, cause):
        super().__init__(f"rep={rep} resolution={resolution}: {type(cause).__name__}: {cause}")
        self.rep = rep
        self.resolution = resolution
        self.cause = cause


class IoUResult(NamedTuple):
    iou: float
    rel_error: float
    stderr: float
    samples: int


def _stratified_points(lo, hi, samples, rng):
    """One uniform point per cell of an m^d grid over the box, m^d >= samples."""
    d = len(lo)
    m = int(np.ceil(samples ** (1.0 / d) - 1e-9))
    idx = np.indices((m,) * d).reshape(d, -1).T
    u = (idx + rng.random(idx.shape)) / m
    return lo + u * (hi - lo)


def iou(ground_truth, reconstructed, samples: int = 1_000_000, seed: int = 0) -> IoUResult:
    """Volumetric IoU by stratified sampling of the joint bounding box.

    ``rel_error`` is the symmetric-difference volume over the ground-truth
    volume; ``stderr`` is the binomial standard error sqrt(IoU (1 - IoU) / n_union).
    An empty reconstruction is allowed and gives IoU 0.
    """
    gt = validate_boundary(ground_truth)
    rec = reconstructed if (isinstance(reconstructed, BoundaryMesh) and len(reconstructed) == 0) else validate_boundary(reconstructed)
    boxes = [gt.mesh.vertices]
    if len(rec):
        boxes.append(rec.mesh.vertices)
    allv = np.concatenate(boxes)
    lo, hi = allv.min(axis=0), allv.max(axis=0)
    rng = np.random.default_rng(seed)
    pts = _stratified_points(lo, hi, samples, rng)
    a = points_inside(gt, pts, seed=seed)
    b = points_inside(rec, pts, seed=seed) if len(rec) else np.zeros(len(pts), dtype=bool)
    n = len(pts)
    inter = int(np.count_nonzero(a & b))
    union = int(np.count_nonzero(a | b))
    value = inter / union if union else 1.0
    stderr = float(np.sqrt(value * (1.0 - value) / union)) if union else 0.0
    box_volume = float(np.prod(hi - lo))
    gt_volume = abs(gt.signed_measure)
    sym = (union - inter) / n * box_volume
    rel = sym / gt_volume if gt_volume > 0 else float("inf")
    return IoUResult(float(value), float(rel), stderr, n)


@dataclass
class SweepConfig:
    samples: int = 1_000_000
    seed: int = 0
    upsample: int = 4
    epsilon: float = 1e-6
    min_component: float = MIN_COMPONENT
    normalize: bool = True
    workers: int | None = None
    keep_meshes: bool = False


@dataclass
class FidelityRow:
    rep: str
    resolution: int
    iou: float
    rel_error: float
    stderr: float
    samples: int
    seed: int
    discarded: int = 0
    mesh: BoundaryMesh | None = field(default=None, repr=False)


@dataclass
class FidelityReport:
    rows: list
    min_component: float = MIN_COMPONENT

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.rep, r.resolution, repr(r.iou), repr(r.rel_error), repr(r.stderr), r.samples, r.seed])
        return buf.getvalue()

    def row(self, rep, resolution) -> FidelityRow:
        for r in self.rows:
            if r.rep == rep and r.resolution == resolution:
                return r
        raise KeyError((rep, resolution))


def cell_seed(seed: int, rep: str, resolution: int) -> int:
    """Sampling seed of one sweep cell, independent of scheduling."""
    ss = np.random.SeedSequence([int(seed), REPRESENTATIONS.index(rep), int(resolution)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def reconstruction_field(gt: BoundaryMesh, rep: str, n: int, config: SweepConfig) -> tuple[ScalarField, float]:
    """Fine field and iso level for one representation at base resolution n."""
    d = gt.dimension
    if rep == "nuft":
        jit = JitterConfig(epsilon=config.epsilon, seed=config.seed)
        spec = auxnode_ft(gt, KGridSpec((n,) * d), jit, workers=1)
        return inverse_transform(upsample(spec, (config.upsample * n,) * d)), 0.5
    if rep == "binary":
        return upsample_linear(rasterize_binary(gt, n, seed=config.seed), config.upsample), 0.5
    if rep == "distance":
        sdf = rasterize_distance(gt, n, signed=True, seed=config.seed)
        # larger is inside for contouring
        inside = ScalarField(-sdf.values, "distance", meta=sdf.meta)
        return upsample_linear(inside, config.upsample), 0.0
    raise ValueError(f"unknown representation {rep!r}")


def _cell(gt, rep, n, config):
    try:
        fine, level = reconstruction_field(gt, rep, n, config)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rec = extract_contour(fine, level)
        rec, dropped = drop_small_components(rec, config.min_component)
        s = cell_seed(config.seed, rep, n)
        res = iou(gt, rec, config.samples, s)
    except Exception as exc:
        raise SweepCellError(rep, n, exc) from exc
    return FidelityRow(rep, n, res.iou, res.rel_error, res.stderr, res.samples, s, dropped,
                       rec if config.keep_meshes else None)


def fidelity_sweep(mesh, resolutions, representations=("nuft", "binary"), config: SweepConfig | None = None) -> FidelityReport:
    """IoU and relative volume error of every (representation, resolution) pair."""
    config = config or SweepConfig()
    gt = validate_boundary(mesh)
    if config.normalize:
        normed, _ = normalize_to_unit_cell(gt.mesh)
        gt = validate_boundary(normed)
    for rep in representations:
        if rep not in REPRESENTATIONS:
            raise ValueError(f"unknown representation {rep!r}")
    jobs = [(rep, int(n)) for rep in representations for n in resolutions]
    workers = default_workers() if config.workers is None else max(1, int(config.workers))
    if workers == 1 or len(jobs) == 1:
        rows = [_cell(gt, rep, n, config) for rep, n in jobs]
    else:
        with ThreadPoolExecutor(min(workers, len(jobs))) as pool:
            rows = list(pool.map(lambda job: _cell(gt, job[0], job[1], config), jobs))
    return FidelityReport(rows, config.min_component)


def normalize_surface_field(field: ScalarField) -> ScalarField:
    """Scale a surface-density field to max 1 so iso 0.5 is meaningful."""
    peak = float(np.max(field.values))
    vals = field.values / peak if peak > 0 else field.values
    meta = dict(field.meta)
    meta["max_normalized"] = True
    return ScalarField(vals, field.provenance, field.affine, meta)
