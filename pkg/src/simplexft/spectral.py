"""Physical-domain fields from spectra: truncated Fourier series and zero-padding."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.fft

from .mesh import AffineMap
from .nuft import KGridSpec, SpectralGrid, _jsonable, sidecar_path

FIELD_FORMAT = "simplexft.field"
RESIDUE_RTOL = 1e-9


class FieldFormatError(ValueError):
    pass


class NonHermitianSpectrumError(ArithmeticError):
    pass


@dataclass
class ScalarField:
    """Real samples at the cell centers (p + 0.5) / n of the unit cell."""

    values: np.ndarray
    provenance: str = "nuft"
    affine: AffineMap | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim not in (2, 3) or min(v.shape) < 2:
            raise ValueError(f"field needs 2 or 3 axes of at least 2 samples, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if self.provenance not in ("nuft", "binary", "distance"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        self.values = v

    @property
    def resolution(self) -> tuple:
        return self.values.shape

    @property
    def dimension(self) -> int:
        return self.values.ndim

    @property
    def spacing(self) -> tuple:
        return tuple(1.0 / n for n in self.values.shape)

    def cell_centers(self) -> np.ndarray:
        axes = [(np.arange(n) + 0.5) / n for n in self.values.shape]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def header(self) -> dict:
        head = {
            "format": FIELD_FORMAT,
            "version": 1,
            "resolution": list(self.resolution),
            "spacing": list(self.spacing),
            "provenance": self.provenance,
            "samples": "cell-center",
            "affine": self.affine.to_dict() if self.affine else None,
            "dtype": "<f8",
        }
        head.update(self.meta)
        return head

    def save(self, path) -> Path:
        path = Path(path)
        path.write_bytes(np.ascontiguousarray(self.values, dtype="<f8").tobytes())
        side = sidecar_path(path)
        side.write_text(json.dumps(_jsonable(self.header()), indent=2, sort_keys=True) + "\n")
        return side

    @classmethod
    def load(cls, path) -> "ScalarField":
        path = Path(path)
        try:
            head = json.loads(sidecar_path(path).read_text())
        except (OSError, ValueError) as exc:
            raise FieldFormatError(f"{path}: unreadable field header ({exc})") from None
        if head.get("format") != FIELD_FORMAT:
            raise FieldFormatError(f"{path}: not a field file")
        res = tuple(int(n) for n in head["resolution"])
        raw = path.read_bytes()
        if len(raw) != 8 * int(np.prod(res)):
            raise FieldFormatError(f"{path}: payload size does not match resolution {res}")
        values = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(res)
        affine = AffineMap.from_dict(head["affine"]) if head.get("affine") else None
        skip = {"format", "version", "resolution", "spacing", "provenance", "samples", "affine", "dtype"}
        meta = {k: v for k, v in head.items() if k not in skip}
        return cls(values, head["provenance"], affine, meta)


def _affine_of(spec: SpectralGrid):
    a = spec.meta.get("affine")
    if isinstance(a, AffineMap):
        return a
    return AffineMap.from_dict(a) if a else None


def raised_cosine(grid: KGridSpec) -> np.ndarray:
    """Separable Hann taper over the mode box (visualization only)."""
    w = np.ones(grid.resolution)
    for a, n in enumerate(grid.resolution):
        m = grid.axis_modes(a)
        shape = [1] * grid.dimension
        shape[a] = n
        w = w * (0.5 * (1.0 + np.cos(2.0 * np.pi * m / n))).reshape(shape)
    return w


def fourier_series(spec: SpectralGrid, window: bool = False) -> np.ndarray:
    """Complex sum_m F_m exp(2 pi i m . x_p) at every cell center x_p."""
    nat = spec.natural()
    vals = nat.values * raised_cosine(nat.grid) if window else nat.values
    shift = np.zeros(nat.grid.resolution)
    for a, n in enumerate(nat.grid.resolution):
        shape = [1] * nat.dimension
        shape[a] = n
        shift = shift + (nat.grid.axis_modes(a) / n).reshape(shape)
    twisted = vals * np.exp(1j * np.pi * shift)
    return scipy.fft.ifftn(twisted, norm="forward")


def evaluate_series(spec: SpectralGrid, points) -> np.ndarray:
    """Direct summation of the truncated series at arbitrary points (slow oracle)."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    modes = spec.grid.modes().astype(np.float64)
    coef = spec.values.reshape(-1)
    out = np.empty(len(pts), dtype=np.complex128)
    step = max(1, 2_000_000 // max(1, len(modes)))
    for a in range(0, len(pts), step):
        phase = np.exp(2j * np.pi * (pts[a : a + step] @ modes.T))
        out[a : a + step] = phase @ coef
    return out


def imaginary_residue(spec: SpectralGrid, series: np.ndarray | None = None) -> float:
    """max |Im f| over cells, counting only modes whose mirror is on the grid."""
    nat = spec.natural()
    _, paired = nat.grid.mirror()
    if paired.all():
        s = fourier_series(nat) if series is None else series
    else:
        masked = SpectralGrid(nat.grid, np.where(paired.reshape(nat.grid.resolution), nat.values, 0), nat.meta)
        s = fourier_series(masked)
    return float(np.max(np.abs(s.imag))) if s.size else 0.0


def inverse_transform(spec: SpectralGrid, window: bool = False, check: bool = True) -> ScalarField:
    """Real field sum_m F(2 pi m) exp(+2 pi i m . x) sampled at cell centers.

    The unpaired Nyquist modes of even grids enter through the real part, i.e.
    split evenly between +m and -m. The imaginary residue of the paired modes
    is recorded in ``meta["imag_residue"]``; above ``1e-9 * max|f|`` the
    spectrum is rejected as non-Hermitian.
    """
    series = fourier_series(spec, window=window)
    f = series.real
    residue = imaginary_residue(spec, series if not window else None)
    scale = float(np.max(np.abs(f))) if f.size else 0.0
    if check and residue > RESIDUE_RTOL * scale and residue > 0.0:
        raise NonHermitianSpectrumError(
            f"imaginary residue {residue:.3e} exceeds {RESIDUE_RTOL:g} * max|f| = {RESIDUE_RTOL * scale:.3e}"
        )
    meta = {"imag_residue": residue, "windowed": bool(window)}
    for key in ("degree", "seed", "dc_policy", "aux_node", "upsampled_from"):
        if key in spec.meta:
            meta[key] = spec.meta[key]
    return ScalarField(f, "nuft", _affine_of(spec), meta)


def upsample(spec: SpectralGrid, new_resolution) -> SpectralGrid:
    """Embed the spectrum in a larger zero-filled mode box.

    A mode whose mirror was missing on the old grid but exists on the new one
    is split into halves F/2 at m and conj(F)/2 at -m, which leaves the real
    field unchanged and keeps the new spectrum Hermitian.
    """
    new_res = tuple(int(n) for n in np.broadcast_to(new_resolution, (spec.dimension,)))
    old = spec.natural()
    if any(n < o for n, o in zip(new_res, old.grid.resolution)):
        raise ValueError(f"cannot shrink {old.grid.resolution} to {new_res}; truncation is not supported")
    if new_res == old.grid.resolution:
        return SpectralGrid(old.grid.with_layout(spec.grid.layout), spec.values.copy(), dict(spec.meta))
    new_grid = KGridSpec(new_res, "natural")
    out = np.zeros(new_res, dtype=np.complex128)
    modes = old.grid.modes()
    vals = old.values.reshape(-1)
    _, paired = old.grid.mirror()

    def index(m):
        return tuple(np.mod(m, np.array(new_res)).T)

    out[index(modes[paired])] = vals[paired]
    lone = modes[~paired]
    if len(lone):
        neg = -lone
        fits = np.all(neg >= -(np.array(new_res) // 2), axis=1) & np.all(neg <= (np.array(new_res) - 1) // 2, axis=1)
        lv = vals[~paired]
        out[index(lone[~fits])] = lv[~fits]
        np.add.at(out, index(lone[fits]), 0.5 * lv[fits])
        np.add.at(out, index(neg[fits]), 0.5 * np.conj(lv[fits]))
    meta = dict(spec.meta)
    meta["upsampled_from"] = list(old.grid.resolution)
    return SpectralGrid(new_grid, out, meta).to_layout(spec.grid.layout)
