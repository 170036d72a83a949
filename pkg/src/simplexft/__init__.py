"""Exact Fourier transforms of weighted simplex meshes and spectral shape fields."""

__version__ = "0.1.0"

from ._backend import available as available_backends
from .baselines import polygonize_raster, rasterize_binary, rasterize_distance, read_pgm
from .contour import extract_contour
from .mesh import (
    AffineMap,
    BoundaryDefectError,
    BoundaryMesh,
    DegenerateBoundsError,
    MeshFormatError,
    WeightedSimplexMesh,
    check_boundary,
    content,
    distortion_factor,
    load_mesh,
    normalize_to_unit_cell,
    save_mesh,
    signed_distortion,
    validate_boundary,
)
from .nuft import (
    JitterConfig,
    KGridSpec,
    SigmaCollisionError,
    SpectralGrid,
    auxnode_ft,
    mesh_ft,
    simplex_ft,
    simplex_ft_specialized,
)
from .oracle import QuadratureSpec, quad_polytope_ft, quad_simplex_ft
from .recon import FidelityReport, fidelity_sweep, iou
from .spectral import ScalarField, inverse_transform, upsample
