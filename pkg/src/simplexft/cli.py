"""Command-line front end.

Every run writes its artifacts plus a JSON manifest holding the resolved
configuration; ``simplexft rerun MANIFEST`` repeats the run from the manifest
alone and checks the artifacts are byte-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import rasterize_binary, rasterize_distance, upsample_linear
from .contour import drop_small_components, extract_contour
from .mesh import (
    AffineMap,
    BoundaryDefectError,
    BoundaryMesh,
    WeightedSimplexMesh,
    check_boundary,
    load_mesh,
    normalize_to_unit_cell,
    save_mesh,
    validate_boundary,
    warn_degenerate,
)
from .nuft import (
    JitterConfig,
    KGridSpec,
    SpectralGrid,
    auxnode_ft,
    boundary_transform_modes,
    mesh_ft,
    sidecar_path,
    transform_modes,
)
from .oracle import QuadratureSpec, quad_polytope_ft_many, quad_simplex_ft_many
from .recon import MIN_COMPONENT, SweepCellError, SweepConfig, fidelity_sweep, iou, normalize_surface_field
from .spectral import ScalarField, inverse_transform, upsample

MANIFEST_FORMAT = "simplexft.manifest"
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
# flags that never change an artifact and so stay out of manifests
_VOLATILE = {"command", "workers", "manifest", "handler"}


class CommandError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def _ints(text: str) -> list:
    try:
        return [int(t) for t in str(text).replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _names(text: str) -> list:
    return [t for t in str(text).replace(" ", "").split(",") if t]


def _resolution(values, d):
    if len(values) == 1:
        return (values[0],) * d
    if len(values) != d:
        raise CommandError(f"resolution {values} does not match dimension {d}")
    return tuple(values)


def _load(path, args) -> WeightedSimplexMesh:
    return load_mesh(path, getattr(args, "format", None), getattr(args, "dimension", None))


def _normalize(mesh, args):
    if args.no_normalize:
        return mesh, AffineMap.identity(mesh.dimension)
    return normalize_to_unit_cell(mesh, args.margin)


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_json(path, data) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def _complex(z) -> list:
    return [float(np.real(z)), float(np.imag(z))]


# ---------------------------------------------------------------------------
# subcommands: each returns (artifact paths, stdout summary)


def cmd_transform(args):
    mesh = _load(args.input, args)
    if args.degree is not None:
        mesh = mesh.skeleton(args.degree)
    mesh, affine = _normalize(mesh, args)
    warn_degenerate(mesh)
    grid = KGridSpec(_resolution(args.res, mesh.dimension))
    jitter = JitterConfig(args.epsilon, args.seed, args.dc_policy)
    if args.aux_node:
        spec = auxnode_ft(validate_boundary(mesh), grid, jitter, density=args.density, workers=args.workers)
    else:
        if args.density != 1.0:
            mesh = mesh.with_densities(mesh.densities * args.density)
        spec = mesh_ft(mesh, grid, jitter, workers=args.workers)
    spec.meta["affine"] = affine.to_dict()
    side = spec.save(args.output)
    return [Path(args.output), side], {"resolution": list(grid.resolution), "dc": _complex(spec.dc())}


def cmd_field(args):
    spec = SpectralGrid.load(args.input)
    if args.upsample > 1:
        spec = upsample(spec, tuple(args.upsample * n for n in spec.grid.resolution))
    field = inverse_transform(spec, window=args.window)
    if args.max_normalize:
        field = normalize_surface_field(field)
    side = field.save(args.output)
    return [Path(args.output), side], {"resolution": list(field.resolution), "imag_residue": field.meta["imag_residue"]}


def cmd_rasterize(args):
    mesh = _load(args.input, args)
    mesh, affine = _normalize(mesh, args)
    res = _resolution(args.res, mesh.dimension)
    report = check_boundary(mesh) if mesh.degree == mesh.dimension - 1 else None
    closed = report is not None and report.valid
    if args.kind == "binary":
        if args.fill == "parity" and not closed:
            raise BoundaryDefectError(report or check_boundary(mesh))
        shape = validate_boundary(mesh) if closed and args.fill != "touch" else mesh
        field = rasterize_binary(shape, res, seed=args.seed)
    else:
        shape = validate_boundary(mesh) if args.signed else mesh
        field = rasterize_distance(shape, res, signed=args.signed, seed=args.seed)
    field.affine = affine
    side = field.save(args.output)
    return [Path(args.output), side], {"resolution": list(field.resolution), "provenance": field.provenance}


def cmd_contour(args):
    field = ScalarField.load(args.input)
    iso = args.iso
    if field.provenance == "distance":
        # distances are negative inside; contouring wants larger inside
        field = ScalarField(-field.values, "distance", field.affine, field.meta)
        iso = 0.0 if iso is None else -iso
    elif iso is None:
        iso = 0.5
    if args.max_normalize:
        field = normalize_surface_field(field)
    if args.upsample > 1:
        field = upsample_linear(field, args.upsample)
    boundary = extract_contour(field, iso)
    boundary, dropped = drop_small_components(boundary, args.min_component)
    mesh = boundary.mesh
    if args.denormalize and field.affine is not None and len(mesh):
        mesh = mesh.with_vertices(field.affine.invert(mesh.vertices))
    save_mesh(mesh, args.output)
    summary = {"elements": len(mesh), "discarded_components": dropped, "min_component": args.min_component}
    side = _write_json(sidecar_path(args.output), {"iso": iso, **summary})
    return [Path(args.output), side], summary


def cmd_iou(args):
    a = validate_boundary(_load(args.a, args))
    b = validate_boundary(_load(args.b, args))
    r = iou(a, b, args.samples, args.seed)
    report = {"iou": r.iou, "rel_error": r.rel_error, "stderr": r.stderr, "samples": r.samples, "seed": args.seed}
    paths = [_write_json(args.output, report)] if args.output else []
    return paths, report


def cmd_sweep(args):
    mesh = _load(args.input, args)
    config = SweepConfig(
        samples=args.samples,
        seed=args.seed,
        upsample=args.upsample,
        epsilon=args.epsilon,
        min_component=args.min_component,
        normalize=not args.no_normalize,
        workers=args.workers,
        keep_meshes=args.mesh_dir is not None,
    )
    report = fidelity_sweep(mesh, args.res, args.reps, config)
    out = Path(args.output)
    out.write_text(report.to_csv())
    extra = {
        "min_component": report.min_component,
        "discarded_components": {f"{r.rep}:{r.resolution}": r.discarded for r in report.rows},
    }
    paths = [out, _write_json(sidecar_path(out), extra)]
    if args.mesh_dir is not None:
        d = Path(args.mesh_dir)
        d.mkdir(parents=True, exist_ok=True)
        for r in report.rows:
            p = d / f"{r.rep}_{r.resolution}.{'off' if mesh.dimension == 3 else 'json'}"
            save_mesh(r.mesh, p)
            paths.append(p)
    return paths, {"rows": len(report.rows)}


def cmd_oracle(args):
    mesh = _load(args.input, args)
    mesh, _ = _normalize(mesh, args)
    if not args.k:
        raise CommandError("give at least one --k mode vector")
    modes = np.array([_resolution(k, mesh.dimension) for k in args.k], dtype=np.float64)
    kvecs = 2.0 * np.pi * modes
    jitter = JitterConfig(args.epsilon, args.seed)
    if args.aux_node:
        boundary = validate_boundary(mesh)
        closed = boundary_transform_modes(boundary, modes, jitter, workers=args.workers)
        spec = QuadratureSpec("stratified-monte-carlo", args.samples, args.depth, args.seed)
        quad, err, n = quad_polytope_ft_many(boundary, kvecs, spec)
    else:
        closed = transform_modes(mesh, modes, jitter, workers=args.workers)
        quad = np.zeros(len(modes), dtype=np.complex128)
        var = np.zeros(len(modes))
        n = 0
        for e, (x, rho) in enumerate(zip(mesh.simplices(), mesh.densities)):
            seed = int(np.random.SeedSequence([args.seed, e]).generate_state(1)[0])
            spec = QuadratureSpec(args.method, args.samples, args.depth, seed)
            q, s, m = quad_simplex_ft_many(x, kvecs, spec)
            quad += rho * q
            var += (rho * s) ** 2
            n += m
        err = np.sqrt(var)
    rows = []
    for m, c, q, s in zip(modes.astype(int).tolist(), closed, quad, err):
        diff = abs(c - q)
        z = diff / s if s > 0 else (0.0 if diff == 0 else float("inf"))
        rows.append({"mode": m, "closed_form": _complex(c), "quadrature": _complex(q), "error_estimate": float(s), "abs_diff": float(diff), "z": float(z), "agree": bool(z <= 3.0)})
    report = {"method": "stratified-monte-carlo" if args.aux_node else args.method, "samples": int(n), "seed": args.seed, "modes": rows}
    paths = [_write_json(args.output, report)] if args.output else []
    return paths, report


COMMANDS = {
    "transform": cmd_transform,
    "field": cmd_field,
    "rasterize": cmd_rasterize,
    "contour": cmd_contour,
    "iou": cmd_iou,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
}


# ---------------------------------------------------------------------------
# parser


def _global_flags(p, suppress):
    d = argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=d if suppress else 0, help="random seed (jitter, sampling)")
    p.add_argument("--workers", type=int, default=d if suppress else None, help="thread cap; default all cores")
    p.add_argument("--manifest", default=d if suppress else None, help="manifest path; default <output>.manifest.json")


def _mesh_flags(p):
    p.add_argument("--format", choices=["off", "obj", "xyz", "json"], help="override format inferred from suffix")
    p.add_argument("--dimension", type=int, choices=[2, 3], help="2 drops an all-zero z coordinate")


def _norm_flags(p):
    p.add_argument("--no-normalize", action="store_true", help="keep input coordinates (must lie in the unit cell)")
    p.add_argument("--margin", type=float, default=0.125, help="normalization margin")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simplexft", description="Exact spectra of simplex meshes and representation comparisons.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", parents=[common], help="mesh -> spectrum")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--res", type=_ints, required=True, help="modes per axis, n or n,n,n")
    p.add_argument("--aux-node", action="store_true", help="transform the enclosed solid of a closed boundary")
    p.add_argument("--degree", type=int, help="use the degree-j skeleton of the input")
    p.add_argument("--density", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=1e-6, help="vertex jitter relative to the bbox diagonal")
    p.add_argument("--dc-policy", choices=["analytic", "jittered"], default="analytic")
    _mesh_flags(p)
    _norm_flags(p)

    p = sub.add_parser("field", parents=[common], help="spectrum -> physical field")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--upsample", type=int, default=1, help="zero-padding factor")
    p.add_argument("--window", action="store_true", help="raised-cosine taper (visualization only)")
    p.add_argument("--max-normalize", action="store_true", help="scale to max 1 (surface densities)")

    p = sub.add_parser("rasterize", parents=[common], help="mesh -> binary or distance grid")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--res", type=_ints, required=True)
    p.add_argument("--kind", choices=["binary", "distance"], default="binary")
    p.add_argument("--signed", action="store_true", help="negative inside (closed boundaries)")
    p.add_argument("--fill", choices=["auto", "parity", "touch"], default="auto",
                   help="binary rule: cell-center parity for closed boundaries, else cells touching an element")
    _mesh_flags(p)
    _norm_flags(p)

    p = sub.add_parser("contour", parents=[common], help="field -> boundary mesh")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--iso", type=float, help="level; default 0.5 (0 for distance fields)")
    p.add_argument("--upsample", type=int, default=1, help="multilinear upsampling factor before contouring")
    p.add_argument("--max-normalize", action="store_true")
    p.add_argument("--min-component", type=float, default=MIN_COMPONENT)
    p.add_argument("--denormalize", action="store_true", help="map back through the field's normalization")

    p = sub.add_parser("iou", parents=[common], help="volumetric IoU of two closed meshes")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--output")
    _mesh_flags(p)

    p = sub.add_parser("sweep", parents=[common], help="IoU / volume error per representation and resolution")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="CSV path")
    p.add_argument("--res", type=_ints, required=True, help="e.g. 16,32,64")
    p.add_argument("--reps", type=_names, default=["nuft", "binary"])
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--upsample", type=int, default=4)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--min-component", type=float, default=MIN_COMPONENT)
    p.add_argument("--mesh-dir", help="also save every reconstructed mesh here")
    _mesh_flags(p)
    _norm_flags(p)

    p = sub.add_parser("oracle", parents=[common], help="closed form vs brute-force quadrature")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=_ints, action="append", help="integer mode vector m (k = 2 pi m); repeatable")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--method", choices=["stratified-monte-carlo", "recursive-subdivision-midpoint"], default="stratified-monte-carlo")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--aux-node", action="store_true", help="integrate over the enclosed solid")
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--output")
    _mesh_flags(p)
    _norm_flags(p)

    p = sub.add_parser("rerun", help="repeat a run from its manifest and compare artifacts")
    p.add_argument("source", help="manifest written by an earlier run")
    p.add_argument("--workers", type=int, default=argparse.SUPPRESS)
    return parser


# ---------------------------------------------------------------------------
# running


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, SweepCellError):
        return exit_code(exc.cause)
    if isinstance(exc, ArithmeticError):
        return EXIT_NUMERIC
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, (ValueError, KeyError, IndexError, TypeError)):
        return EXIT_INPUT
    return 1


def _error_json(exc, command) -> str:
    info = {"error": type(exc).__name__, "message": str(exc), "command": command, "exit_code": exit_code(exc)}
    cause = exc.cause if isinstance(exc, SweepCellError) else exc
    if isinstance(cause, BoundaryDefectError):
        info["defects"] = cause.report.defects[:20]
        info["defect_count"] = len(cause.report.defects)
    return json.dumps(info, sort_keys=True)


def _config_of(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _VOLATILE}


def _manifest_path(args, outputs) -> Path | None:
    if args.manifest:
        return Path(args.manifest)
    primary = getattr(args, "output", None)
    if primary:
        return Path(str(primary) + ".manifest.json")
    return None


def _input_paths(args):
    keys = ("input", "a", "b")
    return [getattr(args, k) for k in keys if getattr(args, k, None)]


def execute(args) -> tuple[list, dict]:
    """Run one subcommand and write its manifest; returns (artifacts, summary)."""
    outputs, summary = COMMANDS[args.command](args)
    manifest = {
        "format": MANIFEST_FORMAT,
        "version": 1,
        "tool": f"simplexft {__version__}",
        "command": args.command,
        "config": _config_of(args),
        "inputs": {str(p): _digest(p) for p in _input_paths(args)},
        "outputs": {str(p): _digest(p) for p in outputs},
    }
    mpath = _manifest_path(args, outputs)
    if mpath is not None:
        _write_json(mpath, manifest)
        outputs = list(outputs) + [mpath]
    else:
        # nothing written to disk: the manifest goes to stdout with the summary
        summary = {**summary, "manifest": manifest}
    return outputs, summary


def rerun(source, workers=None) -> dict:
    """Re-execute the run recorded in a manifest; report whether artifacts match."""
    manifest = json.loads(Path(source).read_text())
    if manifest.get("format") != MANIFEST_FORMAT:
        raise CommandError(f"{source}: not a manifest")
    expected = manifest["outputs"]
    ns = argparse.Namespace(command=manifest["command"], workers=workers, manifest=str(source), **manifest["config"])
    for p, digest in manifest["inputs"].items():
        if _digest(p) != digest:
            raise CommandError(f"input {p} changed since the manifest was written")
    outputs, _ = execute(ns)
    actual = {str(p): _digest(p) for p in outputs}
    mismatched = sorted(p for p, h in expected.items() if actual.get(p) != h)
    return {"command": manifest["command"], "identical": not mismatched, "mismatched": mismatched}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if command == "rerun":
                result = rerun(args.source, getattr(args, "workers", None))
                print(json.dumps(result, sort_keys=True))
                code = EXIT_OK if result["identical"] else EXIT_NUMERIC
            else:
                outputs, summary = execute(args)
                print(json.dumps({"command": command, "outputs": [str(p) for p in outputs], **summary}, sort_keys=True))
                code = EXIT_OK
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return code
    except Exception as exc:  # noqa: BLE001 - every failure becomes an exit code
        print(_error_json(exc, command), file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
