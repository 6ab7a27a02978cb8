"""Command line interface: inspect, fill, eval, punch and bench."""

import argparse
import json
import logging
from pathlib import Path
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from holepy import __version__
from holepy.harness._benchmark import (
    format_table,
    parse_methods,
    run_benchmark,
    write_table,
)
from holepy.harness._punch import PunchMode, PunchSpec, default_punch, punch
from holepy.harness._shapes import ShapeKind, SyntheticShape, generate
from holepy.holes._analysis import analyze_hole, classify_hole, detect_fracture_points
from holepy.holes._fill import FillMethod, fill_all_holes
from holepy.mesh._io import read_mesh, write_mesh
from holepy.mesh._mesh import audit_mesh, boundary_loops
from holepy.metrics._distance import hausdorff_report
from holepy.utilities._config import SAMPLING_MODES, SMOOTHING_MODES, RunConfig
from holepy.utilities._errors import HolepyError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PARTIAL = 3

# flag destination -> RunConfig field
CONFIG_FLAGS = {
    "small_factor": "small_factor",
    "medium_factor": "medium_factor",
    "fracture_cos": "fracture_cos",
    "smooth_iterations": "smooth_iterations",
    "merge_radius": "ring_merge_radius_factor",
    "open_surface": "open_surface",
    "smoothing": "smoothing",
    "bezier_degree": "bezier_degree",
    "sampling": "sampling_mode",
    "samples_per_area": "samples_per_area",
    "samples": "sample_budget",
    "max_samples": "max_samples",
    "seed": "seed",
    "timing": "record_timing",
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Runs the command line and returns its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose, args.quiet)
    try:
        config = load_config(args)
        return args.handler(args, config)
    except (HolepyError, ValueError, OSError) as err:
        logger.error("%s", err)
        return EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    """The argument parser of every subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--json", action="store_true", help="machine readable output")
    common.add_argument("--seed", type=int, help="seed of the surface sampler")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    thresholds = common.add_argument_group("thresholds")
    thresholds.add_argument("--small-factor", type=float)
    thresholds.add_argument("--medium-factor", type=float)
    thresholds.add_argument("--fracture-cos", type=float)
    thresholds.add_argument("--smooth-iterations", type=int)
    thresholds.add_argument("--merge-radius", type=float)
    thresholds.add_argument(
        "--open-surface", action=argparse.BooleanOptionalAction, default=None,
        help="leave the longest boundary loop open (--no-open-surface turns a "
        "config file setting off)",
    )
    thresholds.add_argument("--smoothing", choices=SMOOTHING_MODES)
    thresholds.add_argument("--bezier-degree", type=int)
    sampling = common.add_argument_group("sampling")
    sampling.add_argument("--sampling", choices=SAMPLING_MODES)
    sampling.add_argument("--samples", type=int, help="face samples per mesh")
    sampling.add_argument("--samples-per-area", type=float)
    sampling.add_argument("--max-samples", type=int)

    shapes = argparse.ArgumentParser(add_help=False)
    group = shapes.add_argument_group("shape")
    group.add_argument(
        "--shape", choices=[kind.value for kind in ShapeKind], default="sphere"
    )
    group.add_argument("--faces", type=int, default=50_000, help="target face count")
    group.add_argument("--size", type=float, default=1.0)
    group.add_argument("--crease-angle", type=float, default=90.0)
    group.add_argument("--ramp-angle", type=float, default=60.0)
    group.add_argument("--ramp-width", type=float)
    group.add_argument(
        "--on-crease", dest="on_crease", action="store_true", default=True,
        help="punch across the creases (default)",
    )
    group.add_argument("--off-crease", dest="on_crease", action="store_false")
    group.add_argument(
        "--radius-factor", type=float, default=4.5,
        help="default punch radius in mean edge lengths",
    )

    parser = argparse.ArgumentParser(
        prog="holepy", description="Detect, fill and measure holes in triangle meshes."
    )
    parser.add_argument("--version", action="version", version=f"holepy {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    inspect = commands.add_parser("inspect", parents=[common], help="list the holes of a mesh")
    inspect.add_argument("input", type=Path)
    inspect.set_defaults(handler=cmd_inspect)

    fill = commands.add_parser("fill", parents=[common], help="fill every hole of a mesh")
    fill.add_argument("input", type=Path)
    fill.add_argument("output", type=Path)
    fill.add_argument(
        "--method", default="segmented-ring",
        choices=[method.value for method in FillMethod] + ["baseline"],
    )
    fill.add_argument("--report", type=Path, help="write the fill report as JSON")
    fill.set_defaults(handler=cmd_fill)

    evaluate = commands.add_parser("eval", parents=[common], help="distance between meshes")
    evaluate.add_argument("mesh_a", type=Path)
    evaluate.add_argument("mesh_b", type=Path)
    evaluate.set_defaults(handler=cmd_eval)

    punch_cmd = commands.add_parser(
        "punch", parents=[common, shapes], help="generate a shape and punch holes in it"
    )
    punch_cmd.add_argument("output", type=Path)
    punch_cmd.add_argument(
        "--center", action="append", type=_point, help="x,y,z of a punch sphere"
    )
    punch_cmd.add_argument("--radius", action="append", type=float)
    punch_cmd.add_argument("--original", type=Path, help="also write the unpunched mesh")
    punch_cmd.set_defaults(handler=cmd_punch)

    bench = commands.add_parser(
        "bench", parents=[common, shapes], help="compare fill methods on a punched shape"
    )
    bench.add_argument("--methods", default="all", help="comma separated, or all")
    bench.add_argument("--output", type=Path, help=".csv or .xlsx file, stdout if absent")
    bench.add_argument("--timing", action="store_const", const=True, default=None)
    bench.add_argument("--no-punch", action="store_true", help="measure the intact shape")
    bench.set_defaults(handler=cmd_bench)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    """Configuration file values, overridden by any flags given."""
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides = {
        field: getattr(args, flag, None) for flag, field in CONFIG_FLAGS.items()
    }
    return config.replace(**overrides)


def cmd_inspect(args: argparse.Namespace, config: RunConfig) -> int:
    """Lists every boundary loop with its size class, after a summary
    of the mesh topology."""
    mesh = read_mesh(args.input)
    audit = audit_mesh(mesh)
    loops = boundary_loops(mesh)
    rim = None
    if config.open_surface and loops:
        rim = max(range(len(loops)), key=lambda k: (len(loops[k]), -k))
    records = []
    for index, loop in enumerate(loops):
        record: Dict[str, Any] = {"loop": index, "points": len(loop), "rim": index == rim}
        if index != rim:
            try:
                hole = analyze_hole(mesh, loop)
                record.update(
                    ds=float(hole.ds),
                    diameter=float(hole.diameter),
                    hole_class=classify_hole(
                        hole, config.small_factor, config.medium_factor
                    ).value,
                    fracture_points=len(detect_fracture_points(hole, config.fracture_cos)),
                )
            except (HolepyError, ValueError) as err:
                record["error"] = str(err)
        records.append(record)
    holes = [record for record in records if not record["rim"]]

    if args.json:
        _print_json(
            {
                "file": str(args.input),
                "vertices": mesh.vertex_count,
                "faces": mesh.face_count,
                "audit": audit,
                "holes": holes,
                "rim": [record for record in records if record["rim"]],
            }
        )
        return EXIT_OK
    print(
        f"{args.input}: {mesh.vertex_count} vertices, {mesh.face_count} faces, "
        f"{_plural(len(holes), 'hole')}"
    )
    print(
        f"  topology: {_plural(audit['edges'], 'edge')}, "
        f"{_plural(audit['boundary_edges'], 'boundary edge')}, "
        f"Euler characteristic {audit['euler_characteristic']}, "
        f"{_plural(audit['degenerate_faces'], 'degenerate face')}"
    )
    for record in records:
        if record["rim"]:
            print(f"  loop {record['loop']}: outer rim, {record['points']} points")
        elif "error" in record:
            print(f"  loop {record['loop']}: {record['points']} points, {record['error']}")
        else:
            print(
                f"  loop {record['loop']}: {record['points']} points, "
                f"ds {record['ds']:.6g}, d_H {record['diameter']:.6g}, "
                f"{record['hole_class']}, "
                f"{_plural(record['fracture_points'], 'fracture point')}"
            )
    return EXIT_OK


def cmd_fill(args: argparse.Namespace, config: RunConfig) -> int:
    """Fills the holes of a mesh and writes the result."""
    mesh = read_mesh(args.input)
    report = fill_all_holes(mesh, config, FillMethod.parse(args.method))
    write_mesh(mesh, args.output)
    summary = report.to_dict()
    if args.report:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    if args.json:
        _print_json(summary)
    totals = summary["totals"]
    logger.info(
        "Filled %d of %d holes: +%d vertices, +%d faces",
        totals["filled"],
        totals["holes"],
        totals["new_vertices"],
        totals["new_faces"],
    )
    for record in report.failures:
        logger.warning("Hole %d failed: %s", record.hole_id, record.error)
    return EXIT_OK if report.all_filled else EXIT_PARTIAL


def cmd_eval(args: argparse.Namespace, config: RunConfig) -> int:
    """Prints the two-sided distance between two meshes."""
    surface = read_mesh(args.mesh_a)
    other = read_mesh(args.mesh_b)
    report = hausdorff_report(surface, other, config.sampling_spec())
    if args.json:
        _print_json(report.to_dict())
        return EXIT_OK
    print(f"delta_max            {report.delta_max:.9g}")
    print(f"delta_max_normalized {report.delta_max_normalized:.9g}")
    print(f"delta_avg            {report.delta_avg:.9g}")
    print(f"delta_avg_normalized {report.delta_avg_normalized:.9g}")
    print(f"forward  max {report.forward_max:.9g}  avg {report.forward_avg:.9g}")
    print(f"backward max {report.backward_max:.9g}  avg {report.backward_avg:.9g}")
    print(
        f"samples  {report.forward_samples} forward, "
        f"{report.backward_samples} backward, seed {report.seed}"
    )
    return EXIT_OK


def cmd_punch(args: argparse.Namespace, config: RunConfig) -> int:
    """Generates a shape, punches it and writes the punched mesh."""
    shape = _shape(args)
    original = generate(shape)
    if args.center:
        radii = args.radius or []
        if len(radii) == 1:
            radii = radii * len(args.center)
        mode = PunchMode.SINGLE_LOBE if len(args.center) == 1 else PunchMode.MULTI_LOBE
        spec = PunchSpec(args.center, radii, mode)
    elif args.radius:
        raise ValueError("--radius needs --center")
    else:
        spec = default_punch(shape, original, args.on_crease, args.radius_factor)
    punched, record = punch(original, spec)
    write_mesh(punched, args.output)
    if args.original:
        write_mesh(original, args.original)
    summary = {"shape": shape.kind.value, "faces": punched.face_count, **record.to_dict()}
    if args.json:
        _print_json(summary)
    else:
        print(
            f"{args.output}: {shape.kind.value}, {punched.face_count} faces, "
            f"{record.to_dict()['removed_faces']} removed, {_plural(record.loops, 'new loop')}"
        )
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, config: RunConfig) -> int:
    """Runs the fill methods on a punched shape and tabulates them."""
    shape = _shape(args)
    methods = parse_methods(args.methods)
    spec = None
    if not args.no_punch:
        spec = default_punch(shape, generate(shape), args.on_crease, args.radius_factor)
    table = run_benchmark(shape, spec, methods, config)
    print(format_table(table), file=sys.stderr)
    if args.output:
        write_table(table, args.output)
    elif args.json:
        _print_json(json.loads(table.to_json(orient="records")))
    else:
        table.to_csv(sys.stdout, index=False)
    return EXIT_OK


def _shape(args: argparse.Namespace) -> SyntheticShape:
    return SyntheticShape(
        kind=ShapeKind(args.shape),
        target_faces=args.faces,
        size=args.size,
        crease_angle_deg=args.crease_angle,
        ramp_angle_deg=args.ramp_angle,
        ramp_width=args.ramp_width,
    )


def _point(text: str) -> List[float]:
    values = [float(part) for part in text.split(",")]
    if len(values) != 3 or not np.all(np.isfinite(values)):
        raise argparse.ArgumentTypeError(f"expected x,y,z, got '{text}'")
    return values


def _plural(count: int, noun: str) -> str:
    return f"{count} {noun}" + ("" if count == 1 else "s")


def _print_json(value: Any) -> None:
    print(json.dumps(value, indent=2))


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
