"""
Command Line Interface

Subcommands:
    approx   run the simultaneous approximation and emit the JSON report / SVG
    verify   run the interval oracle only (certified roots and hypotheses check)
    render   turn a saved JSON report into SVG

Example Usage:
    python -m curvepair approx --f "x" --g "y" --region -1 -1 1 1
    python -m curvepair approx --f "x^2+y^2-4" --g "(x-2)^2+y^2-4" \\
        --region -4 -4 4 4 --format both --emit-partition --out circles.json
    python -m curvepair verify --f "x^2+y^2-4" --g "(x-2)^2+y^2-4" --region -4 -4 4 4
    python -m curvepair render --input circles.json --out circles.svg

Failures print {"success": false, "error": {...}} on stdout and exit with 1.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from curvepair.config import OUTPUT_FORMATS, RunConfig, Settings, configure_logging, load_settings
from curvepair.errors import ConfigurationError, CurvePairError
from curvepair.export import ExportError, render_svg, report_to_dict, report_to_json, write_outputs
from curvepair.oracle import certify_intersections, check_smooth_transversal
from curvepair.pipeline import run_pipeline
from curvepair.poly import CurvePair


logger = logging.getLogger(__name__)


def _add_curve_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--f', required=True, dest='f_text', help='First polynomial, e.g. "x^2+y^2-4"')
    parser.add_argument('--g', required=True, dest='g_text', help='Second polynomial')
    parser.add_argument(
        '--region',
        required=True,
        nargs=4,
        type=int,
        metavar=('X0', 'Y0', 'X1', 'Y1'),
        help='Integer rectangle [X0,X1] x [Y0,Y1]'
    )


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    """Argument parser; defaults come from the environment settings."""
    parser = argparse.ArgumentParser(
        prog='curvepair',
        description='Certified simultaneous approximation of two plane curves'
    )
    parser.add_argument(
        '--log-level',
        default=settings.log_level,
        help=f'Logging level (default: CURVEPAIR_LOG or {settings.log_level})'
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    approx = subparsers.add_parser('approx', help='Approximate both curves and certify crossings')
    _add_curve_arguments(approx)
    approx.add_argument(
        '--max-depth',
        type=int,
        default=settings.max_depth,
        help=f'Subdivision depth cap (default: {settings.max_depth})'
    )
    approx.add_argument(
        '--min-depth',
        type=int,
        default=0,
        help='Uniform pre-subdivision depth (default: 0)'
    )
    approx.add_argument(
        '--format',
        choices=OUTPUT_FORMATS,
        default='json',
        help='Output format (default: json)'
    )
    approx.add_argument('--emit-partition', action='store_true', help='Include the final partition')
    approx.add_argument('--out', help='Output path (default: stdout)')

    verify = subparsers.add_parser('verify', help='Run the interval oracle only')
    _add_curve_arguments(verify)
    verify.add_argument(
        '--grid-depth',
        type=int,
        default=settings.oracle_grid_depth,
        help=f'Oracle grid depth (default: {settings.oracle_grid_depth})'
    )
    verify.add_argument(
        '--split-cap',
        type=int,
        default=settings.oracle_split_cap,
        help=f'Oracle split cap per cell (default: {settings.oracle_split_cap})'
    )

    render = subparsers.add_parser('render', help='Render a JSON report as SVG')
    render.add_argument('--input', required=True, help='Report written by approx')
    render.add_argument('--out', help='SVG path (default: stdout)')

    return parser


def _emit(payload: Dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2))


def _run_approx(args: argparse.Namespace, settings: Settings) -> int:
    config = RunConfig(
        f_text=args.f_text,
        g_text=args.g_text,
        region=tuple(args.region),
        max_depth=args.max_depth,
        min_depth=args.min_depth,
        format=args.format,
        emit_partition=args.emit_partition,
        output=args.out,
        iteration_cap=settings.iteration_cap
    ).validate()
    if config.format == 'both' and not config.output:
        raise ConfigurationError("--format both needs --out")

    result = run_pipeline(config)
    report = report_to_dict(result, emit_partition=config.emit_partition)

    if config.output:
        written = write_outputs(report, config)
        logger.info(f"Report written to {', '.join(str(p) for p in written)}")
    elif config.format == 'svg':
        sys.stdout.write(render_svg(report))
    else:
        sys.stdout.write(report_to_json(report))
    return 0


def _run_verify(args: argparse.Namespace) -> int:
    region = tuple(args.region)
    if args.grid_depth < 1:
        raise ConfigurationError(f"--grid-depth must be at least 1, got {args.grid_depth}")
    pair = CurvePair.parse(args.f_text, args.g_text)
    roots = certify_intersections(pair, region, args.grid_depth, args.split_cap)
    hypotheses = check_smooth_transversal(pair, region, args.grid_depth, args.split_cap)
    _emit({
        'success': True,
        'input': pair.to_dict(),
        'region': list(region),
        'count': len(roots),
        'roots': [root.to_dict() for root in roots],
        'smooth_transversal': hypotheses
    })
    return 0


def _run_render(args: argparse.Namespace) -> int:
    try:
        report = json.loads(Path(args.input).read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError) as e:
        error_msg = f"Could not read report {args.input}: {str(e)}"
        logger.error(error_msg)
        raise ExportError(error_msg) from e
    svg_text = render_svg(report)
    if args.out:
        Path(args.out).write_text(svg_text, encoding='utf-8')
    else:
        sys.stdout.write(svg_text)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main entry point.

    Returns:
        Exit code (0 for success, 1 for a reported failure, 2 for usage errors)
    """
    try:
        settings = load_settings()
    except ConfigurationError as e:
        _emit({'success': False, 'error': e.to_dict()})
        return 1

    parser = build_parser(settings)
    args = parser.parse_args(argv)

    try:
        configure_logging(args.log_level)
        if args.command == 'approx':
            return _run_approx(args, settings)
        if args.command == 'verify':
            return _run_verify(args)
        return _run_render(args)
    except CurvePairError as e:
        _emit({'success': False, 'error': e.to_dict()})
        return 1


if __name__ == '__main__':
    sys.exit(main())
