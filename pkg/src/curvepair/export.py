"""
Report Export Module

Serializes a PipelineResult to the versioned JSON report and renders reports as
SVG. Coordinates appear twice in the report: as exact strings and as floats.
Dyadic values are written "m*2^e"; other rationals (crossings of two segments,
values mapped back onto a rectangle with a non-dyadic scale) are written "p/q".

Example Usage:
    result = run_pipeline(config)
    report = report_to_dict(result, emit_partition=True)
    print(json.dumps(report, indent=2))

    svg_text = render_svg(report)
    written = write_outputs(report, config)
"""

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

from curvepair.arith import Dyadic, IBox, NonDyadicError
from curvepair.config import RunConfig
from curvepair.errors import CurvePairError


logger = logging.getLogger(__name__)


SCHEMA_VERSION = 1

Exact = Union[Dyadic, Fraction, int]


class ExportError(CurvePairError):
    """Base exception for report export errors."""

    stage = "export"


# ============================================================================
# Exact coordinates
# ============================================================================

def format_exact(value: Exact) -> str:
    """Exact text of a coordinate: "m*2^e" when dyadic, "p/q" otherwise."""
    if isinstance(value, Dyadic):
        return str(value)
    try:
        return str(Dyadic.coerce(value))
    except NonDyadicError:
        value = Fraction(value)
        return f"{value.numerator}/{value.denominator}"


def parse_exact(text: str) -> Union[Dyadic, Fraction]:
    """
    Read a coordinate written by format_exact.

    Raises:
        ExportError: If text is neither form
    """
    try:
        if '/' in text:
            return Fraction(text.replace(' ', ''))
        return Dyadic.parse(text)
    except (ValueError, ZeroDivisionError) as e:
        error_msg = f"Invalid exact coordinate: {text!r}"
        logger.error(error_msg)
        raise ExportError(error_msg) from e


def _exact_point(point: Sequence[Exact]) -> List[str]:
    return [format_exact(point[0]), format_exact(point[1])]


def _float_point(point: Sequence[Exact]) -> List[float]:
    return [float(point[0]), float(point[1])]


def _exact_box(box: IBox) -> List[str]:
    return [format_exact(v) for v in box.bounds()]


# ============================================================================
# JSON report
# ============================================================================

def report_to_dict(result, emit_partition: bool = False) -> Dict[str, Any]:
    """
    Build the schema-1 report for a pipeline result.

    Args:
        result: PipelineResult
        emit_partition: Include the leaves of the final partition

    Returns:
        JSON-ready dictionary; equal inputs give equal dictionaries
    """
    report: Dict[str, Any] = {
        'schema': SCHEMA_VERSION,
        'input': result.pair.to_dict(),
        'region': list(result.config.region),
        'square': list(result.affine.square)
    }

    if emit_partition:
        region = result.partition.region
        boxes = []
        for leaf in result.partition.leaves:
            entry = leaf.to_dict()
            entry['rect'] = result.affine.map_box(leaf.ibox(region)).to_list()
            boxes.append(entry)
        report['boxes'] = boxes

    report['curves'] = {
        name: [[_float_point(p) for p in points] for points, _ in polylines]
        for name, polylines in result.curves.items()
    }
    report['curves_exact'] = {
        name: [[_exact_point(p) for p in points] for points, _ in polylines]
        for name, polylines in result.curves.items()
    }
    report['closed'] = {
        name: [closed for _, closed in polylines]
        for name, polylines in result.curves.items()
    }
    report['crossings'] = [
        {
            'type': crossing.kind,
            'hull': crossing.hull.to_list(),
            'hull_exact': _exact_box(crossing.hull),
            'point': _float_point(crossing.point),
            'point_exact': _exact_point(crossing.point)
        }
        for crossing in result.crossings
    ]

    stats = result.partition.statistics()
    report['stats'] = {
        'leaves': stats['leaves'],
        'max_depth_used': stats['max_depth_used'],
        'rule_counts': stats['rule_counts'],
        'snakes': len(result.report.snakes),
        'crossings': result.report.total_crossings,
        'head_refinements': result.head_refinements
    }
    return report


def report_to_json(report: Dict[str, Any]) -> str:
    return json.dumps(report, indent=2) + "\n"


# ============================================================================
# SVG rendering
# ============================================================================

SVG_PREAMBLE = """\
<?xml version="1.0" standalone="no"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1"
    width="%(width)d" height="%(height)d"
    viewBox="%(min_x)f %(min_y)f %(span_x)f %(span_y)f">
<g transform="matrix(1,0,0,-1,0,%(flip)f)">
<rect x="%(min_x)f" y="%(min_y)f" width="%(span_x)f" height="%(span_y)f" style="fill:#ffffff"/>
"""

SVG_POSTAMBLE = """\
</g></svg>
"""

PARTITION_COLOR = '#d0d0d0'
CURVE_COLORS = {'f': '#1f5fbf', 'g': '#c0392b'}
HULL_COLOR = '#2e8b57'


class SVGCanvas:
    """
    Minimal SVG writer in world coordinates, y axis pointing up.

    Stroke widths and radii are given in output pixels; commands are formatted
    once the drawing bounds, and so the pixel size, are known.
    """

    def __init__(self, pixels: int = 800):
        self.pixels = pixels
        self.min_x: Optional[float] = None
        self.max_x: Optional[float] = None
        self.min_y: Optional[float] = None
        self.max_y: Optional[float] = None
        self.commands: List[Callable[[float], str]] = []

    def require(self, x: float, y: float) -> None:
        if self.min_x is None:
            self.min_x = self.max_x = x
            self.min_y = self.max_y = y
        else:
            self.min_x = min(self.min_x, x)
            self.max_x = max(self.max_x, x)
            self.min_y = min(self.min_y, y)
            self.max_y = max(self.max_y, y)

    @property
    def unit(self) -> float:
        """World length of one output pixel."""
        span = max(self.max_x - self.min_x, self.max_y - self.min_y) or 1.0
        return span / self.pixels

    def _points(self, points: Sequence[Sequence[float]]) -> str:
        for x, y in points:
            self.require(x, y)
        return ' '.join('%f,%f' % (x, y) for x, y in points)

    def rect(self, box: Sequence[float], color: str, width: float = 1.0) -> None:
        x0, y0, x1, y1 = box
        self.require(x0, y0)
        self.require(x1, y1)
        self.commands.append(lambda unit: (
            '<rect x="%f" y="%f" width="%f" height="%f" style="fill:none;stroke:%s;stroke-width:%f"/>'
            % (x0, y0, x1 - x0, y1 - y0, color, width * unit)
        ))

    def line(self, points: Sequence[Sequence[float]], color: str, width: float = 1.0) -> None:
        text = self._points(points)
        self.commands.append(lambda unit: (
            '<polyline points="%s" style="fill:none;stroke:%s;stroke-width:%f;stroke-linejoin:round"/>'
            % (text, color, width * unit)
        ))

    def polygon(self, points: Sequence[Sequence[float]], color: str, width: float = 1.0) -> None:
        text = self._points(points)
        self.commands.append(lambda unit: (
            '<polygon points="%s" style="fill:none;stroke:%s;stroke-width:%f;stroke-linejoin:round"/>'
            % (text, color, width * unit)
        ))

    def dot(self, x: float, y: float, color: str, radius: float = 3.0) -> None:
        self.require(x, y)
        self.commands.append(lambda unit: (
            '<circle cx="%f" cy="%f" r="%f" style="fill:%s"/>' % (x, y, radius * unit, color)
        ))

    def to_string(self) -> str:
        if self.min_x is None:
            self.require(0.0, 0.0)
        unit = self.unit
        pad = unit * 10
        min_x, min_y = self.min_x - pad, self.min_y - pad
        span_x = self.max_x - self.min_x + 2 * pad
        span_y = self.max_y - self.min_y + 2 * pad
        params = {
            'width': round(span_x / unit),
            'height': round(span_y / unit),
            'min_x': min_x,
            'min_y': min_y,
            'span_x': span_x,
            'span_y': span_y,
            'flip': 2 * min_y + span_y
        }
        body = '\n'.join(command(unit) for command in self.commands)
        return SVG_PREAMBLE % params + body + '\n' + SVG_POSTAMBLE


def render_svg(report: Dict[str, Any], pixels: int = 800) -> str:
    """
    Render a schema-1 report.

    Draws the partition (when present) in light gray, A(f) and A(g) as thick
    polylines, crossing hulls as outlines and crossing points as dots.

    Raises:
        ExportError: If the report has an unknown schema version
    """
    if report.get('schema') != SCHEMA_VERSION:
        error_msg = f"Unsupported report schema: {report.get('schema')!r}"
        logger.error(error_msg)
        raise ExportError(error_msg)

    canvas = SVGCanvas(pixels)
    region = report.get('region')
    if region:
        canvas.rect([float(v) for v in region], '#000000', 1.0)
    for box in report.get('boxes', []):
        canvas.rect(box['rect'], PARTITION_COLOR, 0.5)

    closed_flags = report.get('closed', {})
    for name in ('f', 'g'):
        polylines = report.get('curves', {}).get(name, [])
        flags = closed_flags.get(name, [False] * len(polylines))
        for points, closed in zip(polylines, flags):
            if closed:
                canvas.polygon(points, CURVE_COLORS[name], 3.0)
            else:
                canvas.line(points, CURVE_COLORS[name], 3.0)

    for crossing in report.get('crossings', []):
        canvas.rect(crossing['hull'], HULL_COLOR, 1.5)
        canvas.dot(crossing['point'][0], crossing['point'][1], '#000000', 3.0)

    return canvas.to_string()


# ============================================================================
# Output files
# ============================================================================

def write_outputs(report: Dict[str, Any], config: RunConfig) -> List[Path]:
    """
    Write the report in the configured format.

    With no output path nothing is written. For format 'both' the given path
    receives the JSON and the same stem with '.svg' receives the drawing.

    Returns:
        Paths written
    """
    if not config.output:
        return []
    target = Path(config.output)
    written: List[Path] = []
    try:
        if config.format in ('json', 'both'):
            json_path = target if config.format == 'json' else target.with_suffix('.json')
            json_path.write_text(report_to_json(report), encoding='utf-8')
            written.append(json_path)
        if config.format in ('svg', 'both'):
            svg_path = target if config.format == 'svg' else target.with_suffix('.svg')
            svg_path.write_text(render_svg(report), encoding='utf-8')
            written.append(svg_path)
    except OSError as e:
        error_msg = f"Could not write output {target}: {str(e)}"
        logger.error(error_msg)
        raise ExportError(error_msg) from e
    logger.info(f"Wrote {', '.join(str(p) for p in written)}")
    return written
