"""
Simultaneous Approximation Pipeline

Runs the whole chain for one RunConfig:

    parse -> rescale -> subdivide -> balance -> verify_rule4 -> approximate
          -> find_snakes -> orientation -> resolve -> transversal -> report
          -> map_back

Every stage is timed, and a domain error raised inside a stage is tagged with
the stage name before it propagates. Unexpected exceptions are wrapped in a
StageError.

Example Usage:
    config = RunConfig("x", "y", (-1, -1, 1, 1))
    result = run_pipeline(config)
    print(result.report.total_crossings)        # 1
    print(result.get_statistics())
"""

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Tuple, Union

from curvepair.approximation import CurveApprox, Polyline, assemble
from curvepair.arith import Dyadic, IBox
from curvepair.config import RunConfig
from curvepair.errors import CurvePairError, StageError
from curvepair.pairing import (
    CrossingReport,
    EndpointOnSnakeBoundary,
    build_report,
    find_snakes,
    find_transversal,
    resolve_snakes,
    snake_orientation,
)
from curvepair.poly import AffineMap, CurvePair, choose_square
from curvepair.subdivision import Partition, Region, balance, refine_box, subdivide, verify_rule4


logger = logging.getLogger(__name__)


MAX_HEAD_REFINEMENTS = 8

Coordinate = Union[Dyadic, Fraction]


class _StageTimer:
    """Collects wall-clock time per stage and tags errors with the stage name."""

    def __init__(self):
        self.timings: Dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        logger.debug(f"Stage {name} started")
        try:
            yield
        except CurvePairError as e:
            e.with_stage(name)
            raise
        except Exception as e:
            error_msg = f"Unexpected failure in stage {name}: {str(e)}"
            logger.error(error_msg)
            raise StageError(error_msg, stage=name) from e
        finally:
            elapsed = time.perf_counter() - start
            self.timings[name] = self.timings.get(name, 0.0) + elapsed


@dataclass(frozen=True)
class ReportedCrossing:
    """A crossing in the caller's coordinates."""

    kind: str
    point: Tuple[Coordinate, Coordinate]
    hull: IBox


@dataclass
class PipelineResult:
    """Everything one run produced, in working and in original coordinates."""

    config: RunConfig
    pair: CurvePair
    working_pair: CurvePair
    affine: AffineMap
    partition: Partition
    approx_f: CurveApprox
    approx_g: CurveApprox
    report: CrossingReport
    curves: Dict[str, List[Polyline]] = field(default_factory=dict)
    crossings: List[ReportedCrossing] = field(default_factory=list)
    head_refinements: int = 0
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def total_crossings(self) -> int:
        return self.report.total_crossings

    def get_statistics(self) -> Dict[str, Any]:
        """
        Run statistics.

        Returns:
            Partition statistics, snake and crossing counts, head refinements
            and per-stage timings in seconds
        """
        stats = self.partition.statistics()
        stats.update({
            'snakes': len(self.report.snakes),
            'crossings': self.report.total_crossings,
            'head_refinements': self.head_refinements,
            'approx_f': self.approx_f.get_statistics(),
            'approx_g': self.approx_g.get_statistics(),
            'timings': dict(self.timings)
        })
        return stats


def _sort_key(point: Tuple[Coordinate, Coordinate]) -> Tuple[Fraction, Fraction]:
    return tuple(v.to_fraction() if isinstance(v, Dyadic) else Fraction(v) for v in point)


def _map_back(affine: AffineMap, report: CrossingReport) -> Tuple[Dict[str, List[Polyline]], List[ReportedCrossing]]:
    curves = {}
    for name, approx in (('f', report.resolved_approx_f), ('g', report.resolved_approx_g)):
        curves[name] = [
            ([affine.map_point(point) for point in points], closed)
            for points, closed in approx.polylines()
        ]
    crossings = [
        ReportedCrossing('transversal', affine.map_point(c.point), affine.map_box(c.isolating_hull))
        for c in report.transversal
    ] + [
        ReportedCrossing('snake', affine.map_point(c.point), affine.map_box(c.isolating_hull))
        for c in report.snake_crossings
    ]
    crossings.sort(key=lambda c: _sort_key(c.point))
    return curves, crossings


def _orient_snakes(
    working: CurvePair,
    partition: Partition,
    config: RunConfig,
    timer: _StageTimer
):
    """Approximate, find snakes and orient them; re-subdivide a head on ties."""
    refinements = 0
    while True:
        with timer.stage('approximate'):
            af = assemble(working.f, partition)
            ag = assemble(working.g, partition)
        with timer.stage('find_snakes'):
            snakes = find_snakes(af, ag, partition)
        try:
            with timer.stage('orientation'):
                verdicts = [snake_orientation(snake, af, ag, partition) for snake in snakes]
            return partition, af, ag, snakes, verdicts, refinements
        except EndpointOnSnakeBoundary as e:
            if refinements >= MAX_HEAD_REFINEMENTS:
                e.details['head_refinements'] = refinements
                logger.error(f"Snake orientation still ambiguous after {refinements} head refinements")
                raise
            refinements += 1
            logger.warning(f"Re-subdividing head {e.box} ({refinements}/{MAX_HEAD_REFINEMENTS})")
            with timer.stage('orientation'):
                partition = refine_box(
                    partition, working, partition.get(e.box.address),
                    config.max_depth, config.iteration_cap
                )


def run_pipeline(config: RunConfig) -> PipelineResult:
    """
    Execute the simultaneous approximation for one configuration.

    Args:
        config: Validated (or validatable) run configuration

    Returns:
        PipelineResult with the certified report and mapped output

    Raises:
        CurvePairError: Any stage failure, tagged with its stage
    """
    config.validate()
    timer = _StageTimer()
    logger.info(f"Running pipeline for f={config.f_text!r}, g={config.g_text!r} on {list(config.region)}")

    with timer.stage('parse'):
        pair = CurvePair.parse(config.f_text, config.g_text)

    with timer.stage('rescale'):
        square = choose_square(tuple(config.region))
        affine = AffineMap(tuple(config.region), square)
        working = pair.rescaled(tuple(config.region), square)
        region = Region.from_rect(square)

    with timer.stage('subdivide'):
        partition = subdivide(working, region, config.max_depth, config.min_depth)
    with timer.stage('balance'):
        partition = balance(partition, working)
    with timer.stage('verify_rule4'):
        partition = verify_rule4(partition, working, config.max_depth, config.iteration_cap)

    partition, af, ag, snakes, verdicts, refinements = _orient_snakes(working, partition, config, timer)

    with timer.stage('resolve'):
        rf, rg, snake_crossings = resolve_snakes(af, ag, snakes, verdicts, partition)
    with timer.stage('transversal'):
        transversal = find_transversal(rf, rg, partition)
    with timer.stage('report'):
        report = build_report(transversal, snake_crossings, rf, rg, snakes)
    with timer.stage('map_back'):
        curves, crossings = _map_back(affine, report)

    result = PipelineResult(
        config=config,
        pair=pair,
        working_pair=working,
        affine=affine,
        partition=partition,
        approx_f=af,
        approx_g=ag,
        report=report,
        curves=curves,
        crossings=crossings,
        head_refinements=refinements,
        timings=timer.timings
    )
    logger.info(f"Pipeline finished: {report.total_crossings} crossings, {len(partition)} leaves")
    return result
