"""
Crossing Certification Module

Turns two approximations built on the same partition into a certified crossing
report:

- transversal crossings: a segment of A(f) properly crosses a segment of A(g)
  inside a leaf; the certificate is hull(N1(leaf)).
- snakes: maximal chains where A(f) and A(g) share vertices or whole segments.
  The orientation of the two branches at each head decides whether the curves
  cross inside the snake. Shared vertices are then pushed apart along their
  edges, and crossing snakes get one explicit crossing point in the middle.

Example Usage:
    af, ag = assemble(pair.f, partition), assemble(pair.g, partition)
    snakes = find_snakes(af, ag, partition)
    verdicts = [snake_orientation(s, af, ag, partition) for s in snakes]
    rf, rg, snake_crossings = resolve_snakes(af, ag, snakes, verdicts, partition)
    transversal = find_transversal(rf, rg, partition)
    report = build_report(transversal, snake_crossings, rf, rg, snakes)
    print(report.total_crossings)
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

from curvepair.approximation import CurveApprox, Segment
from curvepair.arith import Dyadic, IBox, Point
from curvepair.errors import CurvePairError
from curvepair.subdivision import Address, BoxNode, Partition, Side, members_hull, neighborhood


logger = logging.getLogger(__name__)


FractionPoint = Tuple[Fraction, Fraction]

EIGHTH = Dyadic(1, -3)


class PairingError(CurvePairError):
    """Base exception for crossing certification errors."""

    stage = "pairing"


class OpenSnake(PairingError):
    """A snake reaches the region boundary without separating."""
    pass


class ClosedSnake(PairingError):
    """Shared segments form a closed loop, so the snake has no heads."""
    pass


class EndpointOnSnakeBoundary(PairingError):
    """A branch at a head ends on the snake's own boundary, so its orientation is undecided."""
    pass


class Orientation(Enum):
    CLOCKWISE = "cw"
    COUNTERCLOCKWISE = "ccw"


class SnakeVerdict(Enum):
    CROSSING = "crossing"
    NO_CROSSING = "no_crossing"


@dataclass(frozen=True)
class TransversalCrossing:
    """Proper crossing of one A(f) segment and one A(g) segment inside box."""

    box: BoxNode
    point: FractionPoint
    isolating_hull: IBox

    def to_dict(self) -> Dict[str, Any]:
        return {
            'type': 'transversal',
            'box': self.box.to_dict(),
            'point': [float(self.point[0]), float(self.point[1])],
            'hull': self.isolating_hull.to_list()
        }


@dataclass
class Snake:
    """
    Chain of shared structure between A(f) and A(g).

    vertices[i] and vertices[i + 1] are joined by shared[i]; a degenerate snake
    has one vertex and no shared segments.
    """

    vertices: List[Point]
    shared: List[Segment]
    heads: Tuple[BoxNode, BoxNode]
    endpoints: Tuple[Point, Point, Point, Point]

    @property
    def boxes(self) -> List[BoxNode]:
        return [segment.box for segment in self.shared]

    @property
    def is_degenerate(self) -> bool:
        return not self.shared

    def to_dict(self) -> Dict[str, Any]:
        return {
            'vertices': [[float(x), float(y)] for x, y in self.vertices],
            'boxes': [box.to_dict() for box in self.boxes],
            'heads': [head.to_dict() for head in self.heads]
        }


@dataclass(frozen=True)
class SnakeCrossing:
    """Crossing inserted while resolving a snake."""

    snake: Snake
    point: Point
    isolating_hull: IBox

    def to_dict(self) -> Dict[str, Any]:
        return {
            'type': 'snake',
            'point': [float(self.point[0]), float(self.point[1])],
            'hull': self.isolating_hull.to_list(),
            'shared_segments': len(self.snake.shared)
        }


@dataclass
class CrossingReport:
    """Certified crossings together with the resolved approximations."""

    transversal: List[TransversalCrossing]
    snake_crossings: List[SnakeCrossing]
    resolved_approx_f: CurveApprox
    resolved_approx_g: CurveApprox
    snakes: List[Snake] = field(default_factory=list)

    @property
    def total_crossings(self) -> int:
        return len(self.transversal) + len(self.snake_crossings)

    def crossing_hulls(self) -> List[IBox]:
        return [c.isolating_hull for c in self.transversal] + [c.isolating_hull for c in self.snake_crossings]

    def get_summary(self) -> Dict[str, Any]:
        return {
            'crossings': self.total_crossings,
            'transversal': len(self.transversal),
            'snake_crossings': len(self.snake_crossings),
            'snakes': len(self.snakes)
        }

    def __repr__(self) -> str:
        return (
            f"CrossingReport(transversal={len(self.transversal)}, "
            f"snake_crossings={len(self.snake_crossings)}, snakes={len(self.snakes)})"
        )


# ============================================================================
# Exact segment intersection
# ============================================================================

@dataclass(frozen=True)
class Intersection:
    """Intersection of two closed segments: a single point or an overlap."""

    kind: str
    points: Tuple[FractionPoint, ...]


def _fpoint(point) -> FractionPoint:
    x, y = point
    x = x.to_fraction() if isinstance(x, Dyadic) else Fraction(x)
    y = y.to_fraction() if isinstance(y, Dyadic) else Fraction(y)
    return (x, y)


def _fcross(a: FractionPoint, b: FractionPoint) -> Fraction:
    return a[0] * b[1] - a[1] * b[0]


def segment_intersection(s: Sequence, t: Sequence) -> Optional[Intersection]:
    """
    Exact intersection of closed segments s = (a, b) and t = (c, d).

    Returns:
        None, Intersection('point', (p,)) or Intersection('overlap', (p, q))
    """
    p0, p1 = _fpoint(s[0]), _fpoint(s[1])
    q0, q1 = _fpoint(t[0]), _fpoint(t[1])
    r = (p1[0] - p0[0], p1[1] - p0[1])
    u = (q1[0] - q0[0], q1[1] - q0[1])
    qp = (q0[0] - p0[0], q0[1] - p0[1])
    denom = _fcross(r, u)

    if denom == 0:
        if _fcross(qp, r) != 0:
            return None
        rr = r[0] * r[0] + r[1] * r[1]
        t0 = (qp[0] * r[0] + qp[1] * r[1]) / rr
        t1 = t0 + (u[0] * r[0] + u[1] * r[1]) / rr
        lo, hi = max(Fraction(0), min(t0, t1)), min(Fraction(1), max(t0, t1))
        if lo > hi:
            return None
        start = (p0[0] + lo * r[0], p0[1] + lo * r[1])
        if lo == hi:
            return Intersection('point', (start,))
        end = (p0[0] + hi * r[0], p0[1] + hi * r[1])
        return Intersection('overlap', (start, end))

    along_s = _fcross(qp, u) / denom
    along_t = _fcross(qp, r) / denom
    if 0 <= along_s <= 1 and 0 <= along_t <= 1:
        return Intersection('point', ((p0[0] + along_s * r[0], p0[1] + along_s * r[1]),))
    return None


def approximation_intersections(af: CurveApprox, ag: CurveApprox, buckets: int = 64) -> List[Intersection]:
    """
    Every distinct intersection between segments of af and segments of ag.

    Segments are bucketed on a uniform grid over their common bounding box and
    only pairs sharing a bucket are tested exactly.
    """
    if af.is_empty() or ag.is_empty():
        return []
    points = [_fpoint(p) for s in af.segments + ag.segments for p in (s.start, s.end)]
    xmin = min(p[0] for p in points)
    ymin = min(p[1] for p in points)
    span = max(max(p[0] for p in points) - xmin, max(p[1] for p in points) - ymin) or Fraction(1)
    cell = span / buckets

    def cells(segment: Segment):
        a, b = _fpoint(segment.start), _fpoint(segment.end)
        i0 = int((min(a[0], b[0]) - xmin) // cell)
        i1 = int((max(a[0], b[0]) - xmin) // cell)
        j0 = int((min(a[1], b[1]) - ymin) // cell)
        j1 = int((max(a[1], b[1]) - ymin) // cell)
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                yield (i, j)

    grid: Dict[Tuple[int, int], List[int]] = defaultdict(list)
    for index, segment in enumerate(ag.segments):
        for key in cells(segment):
            grid[key].append(index)

    found: Set[Intersection] = set()
    tested: Set[Tuple[int, int]] = set()
    for i, sf in enumerate(af.segments):
        for key in cells(sf):
            for j in grid.get(key, ()):
                if (i, j) in tested:
                    continue
                tested.add((i, j))
                sg = ag.segments[j]
                hit = segment_intersection((sf.start, sf.end), (sg.start, sg.end))
                if hit is not None:
                    found.add(hit)
    return sorted(found, key=lambda h: (h.kind, h.points))


# ============================================================================
# Transversal crossings
# ============================================================================

def find_transversal(af: CurveApprox, ag: CurveApprox, partition: Partition) -> List[TransversalCrossing]:
    """
    Proper crossings of an A(f) segment with an A(g) segment inside one leaf.

    Segment pairs that share an endpoint are skipped; those meet at a shared
    vertex and are handled as snakes.
    """
    f_by_box: Dict[Tuple, List[Segment]] = defaultdict(list)
    g_by_box: Dict[Tuple, List[Segment]] = defaultdict(list)
    for segment in af.segments:
        f_by_box[segment.box.address].append(segment)
    for segment in ag.segments:
        g_by_box[segment.box.address].append(segment)

    crossings: List[TransversalCrossing] = []
    for address in sorted(set(f_by_box) & set(g_by_box)):
        for sf in f_by_box[address]:
            for sg in g_by_box[address]:
                if sf.start in sg or sf.end in sg:
                    continue
                hit = segment_intersection((sf.start, sf.end), (sg.start, sg.end))
                if hit is None or hit.kind != 'point':
                    continue
                box = partition.get(address)
                hull = neighborhood(partition, box, 1).hull
                crossings.append(TransversalCrossing(box, hit.points[0], hull))
                logger.debug(f"Transversal crossing in {box} at {hit.points[0]}")
    logger.info(f"Found {len(crossings)} transversal crossings")
    return crossings


# ============================================================================
# Snakes
# ============================================================================

def _head_branch(approx: CurveApprox, head: BoxNode, vertex: Point) -> Point:
    segment = approx.segment_at(head, vertex)
    if segment is None:
        error_msg = f"No segment of the approximation ends at {vertex} inside head {head}"
        logger.error(error_msg)
        raise PairingError(error_msg, box=head)
    return segment.other_end(vertex)


def _head_beyond(approx: CurveApprox, vertex: Point, inner: BoxNode) -> BoxNode:
    edge = approx.vertices[vertex]
    head = edge.other_owner(inner)
    if head is None:
        error_msg = f"Snake through {inner} reaches the region boundary at {vertex} without separating"
        logger.error(error_msg)
        raise OpenSnake(error_msg, box=inner)
    return head


def find_snakes(af: CurveApprox, ag: CurveApprox, partition: Partition) -> List[Snake]:
    """
    Maximal chains of shared vertices and shared segments, with their heads.

    Raises:
        OpenSnake: If a chain ends on the region boundary
        ClosedSnake: If shared segments form a cycle
    """
    shared_vertices = set(af.vertices) & set(ag.vertices)
    if not shared_vertices:
        return []
    g_keys = ag.segment_keys()
    shared_segments = [s for s in af.segments if s.key in g_keys]

    incident: Dict[Point, List[Segment]] = {v: [] for v in shared_vertices}
    for segment in shared_segments:
        incident[segment.start].append(segment)
        incident[segment.end].append(segment)

    snakes: List[Snake] = []
    visited: Set[Point] = set()
    for start in sorted(shared_vertices):
        if start in visited:
            continue
        component = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for segment in incident[v]:
                w = segment.other_end(v)
                if w not in component:
                    component.add(w)
                    stack.append(w)
        visited |= component

        ends = sorted(v for v in component if len(incident[v]) < 2)
        if not ends:
            box = incident[start][0].box
            error_msg = f"Shared segments through {box} form a closed loop"
            logger.error(error_msg)
            raise ClosedSnake(error_msg, box=box)

        vertices = [ends[0]]
        chain: List[Segment] = []
        previous: Optional[Segment] = None
        while True:
            step = next((s for s in incident[vertices[-1]] if s is not previous), None)
            if step is None:
                break
            chain.append(step)
            vertices.append(step.other_end(vertices[-1]))
            previous = step

        if chain:
            head1 = _head_beyond(af, vertices[0], chain[0].box)
            head2 = _head_beyond(af, vertices[-1], chain[-1].box)
        else:
            edge = af.vertices[vertices[0]]
            if edge.is_boundary:
                error_msg = f"Shared vertex {vertices[0]} lies on the region boundary"
                logger.error(error_msg)
                raise OpenSnake(error_msg, box=edge.owners[0])
            head1, head2 = edge.owners

        endpoints = (
            _head_branch(af, head1, vertices[0]),
            _head_branch(ag, head1, vertices[0]),
            _head_branch(af, head2, vertices[-1]),
            _head_branch(ag, head2, vertices[-1])
        )
        snakes.append(Snake(vertices, chain, (head1, head2), endpoints))

    logger.info(f"Found {len(snakes)} snakes")
    return snakes


def _clockwise_piece(side: Side, fixed: Dyadic, lo: Dyadic, hi: Dyadic) -> Tuple[Point, Point]:
    """A piece of a box side, oriented so the box lies on its right."""
    if side is Side.WEST:
        return (fixed, lo), (fixed, hi)
    if side is Side.NORTH:
        return (lo, fixed), (hi, fixed)
    if side is Side.EAST:
        return (fixed, hi), (fixed, lo)
    return (hi, fixed), (lo, fixed)


def _clockwise_boundary(partition: Partition, members: List[BoxNode], head: BoxNode) -> List[Point]:
    """
    Corners of the union of members in clockwise order.

    Each returned point starts one boundary piece, a subdivision edge with one
    side inside the union; the piece ends where the next one starts.

    Raises:
        EndpointOnSnakeBoundary: If the boundary is not one simple loop
    """
    region = partition.region
    inside = {m.address for m in members}
    following: Dict[Point, Point] = {}
    for box in sorted(members, key=lambda m: m.address):
        geometry = box.ibox(region)
        for side in Side:
            vertical = side in (Side.WEST, Side.EAST)
            fixed = {
                Side.WEST: geometry.x.lo, Side.EAST: geometry.x.hi,
                Side.SOUTH: geometry.y.lo, Side.NORTH: geometry.y.hi
            }[side]
            neighbors = partition.side_neighbors(box, side)
            if any(other.depth > box.depth for other in neighbors):
                pieces = [(other, other.ibox(region)) for other in neighbors]
            else:
                pieces = [(neighbors[0] if neighbors else None, geometry)]
            for other, extent in pieces:
                if other is not None and other.address in inside:
                    continue
                span = extent.y if vertical else extent.x
                start, end = _clockwise_piece(side, fixed, span.lo, span.hi)
                if start in following:
                    error_msg = f"Neighborhood of head {head} pinches at {start}"
                    logger.warning(error_msg)
                    raise EndpointOnSnakeBoundary(error_msg, box=head)
                following[start] = end

    start = min(following)
    cycle = [start]
    point = following[start]
    while point != start and point in following and len(cycle) <= len(following):
        cycle.append(point)
        point = following[point]
    if point != start or len(cycle) != len(following):
        error_msg = f"Neighborhood of head {head} is not bounded by one loop"
        logger.warning(error_msg)
        raise EndpointOnSnakeBoundary(error_msg, box=head)
    return cycle


def _boundary_positions(cycle: List[Point]) -> Tuple[Dict[Point, Dyadic], Dyadic]:
    """Clockwise arc length from cycle[0] to the midpoint of every piece, and the perimeter."""
    positions: Dict[Point, Dyadic] = {}
    total = Dyadic(0)
    for i, a in enumerate(cycle):
        b = cycle[(i + 1) % len(cycle)]
        length = abs(b[0] - a[0]) + abs(b[1] - a[1])
        positions[((a[0] + b[0]).half(), (a[1] + b[1]).half())] = total + length.half()
        total = total + length
    return positions, total


def _branch_exit(
    approx: CurveApprox,
    head: BoxNode,
    attachment: Point,
    inside: Set[Address],
    snake_boxes: Set[Address]
) -> Point:
    """
    Follow a branch from the attachment through head to where it leaves the union.

    Raises:
        EndpointOnSnakeBoundary: If the branch leaves into a snake box or never leaves
    """
    box, point = head, attachment
    seen = {attachment}
    while True:
        segment = approx.segment_at(box, point)
        if segment is None:
            error_msg = f"No segment of the approximation ends at {point} inside {box}"
            logger.error(error_msg)
            raise PairingError(error_msg, box=box)
        point = segment.other_end(point)
        if point in seen:
            error_msg = f"Branch from head {head} returns to {point} without leaving its neighborhood"
            logger.warning(error_msg)
            raise EndpointOnSnakeBoundary(error_msg, box=head)
        seen.add(point)
        beyond = approx.vertices[point].other_owner(box)
        if beyond is not None and beyond.address in snake_boxes:
            error_msg = f"Branch from head {head} ends on the snake boundary at {point}"
            logger.warning(error_msg)
            raise EndpointOnSnakeBoundary(error_msg, box=head)
        if beyond is None or beyond.address not in inside:
            return point
        box = beyond


def head_orientation(
    snake: Snake,
    index: int,
    af: CurveApprox,
    ag: CurveApprox,
    partition: Partition
) -> Orientation:
    """
    Orientation of the two branches at one head of a snake.

    The walk runs clockwise along the boundary of N1(head), leaving out the
    snake's own boxes (the other head for a degenerate snake), starting where
    the snake attaches. Both branches are followed from the attachment until
    they reach that boundary.

    Args:
        snake: Snake to orient
        index: 0 for the first head, 1 for the second
        af: Approximation of f
        ag: Approximation of g

    Returns:
        CLOCKWISE when the f-branch is met before the g-branch

    Raises:
        EndpointOnSnakeBoundary: If a branch ends on the snake's part of the
            boundary or both branches end at the same point
    """
    head = snake.heads[index]
    attachment = snake.vertices[0] if index == 0 else snake.vertices[-1]
    snake_boxes = {box.address for box in snake.boxes} or {snake.heads[1 - index].address}
    snake_boxes.discard(head.address)
    members = [m for m in neighborhood(partition, head, 1).members if m.address not in snake_boxes]
    inside = {m.address for m in members}

    positions, perimeter = _boundary_positions(_clockwise_boundary(partition, members, head))
    p = _branch_exit(af, head, attachment, inside, snake_boxes)
    q = _branch_exit(ag, head, attachment, inside, snake_boxes)
    if p == q:
        error_msg = f"Both branches leave the neighborhood of head {head} at {p}"
        logger.warning(error_msg)
        raise EndpointOnSnakeBoundary(error_msg, box=head)

    origin = positions[attachment]

    def distance(point: Point) -> Dyadic:
        d = positions[point] - origin
        return d + perimeter if d < 0 else d

    return Orientation.CLOCKWISE if distance(p) < distance(q) else Orientation.COUNTERCLOCKWISE


def snake_orientation(snake: Snake, af: CurveApprox, ag: CurveApprox, partition: Partition) -> SnakeVerdict:
    """Crossing iff both heads report the same orientation."""
    first = head_orientation(snake, 0, af, ag, partition)
    second = head_orientation(snake, 1, af, ag, partition)
    verdict = SnakeVerdict.CROSSING if first is second else SnakeVerdict.NO_CROSSING
    logger.debug(f"Snake with {len(snake.shared)} shared segments: {first.value}/{second.value} -> {verdict.value}")
    return verdict


def snake_hull(snake: Snake, partition: Partition) -> IBox:
    """hull(N(S)) over the snake's boxes and both heads."""
    members: Set[BoxNode] = set()
    for box in snake.boxes + list(snake.heads):
        members |= neighborhood(partition, box, 1).members
    return members_hull(partition.region, members)


def _travel_normals(snake: Snake, approx: CurveApprox, partition: Partition) -> List[Tuple[int, int]]:
    region = partition.region
    normals = []
    for i, vertex in enumerate(snake.vertices):
        edge = approx.vertices[vertex]
        ahead = snake.shared[i].box if i < len(snake.shared) else snake.heads[1]
        normals.append(edge.normal_into(ahead, region))
    return normals


def _f_on_left(snake: Snake) -> bool:
    """Whether A(f) leaves the first head on the left of the travel direction."""
    v = snake.vertices[0]
    p, q = snake.endpoints[0], snake.endpoints[1]
    cross = (p[0] - v[0]) * (q[1] - v[1]) - (p[1] - v[1]) * (q[0] - v[0])
    return cross > 0


def _rebuild(
    approx: CurveApprox,
    moves: Dict[Point, Point],
    splits: Dict[Tuple, List[Segment]],
    inserted: List[Point]
) -> CurveApprox:
    vertices = {moves.get(v, v): edge for v, edge in approx.vertices.items()}
    for point in inserted:
        vertices[point] = None
    segments: List[Segment] = []
    for segment in approx.segments:
        if segment.key in splits:
            segments.extend(splits[segment.key])
        else:
            segments.append(Segment.of(
                segment.box,
                moves.get(segment.start, segment.start),
                moves.get(segment.end, segment.end)
            ))
    return CurveApprox(vertices, segments)


def resolve_snakes(
    af: CurveApprox,
    ag: CurveApprox,
    snakes: List[Snake],
    verdicts: List[SnakeVerdict],
    partition: Partition
) -> Tuple[CurveApprox, CurveApprox, List[SnakeCrossing]]:
    """
    Separate every snake and insert one crossing into each crossing snake.

    Each shared vertex moves by an eighth of its edge length along the edge,
    A(f) to one side of the snake and A(g) to the other. In a crossing snake the
    sides swap after the middle shared segment, whose midpoint becomes the
    common crossing point; a degenerate crossing snake keeps its shared vertex
    as the crossing.

    Returns:
        (resolved A(f), resolved A(g), snake crossings with hull(N(S)))
    """
    if not snakes:
        return af, ag, []

    f_moves: Dict[Point, Point] = {}
    g_moves: Dict[Point, Point] = {}
    f_splits: Dict[Tuple, List[Segment]] = {}
    g_splits: Dict[Tuple, List[Segment]] = {}
    inserted: List[Point] = []
    crossings: List[SnakeCrossing] = []

    for snake, verdict in zip(snakes, verdicts):
        hull = snake_hull(snake, partition)
        crossing = verdict is SnakeVerdict.CROSSING
        if crossing and snake.is_degenerate:
            crossings.append(SnakeCrossing(snake, snake.vertices[0], hull))
            continue

        middle = len(snake.shared) // 2
        side = 1 if _f_on_left(snake) else -1
        for i, (vertex, normal) in enumerate(zip(snake.vertices, _travel_normals(snake, af, partition))):
            delta = af.vertices[vertex].length * EIGHTH
            sign = -side if crossing and i > middle else side
            dx, dy = delta * (-normal[1] * sign), delta * (normal[0] * sign)
            f_moves[vertex] = (vertex[0] + dx, vertex[1] + dy)
            g_moves[vertex] = (vertex[0] - dx, vertex[1] - dy)

        if crossing:
            segment = snake.shared[middle]
            a, b = snake.vertices[middle], snake.vertices[middle + 1]
            point = ((a[0] + b[0]).half(), (a[1] + b[1]).half())
            f_splits[segment.key] = [
                Segment.of(segment.box, f_moves[a], point),
                Segment.of(segment.box, point, f_moves[b])
            ]
            g_splits[segment.key] = [
                Segment.of(segment.box, g_moves[a], point),
                Segment.of(segment.box, point, g_moves[b])
            ]
            inserted.append(point)
            crossings.append(SnakeCrossing(snake, point, hull))

    rf = _rebuild(af, f_moves, f_splits, inserted)
    rg = _rebuild(ag, g_moves, g_splits, inserted)
    logger.info(
        f"Resolved {len(snakes)} snakes: {len(crossings)} crossings, "
        f"{len(snakes) - len(crossings)} separated"
    )
    return rf, rg, crossings


def build_report(
    transversal: List[TransversalCrossing],
    snake_crossings: List[SnakeCrossing],
    resolved_f: CurveApprox,
    resolved_g: CurveApprox,
    snakes: Optional[List[Snake]] = None
) -> CrossingReport:
    """Aggregate crossings; total = transversal + crossing snakes."""
    report = CrossingReport(transversal, snake_crossings, resolved_f, resolved_g, list(snakes or []))
    logger.info(f"Crossing report: {report.get_summary()}")
    return report
