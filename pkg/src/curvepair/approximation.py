"""
Approximation Module

Piecewise-linear approximation of one curve on an accepted, balanced partition:

1. the sign of p at every leaf corner (exact; a zero counts as positive),
2. one vertex at the midpoint of every subdivision edge whose end signs differ,
3. inside each leaf, a non-crossing matching of its vertices by straight segments.

An edge is a leaf side that is not made of sides of finer neighbors, so the side
of a coarse box next to two finer boxes carries two edges.

Example Usage:
    f = parse_polynomial("x^2 + y^2 - 4")
    partition = balance(subdivide(CurvePair(f, parse_polynomial("1")), Region(-4, -4, 8)))

    approx = assemble(f, partition)
    for points, closed in approx.polylines():
        print(len(points), closed)
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple

from curvepair.arith import Dyadic, IBox, Point
from curvepair.errors import CurvePairError
from curvepair.poly import BivariatePolynomial, eval_exact
from curvepair.subdivision import Address, BoxNode, Partition, Region, Side


logger = logging.getLogger(__name__)


Polyline = Tuple[List[Point], bool]


class ApproximationError(CurvePairError):
    """Base exception for approximation errors."""

    stage = "approximate"


class OddVertexCount(ApproximationError):
    """A box carries an odd number of curve vertices."""
    pass


@dataclass(frozen=True)
class SubdivisionEdge:
    """
    Edge of the subdivision between two dyadic points.

    owners holds the one or two leaves the edge borders, ordered west/south first.
    """

    start: Point
    end: Point
    owners: Tuple[BoxNode, ...]

    @property
    def midpoint(self) -> Point:
        return ((self.start[0] + self.end[0]).half(), (self.start[1] + self.end[1]).half())

    @property
    def is_vertical(self) -> bool:
        return self.start[0] == self.end[0]

    @property
    def length(self) -> Dyadic:
        if self.is_vertical:
            return self.end[1] - self.start[1]
        return self.end[0] - self.start[0]

    @property
    def is_boundary(self) -> bool:
        return len(self.owners) == 1

    def other_owner(self, box: BoxNode) -> Optional[BoxNode]:
        for owner in self.owners:
            if owner != box:
                return owner
        return None

    def direction(self) -> Tuple[int, int]:
        """Unit direction from start to end."""
        return (0, 1) if self.is_vertical else (1, 0)

    def normal_into(self, box: BoxNode, region: Region) -> Tuple[int, int]:
        """Unit normal of the edge pointing into box."""
        center = box.ibox(region).midpoint
        if self.is_vertical:
            return (1, 0) if center[0] > self.start[0] else (-1, 0)
        return (0, 1) if center[1] > self.start[1] else (0, -1)


@dataclass(frozen=True)
class Segment:
    """Straight piece of an approximation inside one leaf."""

    box: BoxNode
    start: Point
    end: Point

    @classmethod
    def of(cls, box: BoxNode, a: Point, b: Point) -> 'Segment':
        return cls(box, a, b) if a <= b else cls(box, b, a)

    @property
    def key(self) -> Tuple[Address, Point, Point]:
        return (self.box.address, self.start, self.end)

    def other_end(self, point: Point) -> Point:
        return self.end if point == self.start else self.start

    def __contains__(self, point: Point) -> bool:
        return point == self.start or point == self.end


class EdgeIndex:
    """All subdivision edges of a partition, by midpoint and by owning leaf."""

    def __init__(self, partition: Partition):
        self.partition = partition
        self.edges: Dict[Point, SubdivisionEdge] = {}
        self.by_box: Dict[Address, List[SubdivisionEdge]] = {}
        self._build()

    def _side_segment(self, box: IBox, side: Side) -> Tuple[Point, Point]:
        x0, y0, x1, y1 = box.bounds()
        if side is Side.SOUTH:
            return (x0, y0), (x1, y0)
        if side is Side.EAST:
            return (x1, y0), (x1, y1)
        if side is Side.NORTH:
            return (x0, y1), (x1, y1)
        return (x0, y0), (x0, y1)

    def _build(self) -> None:
        region = self.partition.region
        for leaf in self.partition.leaves:
            geometry = leaf.ibox(region)
            for side in Side:
                neighbors = self.partition.side_neighbors(leaf, side)
                if any(other.depth > leaf.depth for other in neighbors):
                    continue
                start, end = self._side_segment(geometry, side)
                owners = [leaf] + neighbors
                if side in (Side.WEST, Side.SOUTH):
                    owners.reverse()
                edge = SubdivisionEdge(start, end, tuple(owners))
                self.edges.setdefault(edge.midpoint, edge)
        for edge in self.edges.values():
            for owner in edge.owners:
                self.by_box.setdefault(owner.address, []).append(edge)

    def edges_of(self, box: BoxNode) -> List[SubdivisionEdge]:
        return self.by_box.get(box.address, [])

    def __len__(self) -> int:
        return len(self.edges)


def build_edges(partition: Partition) -> Dict[Point, SubdivisionEdge]:
    """All subdivision edges keyed by their midpoint."""
    return EdgeIndex(partition).edges


def _sign(value: Dyadic) -> int:
    return -1 if value < 0 else 1


def sign_map(p: BivariatePolynomial, partition: Partition) -> Dict[Point, int]:
    """Exact sign of p at every leaf corner; exact zeros are reported as +1."""
    signs: Dict[Point, int] = {}
    region = partition.region
    for leaf in partition.leaves:
        for corner in leaf.ibox(region).corners():
            if corner not in signs:
                signs[corner] = _sign(eval_exact(p, corner))
    return signs


def place_vertices(
    p: BivariatePolynomial,
    partition: Partition,
    signs: Optional[Dict[Point, int]] = None,
    edges: Optional[Dict[Point, SubdivisionEdge]] = None
) -> Dict[Point, SubdivisionEdge]:
    """
    One vertex at the midpoint of every sign-changing edge.

    Returns:
        Mapping from vertex point to the edge it lies on
    """
    if signs is None:
        signs = sign_map(p, partition)
    if edges is None:
        edges = build_edges(partition)
    vertices = {}
    for midpoint, edge in edges.items():
        if signs[edge.start] != signs[edge.end]:
            vertices[midpoint] = edge
    return vertices


# ============================================================================
# Per-box connection
# ============================================================================

def _perimeter_position(point: Point, box: IBox) -> Tuple[Dyadic, Side]:
    """Counterclockwise arc length from the lower-left corner, with the side hit."""
    x, y = point
    x0, y0, x1, y1 = box.bounds()
    w = x1 - x0
    if y == y0 and x < x1:
        return x - x0, Side.SOUTH
    if x == x1 and y < y1:
        return w + (y - y0), Side.EAST
    if y == y1 and x > x0:
        return 2 * w + (x1 - x), Side.NORTH
    return 3 * w + (y1 - y), Side.WEST


def _noncrossing_matchings(items: List[int]) -> Iterator[List[Tuple[int, int]]]:
    if not items:
        yield []
        return
    first = items[0]
    for k in range(1, len(items), 2):
        for inner in _noncrossing_matchings(items[1:k]):
            for outer in _noncrossing_matchings(items[k + 1:]):
                yield [(first, items[k])] + inner + outer


def _cross(o: Point, a: Point, b: Point) -> Dyadic:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


class _BoxBoundary:
    """Vertices and sign nodes of one box in counterclockwise order."""

    def __init__(self, box: IBox, vertices: List[Point], nodes: Dict[Point, int]):
        self.box = box
        placed = sorted(((_perimeter_position(v, box), v) for v in vertices), key=lambda item: item[0][0])
        self.vertices = [v for _, v in placed]
        self.vertex_pos = [pos for (pos, _), _ in placed]
        self.vertex_side = [side for (_, side), _ in placed]
        ordered = sorted((_perimeter_position(n, box)[0], n) for n in nodes)
        self.node_pos = [pos for pos, _ in ordered]
        self.node_sign = [nodes[n] for _, n in ordered]
        self.nodes = [n for _, n in ordered]

    def sign_after(self, position: Dyadic) -> int:
        for pos, sign in zip(self.node_pos, self.node_sign):
            if pos > position:
                return sign
        return self.node_sign[0]

    def sign_before(self, position: Dyadic) -> int:
        for pos, sign in zip(reversed(self.node_pos), reversed(self.node_sign)):
            if pos < position:
                return sign
        return self.node_sign[-1]

    def sign_consistent(self, matching: List[Tuple[int, int]]) -> bool:
        for i, j in matching:
            if self.sign_after(self.vertex_pos[i]) != self.sign_before(self.vertex_pos[j]):
                return False
        return True

    def same_side_free(self, matching: List[Tuple[int, int]]) -> bool:
        return all(self.vertex_side[i] != self.vertex_side[j] for i, j in matching)

    def center_region_signs(self, matching: List[Tuple[int, int]], center: Point) -> List[int]:
        """Signs of the nodes lying in the same region as the center."""
        chords = []
        for i, j in matching:
            a, b = self.vertices[i], self.vertices[j]
            side = _cross(a, b, center).sign()
            if side:
                chords.append((a, b, side))
        return [
            sign for node, sign in zip(self.nodes, self.node_sign)
            if all(_cross(a, b, node).sign() == side for a, b, side in chords)
        ]


def connect_box(
    p: BivariatePolynomial,
    box: BoxNode,
    vertices: List[Point],
    nodes: Dict[Point, int],
    region: Region
) -> List[Tuple[Point, Point]]:
    """
    Match the vertices on a box's boundary by non-crossing segments.

    Vertices on the same geometric side are never paired. When several
    matchings remain (four vertices with alternating corner signs), the one
    whose region around the box center has the exact sign of p at the center
    is chosen.

    Args:
        p: Polynomial of the curve
        box: Leaf being connected
        vertices: Curve vertices on the box boundary
        nodes: Signs at the endpoints of the box's edges
        region: Partition region

    Returns:
        List of (a, b) point pairs

    Raises:
        OddVertexCount: If an odd number of vertices is given
    """
    if not vertices:
        return []
    if len(vertices) % 2:
        error_msg = f"{box} carries {len(vertices)} vertices"
        logger.error(error_msg)
        raise OddVertexCount(error_msg, box=box)

    geometry = box.ibox(region)
    boundary = _BoxBoundary(geometry, vertices, nodes)
    indices = list(range(len(vertices)))
    consistent = [m for m in _noncrossing_matchings(indices) if boundary.sign_consistent(m)]
    candidates = [m for m in consistent if boundary.same_side_free(m)]

    if not candidates:
        logger.debug(f"{box}: no matching avoids same-side pairs; pairing along the side")
        candidates = consistent or list(_noncrossing_matchings(indices))[:1]

    chosen = candidates[0]
    if len(candidates) > 1:
        center = geometry.midpoint
        center_sign = _sign(eval_exact(p, center))
        for matching in candidates:
            signs = boundary.center_region_signs(matching, center)
            if signs and all(s == center_sign for s in signs):
                chosen = matching
                break
        else:
            logger.warning(f"{box}: center sign does not single out a matching; using the first")

    return [(boundary.vertices[i], boundary.vertices[j]) for i, j in chosen]


# ============================================================================
# Assembly
# ============================================================================

class CurveApprox:
    """
    Polyline graph approximating one curve.

    vertices maps each vertex point to its subdivision edge (None for points
    inserted by snake resolution); segments are tagged with their leaf.
    """

    def __init__(
        self,
        vertices: Dict[Point, Optional[SubdivisionEdge]],
        segments: Iterable[Segment]
    ):
        self.vertices: Dict[Point, Optional[SubdivisionEdge]] = dict(vertices)
        self.segments: Tuple[Segment, ...] = tuple(segments)
        self._by_box_vertex: Optional[Dict[Tuple[Address, Point], Segment]] = None

    def __len__(self) -> int:
        return len(self.segments)

    def is_empty(self) -> bool:
        return not self.segments

    def segment_keys(self) -> set:
        return {s.key for s in self.segments}

    def segment_at(self, box: BoxNode, vertex: Point) -> Optional[Segment]:
        """The segment inside box that ends at vertex."""
        if self._by_box_vertex is None:
            index = {}
            for segment in self.segments:
                index[(segment.box.address, segment.start)] = segment
                index[(segment.box.address, segment.end)] = segment
            self._by_box_vertex = index
        return self._by_box_vertex.get((box.address, vertex))

    def adjacency(self) -> Dict[Point, List[Segment]]:
        adjacency: Dict[Point, List[Segment]] = {v: [] for v in self.vertices}
        for segment in self.segments:
            adjacency.setdefault(segment.start, []).append(segment)
            adjacency.setdefault(segment.end, []).append(segment)
        return adjacency

    def degree_map(self) -> Dict[Point, int]:
        return {v: len(segs) for v, segs in self.adjacency().items()}

    def components(self) -> List[Polyline]:
        """Connected components as (points, closed), open paths first."""
        adjacency = self.adjacency()
        used = set()
        result: List[Polyline] = []

        def walk(start: Point) -> Polyline:
            points = [start]
            current = start
            while True:
                step = next((s for s in adjacency[current] if s.key not in used), None)
                if step is None:
                    return points, False
                used.add(step.key)
                current = step.other_end(current)
                if current == start:
                    return points, True
                points.append(current)

        ends = sorted(v for v, segs in adjacency.items() if len(segs) == 1)
        for start in ends:
            if any(s.key not in used for s in adjacency[start]):
                result.append(walk(start))
        for start in sorted(adjacency):
            if any(s.key not in used for s in adjacency[start]):
                result.append(walk(start))
        return result

    def polylines(self) -> List[Polyline]:
        """Components in canonical order and orientation."""
        canonical = []
        for points, closed in self.components():
            if closed:
                k = points.index(min(points))
                points = points[k:] + points[:k]
                if len(points) > 2 and points[-1] < points[1]:
                    points = [points[0]] + points[:0:-1]
            elif points[-1] < points[0]:
                points = points[::-1]
            canonical.append((points, closed))
        canonical.sort(key=lambda item: item[0][0])
        return canonical

    def get_statistics(self) -> Dict[str, Any]:
        components = self.components()
        return {
            'vertices': len(self.vertices),
            'segments': len(self.segments),
            'components': len(components),
            'closed_components': sum(1 for _, closed in components if closed)
        }

    def __repr__(self) -> str:
        return f"CurveApprox(vertices={len(self.vertices)}, segments={len(self.segments)})"


def assemble(
    p: BivariatePolynomial,
    partition: Partition,
    edge_index: Optional[EdgeIndex] = None
) -> CurveApprox:
    """
    Build the approximation of V(p) on partition.

    Returns:
        CurveApprox whose components are closed polylines or paths ending on
        the boundary of the region
    """
    index = edge_index or EdgeIndex(partition)
    signs = sign_map(p, partition)
    vertices = place_vertices(p, partition, signs, index.edges)
    segments: List[Segment] = []
    for leaf in partition.leaves:
        box_edges = index.edges_of(leaf)
        on_box = [e.midpoint for e in box_edges if e.midpoint in vertices]
        if not on_box:
            continue
        nodes = {}
        for edge in box_edges:
            nodes[edge.start] = signs[edge.start]
            nodes[edge.end] = signs[edge.end]
        for a, b in connect_box(p, leaf, on_box, nodes, partition.region):
            segments.append(Segment.of(leaf, a, b))
    approx = CurveApprox(vertices, segments)
    logger.info(f"Assembled {p.to_text()}: {len(vertices)} vertices, {len(segments)} segments")
    return approx
