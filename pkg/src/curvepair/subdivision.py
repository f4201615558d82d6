"""
Subdivision Module

Quadtree over a square region R. Boxes are addressed by (depth, ix, iy); a box is
split until one of four acceptance rules holds:

    C0C0    both curves excluded by C0
    C0C1    f excluded, g passes C1
    C1C0    f passes C1, g excluded
    C1C1X   both pass C1 and C1x holds on hull(N2(B))

Boxes that touch the boundary of R and pass the fourth rule are recorded as
``boundary`` (the hull of N2 is clipped to R). After the queue empties the
partition is 2:1 balanced, and ``verify_rule4`` re-checks every rule-4 leaf
against its neighborhood in the final partition, refining until that holds.

Example Usage:
    pair = CurvePair.parse("x^2 + y^2 - 4", "(x-2)^2 + y^2 - 4")
    region = Region(-4, -4, 8)

    partition = subdivide(pair, region, max_depth=24)
    partition = balance(partition, pair)
    partition = verify_rule4(partition, pair)

    print(partition.statistics())
    print(neighborhood(partition, partition.leaves[0], 2).hull)
"""

import logging
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Deque, Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

from curvepair.arith import Dyadic, IBox, Interval
from curvepair.errors import CurvePairError
from curvepair.poly import CurvePair, Rectangle
from curvepair.predicates import c0, c1, c1_cross


logger = logging.getLogger(__name__)


Address = Tuple[int, int, int]

DEFAULT_MAX_DEPTH = 24
DEFAULT_ITERATION_CAP = 64


class SubdivisionError(CurvePairError):
    """Base exception for subdivision errors."""

    stage = "subdivide"


class MaxDepthExceeded(SubdivisionError):
    """A box still fails every acceptance rule at the depth cap."""
    pass


class IterationCapExceeded(SubdivisionError):
    """verify_rule4 did not reach a fixpoint within the configured rounds."""

    stage = "verify_rule4"


class AcceptanceInvariantError(SubdivisionError):
    """A child created by balancing failed its parent's acceptance rule."""

    stage = "balance"


class AcceptRule(Enum):
    """Acceptance rule that made a box a leaf."""

    C0C0 = "C0C0"
    C0C1 = "C0C1"
    C1C0 = "C1C0"
    C1C1X = "C1C1X"
    BOUNDARY = "boundary"

    @property
    def is_rule4(self) -> bool:
        return self in (AcceptRule.C1C1X, AcceptRule.BOUNDARY)


class Side(Enum):
    """Box sides in counterclockwise order starting at the bottom."""

    SOUTH = (0, -1)
    EAST = (1, 0)
    NORTH = (0, 1)
    WEST = (-1, 0)

    @property
    def dx(self) -> int:
        return self.value[0]

    @property
    def dy(self) -> int:
        return self.value[1]

    @property
    def opposite(self) -> 'Side':
        return Side((-self.dx, -self.dy))


@dataclass(frozen=True)
class Region:
    """Square region [x0, x0+side] x [y0, y0+side] with integer corners."""

    x0: int
    y0: int
    side: int

    def __post_init__(self):
        if self.side <= 0:
            raise SubdivisionError(f"Region side must be positive, got {self.side}")

    @classmethod
    def from_rect(cls, rect: Rectangle) -> 'Region':
        x0, y0, x1, y1 = rect
        if x1 - x0 != y1 - y0:
            raise SubdivisionError(f"Region {list(rect)} is not a square")
        return cls(x0, y0, x1 - x0)

    @property
    def rect(self) -> Rectangle:
        return (self.x0, self.y0, self.x0 + self.side, self.y0 + self.side)

    def ibox(self) -> IBox:
        return IBox.from_bounds(*self.rect)

    def cell_side(self, depth: int) -> Dyadic:
        return Dyadic(self.side).shift(-depth)

    def to_list(self) -> List[int]:
        return list(self.rect)


@dataclass(frozen=True)
class BoxNode:
    """
    Quadtree box at grid address (depth, ix, iy).

    Equality and hashing use the address only; the acceptance rule rides along.
    """

    depth: int
    ix: int
    iy: int
    accept_rule: Optional[AcceptRule] = field(default=None, compare=False)

    def __post_init__(self):
        n = 1 << self.depth
        if self.depth < 0 or not (0 <= self.ix < n and 0 <= self.iy < n):
            raise SubdivisionError(f"Invalid box address ({self.depth}, {self.ix}, {self.iy})")

    @property
    def address(self) -> Address:
        return (self.depth, self.ix, self.iy)

    def with_rule(self, rule: Optional[AcceptRule]) -> 'BoxNode':
        return replace(self, accept_rule=rule)

    def children(self) -> List['BoxNode']:
        """SW, SE, NW, NE children at depth + 1."""
        d, x, y = self.depth + 1, 2 * self.ix, 2 * self.iy
        return [BoxNode(d, x, y), BoxNode(d, x + 1, y), BoxNode(d, x, y + 1), BoxNode(d, x + 1, y + 1)]

    def parent(self) -> Optional['BoxNode']:
        if self.depth == 0:
            return None
        return BoxNode(self.depth - 1, self.ix >> 1, self.iy >> 1)

    def is_ancestor_of(self, other: 'BoxNode') -> bool:
        shift = other.depth - self.depth
        return shift > 0 and (other.ix >> shift, other.iy >> shift) == (self.ix, self.iy)

    def ibox(self, region: Region) -> IBox:
        w = region.cell_side(self.depth)
        x0 = region.x0 + w * self.ix
        y0 = region.y0 + w * self.iy
        return IBox(Interval(x0, x0 + w), Interval(y0, y0 + w))

    def touches_boundary(self) -> bool:
        last = (1 << self.depth) - 1
        return self.ix in (0, last) or self.iy in (0, last)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'depth': self.depth,
            'ix': self.ix,
            'iy': self.iy,
            'rule': self.accept_rule.value if self.accept_rule else None
        }

    def __repr__(self) -> str:
        rule = f", {self.accept_rule.value}" if self.accept_rule else ""
        return f"BoxNode({self.depth}, {self.ix}, {self.iy}{rule})"


def children(box: BoxNode, max_depth: Optional[int] = None) -> List[BoxNode]:
    """
    The four depth + 1 boxes tiling box.

    Raises:
        MaxDepthExceeded: If the children would be deeper than max_depth
    """
    if max_depth is not None and box.depth + 1 > max_depth:
        error_msg = f"Depth cap {max_depth} exceeded while splitting {box}"
        logger.error(error_msg)
        raise MaxDepthExceeded(error_msg, box=box, details={'max_depth': max_depth})
    return box.children()


class Partition:
    """
    Set of quadtree leaves tiling a region.

    Leaves are kept in a dict keyed by address; neighbor lookups walk up the
    address hierarchy for coarser neighbors and down it for finer ones.
    """

    def __init__(self, region: Region, leaves: Optional[Iterable[BoxNode]] = None):
        self.region = region
        self._leaves: Dict[Address, BoxNode] = {}
        self._max_depth = 0
        for box in leaves or ():
            self._leaves[box.address] = box
            self._max_depth = max(self._max_depth, box.depth)

    @classmethod
    def root(cls, region: Region) -> 'Partition':
        return cls(region, [BoxNode(0, 0, 0)])

    @classmethod
    def uniform(cls, region: Region, depth: int) -> 'Partition':
        n = 1 << depth
        return cls(region, [BoxNode(depth, ix, iy) for iy in range(n) for ix in range(n)])

    def copy(self) -> 'Partition':
        return Partition(self.region, self._leaves.values())

    @property
    def leaves(self) -> List[BoxNode]:
        return [self._leaves[a] for a in sorted(self._leaves)]

    def __len__(self) -> int:
        return len(self._leaves)

    def __iter__(self) -> Iterator[BoxNode]:
        return iter(self.leaves)

    def __contains__(self, box: BoxNode) -> bool:
        return box.address in self._leaves

    def get(self, address: Address) -> Optional[BoxNode]:
        return self._leaves.get(address)

    @property
    def max_depth_used(self) -> int:
        return self._max_depth

    # ------------------------------------------------------------------
    # Mutation
    # ------------------------------------------------------------------

    def split(self, box: BoxNode, rule: Optional[AcceptRule] = None) -> List[BoxNode]:
        """Replace a leaf by its four children, optionally tagged with rule."""
        if box.address not in self._leaves:
            raise SubdivisionError(f"{box} is not a leaf", box=box)
        del self._leaves[box.address]
        kids = [kid.with_rule(rule) for kid in box.children()]
        for kid in kids:
            self._leaves[kid.address] = kid
        self._max_depth = max(self._max_depth, box.depth + 1)
        return kids

    def set_rule(self, box: BoxNode, rule: Optional[AcceptRule]) -> BoxNode:
        updated = box.with_rule(rule)
        self._leaves[box.address] = updated
        return updated

    # ------------------------------------------------------------------
    # Adjacency
    # ------------------------------------------------------------------

    def _covering_leaf(self, depth: int, ix: int, iy: int) -> Optional[BoxNode]:
        for d in range(depth, -1, -1):
            shift = depth - d
            leaf = self._leaves.get((d, ix >> shift, iy >> shift))
            if leaf is not None:
                return leaf
        return None

    def _facing_leaves(self, depth: int, ix: int, iy: int, side: Side) -> List[BoxNode]:
        leaf = self._leaves.get((depth, ix, iy))
        if leaf is not None:
            return [leaf]
        if depth >= self._max_depth:
            return []
        x, y = 2 * ix, 2 * iy
        if side is Side.EAST:
            cells = [(x, y), (x, y + 1)]
        elif side is Side.WEST:
            cells = [(x + 1, y), (x + 1, y + 1)]
        elif side is Side.NORTH:
            cells = [(x, y), (x + 1, y)]
        else:
            cells = [(x, y + 1), (x + 1, y + 1)]
        found: List[BoxNode] = []
        for cx, cy in cells:
            found.extend(self._facing_leaves(depth + 1, cx, cy, side))
        return found

    def side_neighbors(self, box: BoxNode, side: Side) -> List[BoxNode]:
        """
        Leaves sharing a positive-length piece of box's side.

        Finer neighbors are returned in increasing order along the side.
        """
        nx, ny = box.ix + side.dx, box.iy + side.dy
        n = 1 << box.depth
        if not (0 <= nx < n and 0 <= ny < n):
            return []
        coarser = self._covering_leaf(box.depth, nx, ny)
        if coarser is not None:
            return [coarser]
        return self._facing_leaves(box.depth, nx, ny, side)

    def edge_neighbors(self, box: BoxNode) -> List[BoxNode]:
        found: List[BoxNode] = []
        for side in Side:
            found.extend(self.side_neighbors(box, side))
        return found

    # ------------------------------------------------------------------
    # Checks and reporting
    # ------------------------------------------------------------------

    def check_tiling(self) -> bool:
        """Leaves are interior-disjoint and cover the region."""
        depth = self._max_depth
        area = sum(1 << (2 * (depth - b.depth)) for b in self._leaves.values())
        if area != 1 << (2 * depth):
            return False
        for box in self._leaves.values():
            parent = box.parent()
            while parent is not None:
                if parent.address in self._leaves:
                    return False
                parent = parent.parent()
        return True

    def balance_violations(self) -> List[Tuple[BoxNode, BoxNode]]:
        violations = []
        for box in self.leaves:
            for other in self.edge_neighbors(box):
                if other.depth > box.depth + 1:
                    violations.append((box, other))
        return violations

    def check_balance(self) -> bool:
        return not self.balance_violations()

    def rule_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {rule.value: 0 for rule in AcceptRule}
        for box in self._leaves.values():
            if box.accept_rule is not None:
                counts[box.accept_rule.value] += 1
        return counts

    def statistics(self) -> Dict[str, Any]:
        return {
            'leaves': len(self._leaves),
            'max_depth_used': self._max_depth,
            'rule_counts': self.rule_counts()
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            'region': self.region.to_list(),
            'boxes': [box.to_dict() for box in self.leaves]
        }

    def __repr__(self) -> str:
        return f"Partition(region={self.region.to_list()}, leaves={len(self._leaves)})"


@dataclass(frozen=True)
class Neighborhood:
    """N_i(B): the center box grown i times across positive-length sides."""

    center: BoxNode
    members: FrozenSet[BoxNode]
    hull: IBox

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, box: BoxNode) -> bool:
        return box in self.members


def neighborhood(partition: Partition, box: BoxNode, i: int) -> Neighborhood:
    """
    N_i(box) in partition.

    Each stage adds the leaves that share a positive-length side piece with some
    member of the previous stage; corner-only contact never qualifies.

    Args:
        partition: Partition containing box as a leaf
        box: Center leaf
        i: Number of growth stages (N_0 is the box itself)

    Returns:
        Neighborhood with its members and bounding rectangle
    """
    if box not in partition:
        raise SubdivisionError(f"{box} is not a leaf of the partition", box=box)
    members = {partition.get(box.address)}
    frontier = set(members)
    for _ in range(i):
        grown = set()
        for member in frontier:
            for other in partition.edge_neighbors(member):
                if other not in members:
                    grown.add(other)
        members |= grown
        frontier = grown
        if not frontier:
            break
    return Neighborhood(box, frozenset(members), members_hull(partition.region, members))


def members_hull(region: Region, boxes: Iterable[BoxNode]) -> IBox:
    x0 = y0 = x1 = y1 = None
    for box in boxes:
        b = box.ibox(region)
        x0 = b.x.lo if x0 is None else min(x0, b.x.lo)
        y0 = b.y.lo if y0 is None else min(y0, b.y.lo)
        x1 = b.x.hi if x1 is None else max(x1, b.x.hi)
        y1 = b.y.hi if y1 is None else max(y1, b.y.hi)
    return IBox.from_bounds(x0, y0, x1, y1)


# ============================================================================
# Acceptance
# ============================================================================

def accept_rule(pair: CurvePair, partition: Partition, box: BoxNode) -> Optional[AcceptRule]:
    """
    First acceptance rule that box satisfies in the current partition, or None.

    The fourth rule evaluates C1x on hull(N2(box)) taken from partition as it is
    at call time.
    """
    region = partition.region
    ibox = box.ibox(region)
    c0f = c0(pair.f, ibox).value
    c0g = c0(pair.g, ibox).value
    if c0f and c0g:
        return AcceptRule.C0C0
    c1g = c1(pair.g, ibox, pair.gradient_g).value
    if c0f and c1g:
        return AcceptRule.C0C1
    c1f = c1(pair.f, ibox, pair.gradient_f).value
    if c1f and c0g:
        return AcceptRule.C1C0
    if c1f and c1g:
        hull = neighborhood(partition, box, 2).hull
        if c1_cross(pair, hull).value:
            return AcceptRule.BOUNDARY if box.touches_boundary() else AcceptRule.C1C1X
    return None


def _run_queue(
    partition: Partition,
    pair: CurvePair,
    queue: Deque[BoxNode],
    max_depth: int,
    min_depth: int = 0
) -> int:
    """FIFO accept/split loop; returns the number of boxes examined."""
    examined = 0
    while queue:
        box = queue.popleft()
        examined += 1
        if box.depth >= min_depth:
            rule = accept_rule(pair, partition, box)
            if rule is not None:
                partition.set_rule(box, rule)
                logger.debug(f"Accepted {box} by {rule.value}")
                continue
        children(box, max_depth)
        queue.extend(partition.split(box))
    return examined


def subdivide(
    pair: CurvePair,
    region: Region,
    max_depth: int = DEFAULT_MAX_DEPTH,
    min_depth: int = 0
) -> Partition:
    """
    Breadth-first subdivision of region until every leaf is accepted.

    Args:
        pair: Curves with cached partials
        region: Square region with integer corners
        max_depth: Depth cap; reaching it is an error
        min_depth: Boxes shallower than this are split without testing

    Returns:
        Partition whose leaves all carry an acceptance rule

    Raises:
        MaxDepthExceeded: If a box fails every rule at the depth cap
    """
    logger.info(f"Subdividing region {region.to_list()} (max_depth={max_depth}, min_depth={min_depth})")
    partition = Partition.root(region)
    examined = _run_queue(partition, pair, deque(partition.leaves), max_depth, min_depth)
    logger.info(
        f"Subdivision finished: {len(partition)} leaves, depth {partition.max_depth_used}, "
        f"{examined} boxes examined"
    )
    return partition


def _reverify(pair: CurvePair, region: Region, box: BoxNode, rule: AcceptRule) -> AcceptRule:
    ibox = box.ibox(region)
    if rule is AcceptRule.C0C0:
        ok = c0(pair.f, ibox).value and c0(pair.g, ibox).value
    elif rule is AcceptRule.C0C1:
        ok = c0(pair.f, ibox).value and c1(pair.g, ibox, pair.gradient_g).value
    elif rule is AcceptRule.C1C0:
        ok = c1(pair.f, ibox, pair.gradient_f).value and c0(pair.g, ibox).value
    else:
        ok = c1(pair.f, ibox, pair.gradient_f).value and c1(pair.g, ibox, pair.gradient_g).value
        rule = AcceptRule.BOUNDARY if box.touches_boundary() else AcceptRule.C1C1X
    if not ok:
        error_msg = f"Child {box} fails inherited rule {rule.value}"
        logger.error(error_msg)
        raise AcceptanceInvariantError(error_msg, box=box)
    return rule


def balance(partition: Partition, pair: Optional[CurvePair] = None) -> Partition:
    """
    2:1-balance a partition.

    Leaves with an edge neighbor more than one level deeper are split. Children
    inherit the parent's rule; when pair is given the inherited rule is checked
    again on each child.

    Returns:
        A balanced copy of partition
    """
    result = partition.copy()
    stack: List[BoxNode] = result.leaves
    splits = 0
    while stack:
        box = stack.pop()
        current = result.get(box.address)
        if current is None:
            continue
        if not any(other.depth > current.depth + 1 for other in result.edge_neighbors(current)):
            continue
        kids = result.split(current, current.accept_rule)
        splits += 1
        if pair is not None and current.accept_rule is not None:
            kids = [
                result.set_rule(kid, _reverify(pair, result.region, kid, current.accept_rule))
                for kid in kids
            ]
        stack.extend(kids)
        for kid in kids:
            stack.extend(other for other in result.edge_neighbors(kid) if other.depth < kid.depth)
    if splits:
        logger.info(f"Balancing split {splits} boxes; {len(result)} leaves")
    return result


def _rule4_failures(partition: Partition, pair: CurvePair) -> List[BoxNode]:
    failing = []
    for box in partition.leaves:
        if box.accept_rule is not None and box.accept_rule.is_rule4:
            if not c1_cross(pair, neighborhood(partition, box, 2).hull).value:
                failing.append(box)
    return failing


def verify_rule4(
    partition: Partition,
    pair: CurvePair,
    max_depth: int = DEFAULT_MAX_DEPTH,
    iteration_cap: int = DEFAULT_ITERATION_CAP
) -> Partition:
    """
    Re-check rule 4 against neighborhoods of the final partition.

    Failing leaves are split and re-run through acceptance, then the partition
    is re-balanced; this repeats until every rule-4 leaf passes.

    Raises:
        MaxDepthExceeded: If refinement hits the depth cap
        IterationCapExceeded: If no fixpoint is reached within iteration_cap rounds
    """
    result = partition
    for round_index in range(iteration_cap + 1):
        failing = _rule4_failures(result, pair)
        if not failing:
            if round_index:
                logger.info(f"Rule-4 verification reached a fixpoint after {round_index} rounds")
            return result
        if round_index == iteration_cap:
            break
        logger.info(f"Rule-4 verification round {round_index + 1}: refining {len(failing)} boxes")
        result = result.copy()
        queue: Deque[BoxNode] = deque()
        for box in failing:
            children(box, max_depth)
            queue.extend(result.split(box))
        _run_queue(result, pair, queue, max_depth)
        result = balance(result, pair)
    error_msg = f"Rule-4 verification did not converge within {iteration_cap} rounds"
    logger.error(error_msg)
    raise IterationCapExceeded(error_msg, box=failing[0], details={'iteration_cap': iteration_cap})


def refine_box(
    partition: Partition,
    pair: CurvePair,
    box: BoxNode,
    max_depth: int = DEFAULT_MAX_DEPTH,
    iteration_cap: int = DEFAULT_ITERATION_CAP
) -> Partition:
    """Split one accepted leaf, re-accept its children, re-balance and re-verify."""
    result = partition.copy()
    children(box, max_depth)
    queue: Deque[BoxNode] = deque(result.split(box))
    _run_queue(result, pair, queue, max_depth)
    result = balance(result, pair)
    return verify_rule4(result, pair, max_depth, iteration_cap)
