"""
Intersection Oracle Module

Independent ground truth for the pipeline: certifies every common zero of f and
g in a region with the Krawczyk operator

    K(X) = m - Y F(m) + (I - Y J(X)) (X - m)

where m is the midpoint of X, J(X) the interval Jacobian and Y a dyadic
approximation of the inverse midpoint Jacobian. K(X) inside the interior of X
proves a unique root in X; K(X) disjoint from X proves there is none.

The same machinery applied to the gradient system (px, py) checks that each
curve is smooth, and C1x on every certified root box checks transversality.

Example Usage:
    pair = CurvePair.parse("x^2 + y^2 - 4", "(x-2)^2 + y^2 - 4")
    roots = certify_intersections(pair, (-4, -4, 4, 4), grid_depth=6)
    for root in roots:
        print(root.box, root.midpoint)

    print(check_smooth_transversal(pair, (-4, -4, 4, 4), grid_depth=6))
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

from curvepair.arith import Dyadic, IBox, Interval, Point, ZERO, interval_add
from curvepair.errors import CurvePairError
from curvepair.poly import BivariatePolynomial, CurvePair, Rectangle, eval_exact, eval_interval, partial_derivative
from curvepair.predicates import c0, c1_cross


logger = logging.getLogger(__name__)


DEFAULT_GRID_DEPTH = 6
DEFAULT_SPLIT_CAP = 12
CONTRACTION_ROUNDS = 8
ROUNDING_BITS = 48
INVERSE_BITS = 60


class OracleError(CurvePairError):
    """Base exception for oracle errors."""

    stage = "oracle"


class Inconclusive(OracleError):
    """The oracle could not decide some cells."""

    def __init__(self, message: str, cells: List[IBox]):
        super().__init__(message, details={'cells': [cell.to_list() for cell in cells]})
        self.cells = cells


@dataclass(frozen=True)
class CertifiedRoot:
    """Box proven to contain exactly one common zero of f and g."""

    box: IBox
    midpoint: Point

    def to_dict(self) -> Dict[str, Any]:
        return {
            'box': self.box.to_list(),
            'box_exact': [str(v) for v in self.box.bounds()],
            'midpoint': [float(self.midpoint[0]), float(self.midpoint[1])]
        }


@dataclass(frozen=True)
class _System:
    """Square polynomial system F = (F0, F1) with its Jacobian."""

    functions: Tuple[BivariatePolynomial, BivariatePolynomial]
    jacobian: Tuple[Tuple[BivariatePolynomial, BivariatePolynomial], Tuple[BivariatePolynomial, BivariatePolynomial]]

    @classmethod
    def intersection(cls, pair: CurvePair) -> '_System':
        return cls((pair.f, pair.g), ((pair.fx, pair.fy), (pair.gx, pair.gy)))

    @classmethod
    def critical_points(cls, px: BivariatePolynomial, py: BivariatePolynomial) -> '_System':
        return cls(
            (px, py),
            (
                (partial_derivative(px, 'x'), partial_derivative(px, 'y')),
                (partial_derivative(py, 'x'), partial_derivative(py, 'y'))
            )
        )


def _round_entry(value: Fraction, bits: int = INVERSE_BITS) -> Dyadic:
    """Dyadic with about `bits` significant bits, rounded toward minus infinity."""
    if value == 0:
        return ZERO
    magnitude = value.numerator.bit_length() - value.denominator.bit_length()
    shift = bits - magnitude
    if shift >= 0:
        mantissa = (value.numerator << shift) // value.denominator
    else:
        mantissa = value.numerator // (value.denominator << -shift)
    return Dyadic(mantissa, -shift)


def _approximate_inverse(matrix: List[List[Dyadic]]) -> Optional[List[List[Dyadic]]]:
    (a, b), (c, d) = matrix
    det = a * d - b * c
    if not det:
        return None
    det = det.to_fraction()
    exact = [
        [d.to_fraction() / det, -b.to_fraction() / det],
        [-c.to_fraction() / det, a.to_fraction() / det]
    ]
    return [[_round_entry(entry) for entry in row] for row in exact]


def krawczyk(system: _System, X: IBox) -> Tuple[str, Optional[IBox]]:
    """
    Apply the Krawczyk test on X.

    Returns:
        ('unique', K) if K lies in the interior of X, ('empty', K) if K misses X,
        ('undecided', K) otherwise, ('singular', None) if the midpoint Jacobian
        is exactly singular
    """
    m = X.midpoint
    Fm = [eval_exact(F, m) for F in system.functions]
    Jm = [[eval_exact(entry, m) for entry in row] for row in system.jacobian]
    Y = _approximate_inverse(Jm)
    if Y is None:
        return 'singular', None

    JX = [[eval_interval(entry, X) for entry in row] for row in system.jacobian]
    offsets = (X.x - Interval.point(m[0]), X.y - Interval.point(m[1]))

    components: List[Interval] = []
    for i in range(2):
        center = m[i] - (Y[i][0] * Fm[0] + Y[i][1] * Fm[1])
        total = Interval.point(center)
        for j in range(2):
            product = interval_add(JX[0][j].scale(Y[i][0]), JX[1][j].scale(Y[i][1]))
            identity = Interval.point(1 if i == j else 0)
            total = total + (identity - product) * offsets[j]
        components.append(total)

    K = IBox(components[0], components[1])
    if K.interior_subset_of(X):
        return 'unique', K
    if K.intersect(X) is None:
        return 'empty', K
    return 'undecided', K


def _contract(system: _System, X: IBox, rounds: int = CONTRACTION_ROUNDS) -> IBox:
    """Shrink a certified box by iterating X <- round_out(K(X) & X) & X."""
    for _ in range(rounds):
        status, K = krawczyk(system, X)
        if status != 'unique':
            break
        shrunk = K.round_out(ROUNDING_BITS).intersect(X)
        if shrunk is None or shrunk == X:
            break
        X = shrunk
    return X


def _as_box(region: Union[IBox, Rectangle]) -> IBox:
    if isinstance(region, IBox):
        return region
    return IBox.from_bounds(*region)


def _grid(region: IBox, depth: int) -> List[IBox]:
    n = 1 << depth
    wx = region.width.shift(-depth)
    wy = region.height.shift(-depth)
    cells = []
    for iy in range(n):
        for ix in range(n):
            x0 = region.x.lo + wx * ix
            y0 = region.y.lo + wy * iy
            cells.append(IBox.from_bounds(x0, y0, x0 + wx, y0 + wy))
    return cells


def _inflated(cell: IBox) -> IBox:
    return IBox(cell.x.inflate(cell.width.shift(-2)), cell.y.inflate(cell.height.shift(-2)))


def _merge(system: _System, boxes: List[IBox]) -> List[IBox]:
    """Merge boxes that certify the same root; fail if overlap cannot be explained."""
    kept: List[IBox] = []
    for box in boxes:
        for index, other in enumerate(kept):
            overlap = box.intersect(other)
            if overlap is None:
                continue
            if box.subset_of(other) or other.subset_of(box):
                kept[index] = box if box.subset_of(other) else other
                break
            hull = box.hull(other)
            status, _ = krawczyk(system, hull.inflate(Dyadic(1, -ROUNDING_BITS)))
            if status != 'unique':
                raise Inconclusive(f"Overlapping root boxes {box} and {other} could not be merged", [hull])
            kept[index] = overlap
            break
        else:
            kept.append(box)
    return kept


def certify_intersections(
    pair: CurvePair,
    region: Union[IBox, Rectangle],
    grid_depth: int = DEFAULT_GRID_DEPTH,
    split_cap: int = DEFAULT_SPLIT_CAP
) -> List[CertifiedRoot]:
    """
    Certify every common zero of f and g inside region.

    Args:
        pair: Curves with cached partials
        region: Rectangle to search
        grid_depth: The region is cut into 2^grid_depth x 2^grid_depth cells
        split_cap: Maximum number of recursive splits below a grid cell

    Returns:
        Pairwise disjoint certified root boxes inside region, in a deterministic order

    Raises:
        Inconclusive: If some cell is still undecided at the split cap
    """
    if grid_depth < 1:
        raise OracleError(f"grid_depth must be at least 1, got {grid_depth}")
    region_box = _as_box(region)
    system = _System.intersection(pair)
    logger.info(f"Certifying intersections of {pair.f} and {pair.g} on {region_box.to_list()}")

    certified: List[IBox] = []
    undecided: List[IBox] = []
    for grid_cell in _grid(region_box, grid_depth):
        stack = [(grid_cell, 0)]
        while stack:
            cell, level = stack.pop()
            if c0(pair.f, cell).value or c0(pair.g, cell).value:
                continue
            status, _ = krawczyk(system, _inflated(cell))
            if status == 'unique':
                certified.append(_contract(system, _inflated(cell)))
                continue
            if status == 'empty':
                continue
            if level >= split_cap:
                undecided.append(cell)
                continue
            stack.extend((child, level + 1) for child in reversed(cell.split()))

    if undecided:
        error_msg = f"Oracle left {len(undecided)} cells undecided at split cap {split_cap}"
        logger.error(error_msg)
        raise Inconclusive(error_msg, undecided)

    roots: List[CertifiedRoot] = []
    for box in _merge(system, certified):
        if box.intersect(region_box) is None:
            continue
        if not box.interior_subset_of(region_box):
            raise Inconclusive(f"Root box {box} meets the region boundary", [box])
        roots.append(CertifiedRoot(box, box.midpoint))
    roots.sort(key=lambda r: r.box.bounds())
    logger.info(f"Oracle certified {len(roots)} intersections")
    return roots


def _has_singular_point(
    p: BivariatePolynomial,
    px: BivariatePolynomial,
    py: BivariatePolynomial,
    region: IBox,
    grid_depth: int,
    split_cap: int
) -> bool:
    system = _System.critical_points(px, py)
    undecided: List[IBox] = []
    for grid_cell in _grid(region, grid_depth):
        stack = [(grid_cell, 0)]
        while stack:
            cell, level = stack.pop()
            if c0(p, cell).value or c0(px, cell).value or c0(py, cell).value:
                continue
            status, _ = krawczyk(system, _inflated(cell))
            if status == 'empty':
                continue
            if status == 'unique':
                box = _contract(system, _inflated(cell))
                if c0(p, box).value:
                    continue
                m = box.midpoint
                if not eval_exact(p, m) and not eval_exact(px, m) and not eval_exact(py, m):
                    logger.info(f"Singular point of {p} at ({m[0].to_fraction()}, {m[1].to_fraction()})")
                    return True
            if level >= split_cap:
                undecided.append(cell)
                continue
            stack.extend((child, level + 1) for child in reversed(cell.split()))
    if undecided:
        error_msg = f"Smoothness of {p} undecided on {len(undecided)} cells"
        logger.error(error_msg)
        raise Inconclusive(error_msg, undecided)
    return False


def check_smooth_transversal(
    pair: CurvePair,
    region: Union[IBox, Rectangle],
    grid_depth: int = DEFAULT_GRID_DEPTH,
    split_cap: int = DEFAULT_SPLIT_CAP
) -> bool:
    """
    Certify the input hypotheses: both curves smooth in region, all
    intersections transversal.

    Returns:
        False if a singular point is certified or C1x fails on a root box

    Raises:
        Inconclusive: If the oracle cannot decide
    """
    region_box = _as_box(region)
    for p, (px, py) in ((pair.f, pair.gradient_f), (pair.g, pair.gradient_g)):
        if _has_singular_point(p, px, py, region_box, grid_depth, split_cap):
            return False
    for root in certify_intersections(pair, region_box, grid_depth, split_cap):
        if not c1_cross(pair, root.box).value:
            logger.info(f"Gradients not certified transversal on {root.box}")
            return False
    return True
