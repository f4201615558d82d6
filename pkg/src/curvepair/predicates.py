"""
Interval Predicates Module

The three box tests that drive acceptance during subdivision:

    c0        0 is not in the interval value of p over the box
    c1        no two points of the box have perpendicular gradients of p
    c1_cross  no two points of the rectangle have parallel gradients of f and g

c1 and c1_cross are two-point conditions: the two gradient factors range
independently over the box, so they are multiplied as independent intervals and
never squared.

Example Usage:
    f = parse_polynomial("x^2 + y^2 - 4")
    box = IBox.from_bounds(1, 1, 2, 2)
    print(c0(f, box))                  # PredicateResult(False, [-2, 4])
    print(c1(f, box))                  # PredicateResult(True, [8, 32])
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from curvepair.arith import IBox, Interval, contains_zero, interval_add, interval_mul, interval_sub
from curvepair.poly import BivariatePolynomial, CurvePair, eval_interval, partial_derivative


@dataclass(frozen=True)
class PredicateResult:
    """Outcome of a predicate together with the interval that decided it."""

    value: bool
    witness_interval: Interval

    def __post_init__(self):
        if self.value and contains_zero(self.witness_interval):
            raise ValueError(f"True predicate with witness {self.witness_interval} containing 0")

    def __bool__(self) -> bool:
        return self.value

    def to_dict(self) -> Dict[str, Any]:
        return {
            'value': self.value,
            'witness': self.witness_interval.to_list()
        }

    def __repr__(self) -> str:
        return f"PredicateResult({self.value}, {self.witness_interval})"


def _decide(witness: Interval) -> PredicateResult:
    return PredicateResult(not contains_zero(witness), witness)


def c0(p: BivariatePolynomial, box: IBox) -> PredicateResult:
    """True guarantees that V(p) does not meet box."""
    return _decide(eval_interval(p, box))


def c1(
    p: BivariatePolynomial,
    box: IBox,
    gradient: Optional[Tuple[BivariatePolynomial, BivariatePolynomial]] = None
) -> PredicateResult:
    """
    Two-point gradient test <grad p(B1), grad p(B2)> over two copies of box.

    Args:
        p: Polynomial
        box: Box
        gradient: Cached (px, py); differentiated on the fly when omitted

    Returns:
        PredicateResult; True guarantees no two points of box have
        perpendicular gradients of p
    """
    px, py = gradient if gradient is not None else (
        partial_derivative(p, 'x'), partial_derivative(p, 'y')
    )
    gx = eval_interval(px, box)
    gy = eval_interval(py, box)
    witness = interval_add(interval_mul(gx, gx), interval_mul(gy, gy))
    return _decide(witness)


def c1_cross(pair: CurvePair, rect: IBox) -> PredicateResult:
    """
    Two-point cross product test grad f(B1) x grad g(B2) over rect.

    rect may be any axis-aligned rectangle (neighborhood hulls are not square).
    True guarantees that no pair of points in rect has parallel grad f and grad g.
    """
    fx = eval_interval(pair.fx, rect)
    fy = eval_interval(pair.fy, rect)
    gx = eval_interval(pair.gx, rect)
    gy = eval_interval(pair.gy, rect)
    witness = interval_sub(interval_mul(fx, gy), interval_mul(fy, gx))
    return _decide(witness)
