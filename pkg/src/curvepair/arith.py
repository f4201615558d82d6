"""
Exact Arithmetic Module

Dyadic rationals (m * 2^e with an arbitrary-precision mantissa) and closed
intervals with dyadic endpoints. Every box corner, vertex coordinate and interval
endpoint in curvepair is a Dyadic, so sums, differences and products are exact and
interval arithmetic never has to widen its results.

Example Usage:
    a = Dyadic(3, -1)                 # 3/2
    b = Dyadic.parse("5*2^-2")        # 5/4
    print(a + b, float(a * b))

    I = Interval(-1, 2)
    J = Interval(3, 4)
    print(interval_mul(I, J))         # [-4, 8]
    print(contains_zero(I - J))

    box = IBox.from_bounds(0, 0, 1, 1)
    print(box.width, box.midpoint)
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, List, Optional, Tuple, Union

from curvepair.errors import CurvePairError


logger = logging.getLogger(__name__)


class ArithError(CurvePairError):
    """Base exception for arithmetic errors."""

    stage = "arith"


class InvalidIntervalError(ArithError):
    """Raised when an interval would have lo > hi."""
    pass


class NonDyadicError(ArithError):
    """Raised when a rational cannot be represented as m * 2^e."""
    pass


_DYADIC_TEXT = re.compile(r'^\s*(-?\d+)(?:\s*\*\s*2\^\(?(-?\d+)\)?)?\s*$')


@total_ordering
class Dyadic:
    """
    Exact dyadic rational mantissa * 2^exponent.

    The representation is canonical: the mantissa is odd, or zero with exponent 0,
    so equal values have equal fields.
    """

    __slots__ = ('_mantissa', '_exponent')

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        if isinstance(mantissa, bool) or not isinstance(mantissa, int):
            raise TypeError(f"Dyadic mantissa must be an int, got {type(mantissa).__name__}")
        if mantissa == 0:
            exponent = 0
        else:
            shift = (mantissa & -mantissa).bit_length() - 1
            if shift:
                mantissa >>= shift
                exponent += shift
        self._mantissa = mantissa
        self._exponent = exponent

    @property
    def mantissa(self) -> int:
        return self._mantissa

    @property
    def exponent(self) -> int:
        return self._exponent

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def from_int(cls, value: int) -> 'Dyadic':
        return cls(int(value), 0)

    @classmethod
    def from_fraction(cls, value: Union[Fraction, int]) -> 'Dyadic':
        """
        Convert an exact rational to a Dyadic.

        Raises:
            NonDyadicError: If the reduced denominator is not a power of two
        """
        value = Fraction(value)
        den = value.denominator
        if den & (den - 1):
            error_msg = f"{value} is not a dyadic rational"
            logger.error(error_msg)
            raise NonDyadicError(error_msg)
        return cls(value.numerator, -(den.bit_length() - 1))

    @classmethod
    def coerce(cls, value: Union['Dyadic', int, Fraction]) -> 'Dyadic':
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, int):
            return cls(value)
        if isinstance(value, Fraction):
            return cls.from_fraction(value)
        raise TypeError(f"Cannot convert {type(value).__name__} to Dyadic")

    @classmethod
    def parse(cls, text: str) -> 'Dyadic':
        """Parse the exact text form "m*2^e" (a bare integer is accepted too)."""
        match = _DYADIC_TEXT.match(text)
        if not match:
            raise ValueError(f"Not a dyadic literal: {text!r}")
        mantissa = int(match.group(1))
        exponent = int(match.group(2)) if match.group(2) is not None else 0
        return cls(mantissa, exponent)

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def __add__(self, other):
        other = _as_dyadic(other)
        if other is None:
            return NotImplemented
        if self._mantissa == 0:
            return other
        if other._mantissa == 0:
            return self
        e = min(self._exponent, other._exponent)
        m = (self._mantissa << (self._exponent - e)) + (other._mantissa << (other._exponent - e))
        return Dyadic(m, e)

    __radd__ = __add__

    def __neg__(self) -> 'Dyadic':
        return Dyadic(-self._mantissa, self._exponent)

    def __sub__(self, other):
        other = _as_dyadic(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _as_dyadic(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _as_dyadic(other)
        if other is None:
            return NotImplemented
        return Dyadic(self._mantissa * other._mantissa, self._exponent + other._exponent)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> 'Dyadic':
        if n < 0:
            raise ValueError("Dyadic powers must be nonnegative")
        return Dyadic(self._mantissa ** n, self._exponent * n)

    def __abs__(self) -> 'Dyadic':
        return self if self._mantissa >= 0 else -self

    def shift(self, k: int) -> 'Dyadic':
        """Multiply by 2^k exactly."""
        if self._mantissa == 0:
            return self
        return Dyadic(self._mantissa, self._exponent + k)

    def half(self) -> 'Dyadic':
        return self.shift(-1)

    def sign(self) -> int:
        return (self._mantissa > 0) - (self._mantissa < 0)

    # ------------------------------------------------------------------
    # Rounding (used only by the oracle, always outward)
    # ------------------------------------------------------------------

    def floor_to(self, bits: int) -> 'Dyadic':
        """Largest multiple of 2^-bits that is <= self."""
        if self._exponent >= -bits:
            return self
        return Dyadic(self._mantissa >> (-bits - self._exponent), -bits)

    def ceil_to(self, bits: int) -> 'Dyadic':
        """Smallest multiple of 2^-bits that is >= self."""
        return -((-self).floor_to(bits))

    # ------------------------------------------------------------------
    # Comparison and conversion
    # ------------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, Fraction):
            return self.to_fraction() == other
        other = _as_dyadic(other)
        if other is None:
            return NotImplemented
        return self._mantissa == other._mantissa and self._exponent == other._exponent

    def __lt__(self, other) -> bool:
        if isinstance(other, Fraction):
            return self.to_fraction() < other
        other = _as_dyadic(other)
        if other is None:
            return NotImplemented
        return (self - other)._mantissa < 0

    def __hash__(self) -> int:
        if self._exponent >= 0:
            return hash(self._mantissa << self._exponent)
        return hash(Fraction(self._mantissa, 1 << -self._exponent))

    def __bool__(self) -> bool:
        return self._mantissa != 0

    def to_fraction(self) -> Fraction:
        if self._exponent >= 0:
            return Fraction(self._mantissa << self._exponent)
        return Fraction(self._mantissa, 1 << -self._exponent)

    def __float__(self) -> float:
        return float(self.to_fraction())

    def __str__(self) -> str:
        return f"{self._mantissa}*2^{self._exponent}"

    def __repr__(self) -> str:
        return f"Dyadic({self._mantissa}, {self._exponent})"


def _as_dyadic(value) -> Optional[Dyadic]:
    if isinstance(value, Dyadic):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Dyadic(value)
    return None


ZERO = Dyadic(0)
ONE = Dyadic(1)

Number = Union[Dyadic, int]
Point = Tuple[Dyadic, Dyadic]


def dyadic_point(x: Number, y: Number) -> Point:
    return (Dyadic.coerce(x), Dyadic.coerce(y))


# ============================================================================
# Intervals
# ============================================================================

class Interval:
    """Closed interval [lo, hi] with dyadic endpoints."""

    __slots__ = ('lo', 'hi')

    def __init__(self, lo: Number, hi: Optional[Number] = None):
        lo = Dyadic.coerce(lo)
        hi = lo if hi is None else Dyadic.coerce(hi)
        if hi < lo:
            error_msg = f"Invalid interval: lo={lo} > hi={hi}"
            logger.error(error_msg)
            raise InvalidIntervalError(error_msg)
        self.lo = lo
        self.hi = hi

    @classmethod
    def point(cls, value: Number) -> 'Interval':
        return cls(value, value)

    def width(self) -> Dyadic:
        return self.hi - self.lo

    def midpoint(self) -> Dyadic:
        return (self.lo + self.hi).half()

    def magnitude(self) -> Dyadic:
        return max(abs(self.lo), abs(self.hi))

    def contains(self, value: Number) -> bool:
        return self.lo <= value <= self.hi

    def subset_of(self, other: 'Interval') -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def interior_subset_of(self, other: 'Interval') -> bool:
        return other.lo < self.lo and self.hi < other.hi

    def intersect(self, other: 'Interval') -> Optional['Interval']:
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if hi < lo:
            return None
        return Interval(lo, hi)

    def hull(self, other: 'Interval') -> 'Interval':
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def scale(self, factor: Number) -> 'Interval':
        factor = Dyadic.coerce(factor)
        a, b = self.lo * factor, self.hi * factor
        return Interval(min(a, b), max(a, b))

    def inflate(self, amount: Number) -> 'Interval':
        return Interval(self.lo - amount, self.hi + amount)

    def round_out(self, bits: int) -> 'Interval':
        """Outward rounding of both endpoints to multiples of 2^-bits."""
        return Interval(self.lo.floor_to(bits), self.hi.ceil_to(bits))

    def is_point(self) -> bool:
        return self.lo == self.hi

    def __add__(self, other: 'Interval') -> 'Interval':
        return interval_add(self, _as_interval(other))

    def __sub__(self, other: 'Interval') -> 'Interval':
        return interval_sub(self, _as_interval(other))

    def __mul__(self, other: 'Interval') -> 'Interval':
        return interval_mul(self, _as_interval(other))

    def __neg__(self) -> 'Interval':
        return interval_neg(self)

    def __pow__(self, n: int) -> 'Interval':
        return interval_pow(self, n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Interval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    def to_list(self) -> List[float]:
        return [float(self.lo), float(self.hi)]

    def __repr__(self) -> str:
        return f"Interval({self.lo}, {self.hi})"

    def __str__(self) -> str:
        return f"[{self.lo.to_fraction()}, {self.hi.to_fraction()}]"


def _as_interval(value) -> Interval:
    if isinstance(value, Interval):
        return value
    return Interval.point(value)


def interval_add(I: Interval, J: Interval) -> Interval:
    """[a,b] + [c,d] = [a+c, b+d]."""
    return Interval(I.lo + J.lo, I.hi + J.hi)


def interval_sub(I: Interval, J: Interval) -> Interval:
    """[a,b] - [c,d] = [a-d, b-c]."""
    return Interval(I.lo - J.hi, I.hi - J.lo)


def interval_mul(I: Interval, J: Interval) -> Interval:
    """[a,b] * [c,d] = [min(ac,ad,bc,bd), max(ac,ad,bc,bd)]."""
    products = (I.lo * J.lo, I.lo * J.hi, I.hi * J.lo, I.hi * J.hi)
    return Interval(min(products), max(products))


def interval_neg(I: Interval) -> Interval:
    return Interval(-I.hi, -I.lo)


def interval_pow(I: Interval, n: int) -> Interval:
    """
    I^n with even-power tightening.

    Odd powers are monotone; even powers of an interval straddling zero start
    at zero instead of at a negative endpoint product.
    """
    if n < 0:
        raise ValueError("Interval powers must be nonnegative")
    if n == 0:
        return Interval(ONE)
    if n == 1:
        return I
    if n % 2 == 1 or I.lo >= 0:
        return Interval(I.lo ** n, I.hi ** n)
    if I.hi <= 0:
        return Interval(I.hi ** n, I.lo ** n)
    return Interval(ZERO, I.magnitude() ** n)


def interval_hull(intervals: Iterable[Interval]) -> Interval:
    intervals = list(intervals)
    return Interval(min(i.lo for i in intervals), max(i.hi for i in intervals))


def contains_zero(I: Interval) -> bool:
    return I.lo <= 0 <= I.hi


# ============================================================================
# Boxes
# ============================================================================

@dataclass(frozen=True)
class IBox:
    """Axis-aligned rectangle x-interval times y-interval."""

    x: Interval
    y: Interval

    @classmethod
    def from_bounds(cls, x0: Number, y0: Number, x1: Number, y1: Number) -> 'IBox':
        return cls(Interval(x0, x1), Interval(y0, y1))

    @classmethod
    def from_point(cls, point: Point) -> 'IBox':
        return cls(Interval.point(point[0]), Interval.point(point[1]))

    @property
    def width(self) -> Dyadic:
        return self.x.width()

    @property
    def height(self) -> Dyadic:
        return self.y.width()

    @property
    def midpoint(self) -> Point:
        return (self.x.midpoint(), self.y.midpoint())

    def bounds(self) -> Tuple[Dyadic, Dyadic, Dyadic, Dyadic]:
        return (self.x.lo, self.y.lo, self.x.hi, self.y.hi)

    def corners(self) -> List[Point]:
        """Corners counterclockwise from the lower-left one."""
        return [
            (self.x.lo, self.y.lo),
            (self.x.hi, self.y.lo),
            (self.x.hi, self.y.hi),
            (self.x.lo, self.y.hi)
        ]

    def contains_point(self, point) -> bool:
        return self.x.lo <= point[0] <= self.x.hi and self.y.lo <= point[1] <= self.y.hi

    def subset_of(self, other: 'IBox') -> bool:
        return self.x.subset_of(other.x) and self.y.subset_of(other.y)

    def interior_subset_of(self, other: 'IBox') -> bool:
        return self.x.interior_subset_of(other.x) and self.y.interior_subset_of(other.y)

    def intersect(self, other: 'IBox') -> Optional['IBox']:
        x = self.x.intersect(other.x)
        y = self.y.intersect(other.y)
        if x is None or y is None:
            return None
        return IBox(x, y)

    def hull(self, other: 'IBox') -> 'IBox':
        return IBox(self.x.hull(other.x), self.y.hull(other.y))

    def inflate(self, amount: Number) -> 'IBox':
        return IBox(self.x.inflate(amount), self.y.inflate(amount))

    def round_out(self, bits: int) -> 'IBox':
        return IBox(self.x.round_out(bits), self.y.round_out(bits))

    def split(self) -> List['IBox']:
        """Four equal quarters, ordered SW, SE, NW, NE."""
        mx, my = self.midpoint
        xs = (Interval(self.x.lo, mx), Interval(mx, self.x.hi))
        ys = (Interval(self.y.lo, my), Interval(my, self.y.hi))
        return [IBox(xs[0], ys[0]), IBox(xs[1], ys[0]), IBox(xs[0], ys[1]), IBox(xs[1], ys[1])]

    def to_list(self) -> List[float]:
        return [float(self.x.lo), float(self.y.lo), float(self.x.hi), float(self.y.hi)]

    def __repr__(self) -> str:
        return f"IBox({self.x}, {self.y})"


def box_hull(boxes: Iterable[IBox]) -> IBox:
    boxes = list(boxes)
    return IBox(interval_hull(b.x for b in boxes), interval_hull(b.y for b in boxes))
