"""
Bivariate Polynomial Module

Integer-coefficient polynomials in x and y: parsing from text, formal partial
derivatives, exact evaluation at dyadic points, interval evaluation over boxes and
the affine rescaling that turns a rectangular region into a square one.

Example Usage:
    f = parse_polynomial("x^2 + y^2 - 4")
    fx = partial_derivative(f, 'x')               # 2*x
    print(eval_exact(f, (Dyadic(1, -1), Dyadic(1, -1))))   # -7/2
    print(eval_interval(f, IBox.from_bounds(0, 0, 1, 1)))  # [-4, -2]

    pair = CurvePair.from_polynomials(f, parse_polynomial("(x-2)^2 + y^2 - 4"))
    print(pair.gx)

    square = choose_square((0, -4, 4, 4))
    q = rescale_to_square(f, (0, -4, 4, 4), square)
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

from curvepair.arith import Dyadic, IBox, Interval, Point, ZERO
from curvepair.errors import CurvePairError


logger = logging.getLogger(__name__)


Monomial = Tuple[int, int]
Rectangle = Tuple[int, int, int, int]


class PolynomialError(CurvePairError):
    """Base exception for polynomial errors."""

    stage = "parse"


class PolynomialParseError(PolynomialError):
    """Exception raised for syntax errors in polynomial text."""

    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(
            f"{message} at position {position}",
            details={'position': position, 'text': text}
        )
        self.position = position


class NonIntegerCoefficientError(PolynomialError):
    """Exception raised when the text contains a non-integer coefficient."""

    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(
            f"{message} at position {position}",
            details={'position': position, 'text': text}
        )
        self.position = position


class DegenerateRectangleError(PolynomialError):
    """Exception raised for rectangles with zero width or height."""

    stage = "rescale"


class BivariatePolynomial:
    """
    Polynomial in x and y with integer coefficients.

    Terms are stored sparsely as {(degree_x, degree_y): coefficient}; zero
    coefficients are never stored, so the zero polynomial has no terms.
    """

    __slots__ = ('_terms',)

    def __init__(self, terms: Optional[Dict[Monomial, int]] = None):
        clean: Dict[Monomial, int] = {}
        for (i, j), c in (terms or {}).items():
            if isinstance(c, bool) or not isinstance(c, int):
                raise TypeError(f"Coefficient of x^{i}*y^{j} must be an int, got {c!r}")
            if i < 0 or j < 0:
                raise ValueError(f"Negative exponent in monomial ({i}, {j})")
            if c:
                clean[(i, j)] = c
        self._terms = clean

    @classmethod
    def constant(cls, value: int) -> 'BivariatePolynomial':
        return cls({(0, 0): value})

    @classmethod
    def variable(cls, name: str) -> 'BivariatePolynomial':
        if name == 'x':
            return cls({(1, 0): 1})
        if name == 'y':
            return cls({(0, 1): 1})
        raise ValueError(f"Unknown variable: {name}")

    @property
    def terms(self) -> Dict[Monomial, int]:
        return dict(self._terms)

    def coefficient(self, i: int, j: int) -> int:
        return self._terms.get((i, j), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(m == (0, 0) for m in self._terms)

    def degree(self) -> int:
        """Total degree; the zero polynomial reports 0."""
        return max((i + j for i, j in self._terms), default=0)

    def degree_in(self, var: str) -> int:
        index = 0 if var == 'x' else 1
        return max((m[index] for m in self._terms), default=0)

    # ------------------------------------------------------------------
    # Ring operations
    # ------------------------------------------------------------------

    def __add__(self, other):
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, 0) + c
        return BivariatePolynomial(terms)

    __radd__ = __add__

    def __neg__(self) -> 'BivariatePolynomial':
        return BivariatePolynomial({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        terms: Dict[Monomial, int] = {}
        for (i1, j1), c1 in self._terms.items():
            for (i2, j2), c2 in other._terms.items():
                m = (i1 + i2, j1 + j2)
                terms[m] = terms.get(m, 0) + c1 * c2
        return BivariatePolynomial(terms)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> 'BivariatePolynomial':
        if n < 0:
            raise ValueError("Polynomial powers must be nonnegative")
        result = BivariatePolynomial.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    # ------------------------------------------------------------------
    # Printing
    # ------------------------------------------------------------------

    def to_text(self) -> str:
        """Canonical text form; parse_polynomial(p.to_text()) == p."""
        if not self._terms:
            return "0"
        parts: List[str] = []
        for (i, j) in sorted(self._terms, key=lambda m: (-(m[0] + m[1]), -m[0])):
            c = self._terms[(i, j)]
            factors = []
            if i:
                factors.append("x" if i == 1 else f"x^{i}")
            if j:
                factors.append("y" if j == 1 else f"y^{j}")
            magnitude = abs(c)
            if not factors:
                body = str(magnitude)
            elif magnitude == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(magnitude)] + factors)
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"BivariatePolynomial({self.to_text()!r})"


def _as_polynomial(value) -> Optional[BivariatePolynomial]:
    if isinstance(value, BivariatePolynomial):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return BivariatePolynomial.constant(value)
    return None


# ============================================================================
# Parsing
# ============================================================================

_OPERATORS = set('+-*^()')


class _Token:
    __slots__ = ('kind', 'value', 'position')

    def __init__(self, kind: str, value: Any, position: int):
        self.kind = kind
        self.value = value
        self.position = position

    def starts_atom(self) -> bool:
        return self.kind in ('int', 'var') or (self.kind == 'op' and self.value == '(')


class PolynomialParser:
    """
    Recursive-descent parser for the polynomial grammar.

    Grammar:
        expr   := term (('+' | '-') term)*
        term   := unary ('*' unary)*
        unary  := ('+' | '-') unary | power
        power  := atom ('^' INT)?
        atom   := INT | 'x' | 'y' | '(' expr ')'

    Implicit multiplication ("2x") is rejected.
    """

    def __init__(self, text: str):
        self.text = text
        self.tokens = self._tokenize(text)
        self.index = 0

    def _tokenize(self, text: str) -> List[_Token]:
        tokens: List[_Token] = []
        pos = 0
        while pos < len(text):
            ch = text[pos]
            if ch.isspace():
                pos += 1
            elif ch.isdigit():
                start = pos
                while pos < len(text) and text[pos].isdigit():
                    pos += 1
                if pos < len(text) and text[pos] == '.':
                    raise NonIntegerCoefficientError(
                        "Non-integer coefficient", start, text
                    )
                tokens.append(_Token('int', int(text[start:pos]), start))
            elif ch == '.':
                raise NonIntegerCoefficientError("Non-integer coefficient", pos, text)
            elif ch == '/':
                raise NonIntegerCoefficientError(
                    "Division produces rational coefficients", pos, text
                )
            elif ch in ('x', 'y'):
                tokens.append(_Token('var', ch, pos))
                pos += 1
            elif ch in _OPERATORS:
                tokens.append(_Token('op', ch, pos))
                pos += 1
            else:
                raise PolynomialParseError(f"Unexpected character {ch!r}", pos, text)
        tokens.append(_Token('end', None, len(text)))
        return tokens

    def _peek(self) -> _Token:
        return self.tokens[self.index]

    def _advance(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _is_op(self, token: _Token, *ops: str) -> bool:
        return token.kind == 'op' and token.value in ops

    def _error(self, message: str, token: _Token) -> PolynomialParseError:
        return PolynomialParseError(message, token.position, self.text)

    def parse(self) -> BivariatePolynomial:
        result = self._expr()
        token = self._peek()
        if token.kind != 'end':
            if token.starts_atom():
                raise self._error("Implicit multiplication is not allowed", token)
            raise self._error(f"Unexpected token {token.value!r}", token)
        return result

    def _expr(self) -> BivariatePolynomial:
        result = self._term()
        while self._is_op(self._peek(), '+', '-'):
            op = self._advance().value
            rhs = self._term()
            result = result + rhs if op == '+' else result - rhs
        return result

    def _term(self) -> BivariatePolynomial:
        result = self._unary()
        while True:
            token = self._peek()
            if self._is_op(token, '*'):
                self._advance()
                result = result * self._unary()
            elif token.starts_atom():
                raise self._error("Implicit multiplication is not allowed", token)
            else:
                return result

    def _unary(self) -> BivariatePolynomial:
        token = self._peek()
        if self._is_op(token, '-'):
            self._advance()
            return -self._unary()
        if self._is_op(token, '+'):
            self._advance()
            return self._unary()
        return self._power()

    def _power(self) -> BivariatePolynomial:
        base = self._atom()
        if self._is_op(self._peek(), '^'):
            self._advance()
            token = self._advance()
            if token.kind != 'int':
                raise self._error("Exponent must be a nonnegative integer literal", token)
            return base ** token.value
        return base

    def _atom(self) -> BivariatePolynomial:
        token = self._advance()
        if token.kind == 'int':
            return BivariatePolynomial.constant(token.value)
        if token.kind == 'var':
            return BivariatePolynomial.variable(token.value)
        if self._is_op(token, '('):
            inner = self._expr()
            closing = self._advance()
            if not self._is_op(closing, ')'):
                raise self._error("Expected ')'", closing)
            return inner
        if token.kind == 'end':
            raise self._error("Unexpected end of input", token)
        raise self._error(f"Unexpected token {token.value!r}", token)


def parse_polynomial(text: str) -> BivariatePolynomial:
    """
    Parse polynomial text into a BivariatePolynomial.

    Args:
        text: Expression using integer literals, x, y, + - * ^ and parentheses

    Returns:
        The expanded polynomial

    Raises:
        PolynomialParseError: On a syntax error (carries the position)
        NonIntegerCoefficientError: On decimal literals or division
    """
    try:
        polynomial = PolynomialParser(text).parse()
    except PolynomialError as e:
        logger.error(f"Failed to parse polynomial {text!r}: {e.message}")
        raise
    logger.debug(f"Parsed {text!r} as {polynomial.to_text()}")
    return polynomial


# ============================================================================
# Calculus and evaluation
# ============================================================================

def partial_derivative(p: BivariatePolynomial, var: str) -> BivariatePolynomial:
    """Exact formal partial derivative with respect to 'x' or 'y'."""
    if var not in ('x', 'y'):
        raise ValueError(f"Unknown variable: {var}")
    terms: Dict[Monomial, int] = {}
    for (i, j), c in p.terms.items():
        if var == 'x' and i:
            terms[(i - 1, j)] = c * i
        elif var == 'y' and j:
            terms[(i, j - 1)] = c * j
    return BivariatePolynomial(terms)


def _sparse_horner(coefficients: Dict[int, Any], value: Any) -> Any:
    """Horner's scheme over the nonzero degrees; gaps use value ** gap."""
    degrees = sorted(coefficients, reverse=True)
    acc = coefficients[degrees[0]]
    for previous, degree in zip(degrees, degrees[1:]):
        acc = acc * value ** (previous - degree) + coefficients[degree]
    if degrees[-1]:
        acc = acc * value ** degrees[-1]
    return acc


def _nested_horner(
    p: BivariatePolynomial,
    x: Any,
    y: Any,
    lift: Callable[[int], Any]
) -> Any:
    by_x: Dict[int, Dict[int, Any]] = {}
    for (i, j), c in p.terms.items():
        by_x.setdefault(i, {})[j] = lift(c)
    inner = {i: _sparse_horner(coeffs, y) for i, coeffs in by_x.items()}
    return _sparse_horner(inner, x)


def eval_exact(p: BivariatePolynomial, point: Point) -> Dyadic:
    """Exact value of p at a dyadic point."""
    if p.is_zero():
        return ZERO
    x, y = Dyadic.coerce(point[0]), Dyadic.coerce(point[1])
    return _nested_horner(p, x, y, Dyadic)


def eval_interval(p: BivariatePolynomial, box: IBox) -> Interval:
    """
    Interval enclosure of p over box.

    Horner in x whose coefficients are Horner evaluations in y; powers that
    bridge gaps in the degree sequence use even-power tightening.
    """
    if p.is_zero():
        return Interval(ZERO)
    return _nested_horner(p, box.x, box.y, Interval.point)


def eval_fraction(p: BivariatePolynomial, point: Tuple[Fraction, Fraction]) -> Fraction:
    """Exact value of p at a rational point."""
    if p.is_zero():
        return Fraction(0)
    return _nested_horner(p, Fraction(point[0]), Fraction(point[1]), Fraction)


# ============================================================================
# Rescaling
# ============================================================================

def _validate_rectangle(rect: Rectangle, name: str) -> None:
    x0, y0, x1, y1 = rect
    if x1 <= x0 or y1 <= y0:
        error_msg = f"Degenerate {name} rectangle {list(rect)}: width and height must be positive"
        logger.error(error_msg)
        raise DegenerateRectangleError(error_msg)


def choose_square(rect: Rectangle) -> Rectangle:
    """
    Square used for subdivision of rect.

    A square rect is returned unchanged. Otherwise the lower-left corner is kept
    and the side is the smallest power of two covering both sides, so the map
    back onto rect has dyadic scale factors.
    """
    _validate_rectangle(rect, "region")
    x0, y0, x1, y1 = rect
    width, height = x1 - x0, y1 - y0
    if width == height:
        return rect
    side = 1 << (max(width, height) - 1).bit_length()
    return (x0, y0, x0 + side, y0 + side)


def _expand_linear(a: Fraction, b: Fraction, n: int) -> Dict[int, Fraction]:
    """Coefficients of (a*t + b)^n by degree in t."""
    return {k: math.comb(n, k) * a ** k * b ** (n - k) for k in range(n + 1)}


def rescale_to_square(
    p: BivariatePolynomial,
    rect: Rectangle,
    square: Rectangle
) -> BivariatePolynomial:
    """
    Pull p back along the affine map taking square onto rect.

    Args:
        p: Polynomial on rect
        rect: Target rectangle (integer corners)
        square: Source square (integer corners, equal sides)

    Returns:
        q = c * (p o A) with c the smallest positive integer clearing denominators

    Raises:
        DegenerateRectangleError: If either rectangle has zero width or height
    """
    _validate_rectangle(rect, "target")
    _validate_rectangle(square, "source")
    if square[2] - square[0] != square[3] - square[1]:
        error_msg = f"Source rectangle {list(square)} is not a square"
        logger.error(error_msg)
        raise DegenerateRectangleError(error_msg)

    side = square[2] - square[0]
    ax = Fraction(rect[2] - rect[0], side)
    ay = Fraction(rect[3] - rect[1], side)
    bx = rect[0] - square[0] * ax
    by = rect[1] - square[1] * ay

    composed: Dict[Monomial, Fraction] = {}
    for (i, j), c in p.terms.items():
        xs = _expand_linear(ax, bx, i)
        ys = _expand_linear(ay, by, j)
        for k, cx in xs.items():
            for l, cy in ys.items():
                term = c * cx * cy
                if term:
                    composed[(k, l)] = composed.get((k, l), Fraction(0)) + term

    multiplier = 1
    for value in composed.values():
        multiplier = math.lcm(multiplier, value.denominator)
    q = BivariatePolynomial({m: int(v * multiplier) for m, v in composed.items()})
    logger.info(f"Rescaled {p.to_text()} from {list(rect)} to {list(square)} with c={multiplier}")
    return q


@dataclass(frozen=True)
class AffineMap:
    """Map from the subdivision square back onto the user's rectangle."""

    rect: Rectangle
    square: Rectangle

    @property
    def is_identity(self) -> bool:
        return self.rect == self.square

    def _scale(self, axis: int) -> Fraction:
        side = self.square[2] - self.square[0]
        return Fraction(self.rect[axis + 2] - self.rect[axis], side)

    def map_value(self, value: Union[Dyadic, Fraction], axis: int) -> Union[Dyadic, Fraction]:
        if self.is_identity:
            return value
        scale = self._scale(axis)
        if isinstance(value, Dyadic):
            return self.rect[axis] + (value - self.square[axis]) * Dyadic.from_fraction(scale)
        return self.rect[axis] + (Fraction(value) - self.square[axis]) * scale

    def map_point(self, point):
        return (self.map_value(point[0], 0), self.map_value(point[1], 1))

    def map_box(self, box: IBox) -> IBox:
        x0, y0 = self.map_point((box.x.lo, box.y.lo))
        x1, y1 = self.map_point((box.x.hi, box.y.hi))
        return IBox.from_bounds(x0, y0, x1, y1)


# ============================================================================
# Curve pairs
# ============================================================================

@dataclass(frozen=True)
class CurvePair:
    """The two input curves with their cached partial derivatives."""

    f: BivariatePolynomial
    g: BivariatePolynomial
    fx: BivariatePolynomial = field(default=None)
    fy: BivariatePolynomial = field(default=None)
    gx: BivariatePolynomial = field(default=None)
    gy: BivariatePolynomial = field(default=None)

    def __post_init__(self):
        expected = {
            'fx': partial_derivative(self.f, 'x'),
            'fy': partial_derivative(self.f, 'y'),
            'gx': partial_derivative(self.g, 'x'),
            'gy': partial_derivative(self.g, 'y'),
        }
        for name, derivative in expected.items():
            cached = getattr(self, name)
            if cached is None:
                object.__setattr__(self, name, derivative)
            elif cached != derivative:
                error_msg = f"Cached partial {name} = {cached} does not match {derivative}"
                logger.error(error_msg)
                raise PolynomialError(error_msg)

    @classmethod
    def from_polynomials(cls, f: BivariatePolynomial, g: BivariatePolynomial) -> 'CurvePair':
        return cls(f, g)

    @classmethod
    def parse(cls, f_text: str, g_text: str) -> 'CurvePair':
        return cls(parse_polynomial(f_text), parse_polynomial(g_text))

    @property
    def gradient_f(self) -> Tuple[BivariatePolynomial, BivariatePolynomial]:
        return (self.fx, self.fy)

    @property
    def gradient_g(self) -> Tuple[BivariatePolynomial, BivariatePolynomial]:
        return (self.gx, self.gy)

    def rescaled(self, rect: Rectangle, square: Rectangle) -> 'CurvePair':
        if rect == square:
            return self
        return CurvePair(
            rescale_to_square(self.f, rect, square),
            rescale_to_square(self.g, rect, square)
        )

    def to_dict(self) -> Dict[str, str]:
        return {'f': self.f.to_text(), 'g': self.g.to_text()}
