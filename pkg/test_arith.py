"""
Test script for exact arithmetic

Covers Dyadic canonical form and rounding, interval operations and the
inclusion property of interval arithmetic on sampled points.
"""

import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / 'src'))

from curvepair.arith import (
    Dyadic,
    IBox,
    Interval,
    InvalidIntervalError,
    NonDyadicError,
    contains_zero,
    interval_add,
    interval_mul,
    interval_pow,
    interval_sub,
)


def test_dyadic_canonical_form():
    """Equal values have equal fields."""
    print("\n" + "=" * 60)
    print("TEST: Dyadic Canonical Form")
    print("=" * 60)

    four = Dyadic(4, 0)
    print(f"\nDyadic(4, 0) -> {four!r}")
    assert (four.mantissa, four.exponent) == (1, 2)

    zero = Dyadic(0, 5)
    assert (zero.mantissa, zero.exponent) == (0, 0)

    assert Dyadic(6, -2) == Dyadic(3, -1)
    assert Dyadic(3, -1) == Dyadic.from_fraction(Fraction(3, 2))
    assert hash(Dyadic(8, -1)) == hash(4)
    assert Dyadic(2, 1) == 4
    print("✓ Canonical form holds")


def test_dyadic_arithmetic():
    """Sums, products and integer mixing are exact."""
    print("\n" + "=" * 60)
    print("TEST: Dyadic Arithmetic")
    print("=" * 60)

    a = Dyadic(3, -1)
    b = Dyadic.parse("5*2^-2")
    print(f"\n{a} + {b} = {a + b}")
    assert (a + b).to_fraction() == Fraction(11, 4)
    assert (a * b).to_fraction() == Fraction(15, 8)
    assert (a - b).to_fraction() == Fraction(1, 4)
    assert (1 - a).to_fraction() == Fraction(-1, 2)
    assert (2 * a) == 3
    assert (a ** 3).to_fraction() == Fraction(27, 8)
    assert a.half().to_fraction() == Fraction(3, 4)
    assert Dyadic(-5, -3) < 0 < a
    assert float(b) == 1.25
    print("✓ Arithmetic is exact")


def test_dyadic_fraction_comparison():
    """Dyadics compare with Fractions by value, consistently with their hash."""
    print("\n" + "=" * 60)
    print("TEST: Dyadic Fraction Comparison")
    print("=" * 60)

    a = Dyadic(3, -1)
    assert a == Fraction(3, 2) and Fraction(3, 2) == a
    assert a != Fraction(1, 3)
    assert hash(a) == hash(Fraction(3, 2))
    assert len({a, Fraction(3, 2)}) == 1
    assert {Fraction(3, 2): 'x'}[a] == 'x'

    assert a < Fraction(5, 3) and Fraction(4, 3) < a
    assert a > Fraction(1, 3) and a >= Fraction(3, 2) and a <= Fraction(3, 2)
    assert Dyadic(-1, -2) < Fraction(-1, 5) < Dyadic(0)
    assert max(Fraction(7, 5), a, Dyadic(1)) == a
    print("✓ Fraction comparisons exact")


def test_dyadic_text_form():
    """str and parse agree."""
    value = Dyadic(-7, -5)
    assert str(value) == "-7*2^-5"
    assert Dyadic.parse(str(value)) == value
    assert Dyadic.parse("12") == 12

    with pytest.raises(ValueError):
        Dyadic.parse("1.5")
    with pytest.raises(NonDyadicError):
        Dyadic.from_fraction(Fraction(1, 3))


def test_dyadic_outward_rounding():
    """floor_to and ceil_to bracket the value."""
    print("\n" + "=" * 60)
    print("TEST: Outward Rounding")
    print("=" * 60)

    value = Dyadic(5, -3)
    print(f"\n5/8 to 1 bit: floor={value.floor_to(1)}, ceil={value.ceil_to(1)}")
    assert value.floor_to(1) == Dyadic(1, -1)
    assert value.ceil_to(1) == 1
    assert Dyadic(-5, -3).floor_to(1) == -1
    assert Dyadic(-5, -3).ceil_to(1) == Dyadic(-1, -1)
    # already representable
    assert Dyadic(3, -1).floor_to(4) == Dyadic(3, -1)
    print("✓ Rounding is outward")


def test_interval_operations():
    """Interval add, sub and mul from their endpoint formulas."""
    print("\n" + "=" * 60)
    print("TEST: Interval Operations")
    print("=" * 60)

    I = Interval(-1, 2)
    J = Interval(3, 4)
    print(f"\nI = {I}, J = {J}")
    print(f"I * J = {interval_mul(I, J)}")

    assert interval_add(I, J) == Interval(2, 6)
    assert interval_sub(I, J) == Interval(-5, -1)
    assert interval_mul(I, J) == Interval(-4, 8)
    assert interval_mul(Interval(-2, -1), Interval(-3, 5)) == Interval(-10, 6)
    assert I * J == interval_mul(I, J)
    assert -I == Interval(-2, 1)
    assert contains_zero(I)
    assert not contains_zero(I - J)
    print("✓ Endpoint formulas hold")


def test_interval_power_tightening():
    """Even powers of a straddling interval start at zero."""
    assert interval_pow(Interval(-1, 2), 2) == Interval(0, 4)
    assert interval_mul(Interval(-1, 2), Interval(-1, 2)) == Interval(-2, 4)
    assert interval_pow(Interval(-3, -1), 2) == Interval(1, 9)
    assert interval_pow(Interval(-1, 2), 3) == Interval(-1, 8)
    assert interval_pow(Interval(-1, 2), 0) == Interval(1)


def test_invalid_interval():
    """lo > hi is rejected."""
    with pytest.raises(InvalidIntervalError):
        Interval(2, 1)


def test_interval_helpers():
    """Width, midpoint, intersect, scale, round_out."""
    I = Interval(Dyadic(1, -2), 3)
    assert I.width().to_fraction() == Fraction(11, 4)
    assert I.midpoint().to_fraction() == Fraction(13, 8)
    assert I.intersect(Interval(4, 5)) is None
    assert I.intersect(Interval(1, 5)) == Interval(1, 3)
    assert I.scale(-2) == Interval(-6, Dyadic(-1, -1))
    assert Interval(Dyadic(5, -3), Dyadic(7, -3)).round_out(1) == Interval(Dyadic(1, -1), 1)
    assert Interval(1, 2).interior_subset_of(Interval(0, 3))
    assert not Interval(0, 2).interior_subset_of(Interval(0, 3))
    assert str(Interval(Dyadic(1, -1), 2)) == "[1/2, 2]"


def test_interval_inclusion():
    """Every product and sum of sampled points lies in the interval result."""
    print("\n" + "=" * 60)
    print("TEST: Inclusion Property")
    print("=" * 60)

    rng = random.Random(20240611)

    def random_interval():
        a = Dyadic(rng.randint(-64, 64), -3)
        b = Dyadic(rng.randint(-64, 64), -3)
        return Interval(min(a, b), max(a, b))

    def sample(I):
        return I.lo + (I.hi - I.lo) * Dyadic(rng.randint(0, 256), -8)

    checked = 0
    for _ in range(200):
        I, J = random_interval(), random_interval()
        for _ in range(5):
            a, b = sample(I), sample(J)
            assert interval_add(I, J).contains(a + b)
            assert interval_sub(I, J).contains(a - b)
            assert interval_mul(I, J).contains(a * b)
            assert interval_pow(I, 2).contains(a * a)
            checked += 1
    print(f"\n✓ {checked} sampled points inside their interval results")


def test_box_geometry():
    """Corners, split order and containment."""
    print("\n" + "=" * 60)
    print("TEST: Boxes")
    print("=" * 60)

    box = IBox.from_bounds(0, 0, 2, 2)
    print(f"\nBox: {box}")
    assert box.corners() == [(0, 0), (2, 0), (2, 2), (0, 2)]
    assert box.midpoint == (1, 1)
    assert box.width == 2

    sw, se, nw, ne = box.split()
    assert sw == IBox.from_bounds(0, 0, 1, 1)
    assert se == IBox.from_bounds(1, 0, 2, 1)
    assert nw == IBox.from_bounds(0, 1, 1, 2)
    assert ne == IBox.from_bounds(1, 1, 2, 2)

    assert sw.hull(ne) == box
    assert sw.intersect(ne) == IBox.from_bounds(1, 1, 1, 1)
    assert sw.intersect(IBox.from_bounds(3, 3, 4, 4)) is None
    assert IBox.from_bounds(Dyadic(1, -1), Dyadic(1, -1), 1, 1).interior_subset_of(box)
    assert not sw.interior_subset_of(box)
    assert box.contains_point((Dyadic(1, -1), 2))
    assert box.inflate(1) == IBox.from_bounds(-1, -1, 3, 3)
    print("✓ Box geometry correct")


def main():
    """Run all tests."""
    print("\n" + "=" * 60)
    print("Exact Arithmetic Test Suite")
    print("=" * 60)

    test_dyadic_canonical_form()
    test_dyadic_arithmetic()
    test_dyadic_fraction_comparison()
    test_dyadic_text_form()
    test_dyadic_outward_rounding()
    test_interval_operations()
    test_interval_power_tightening()
    test_invalid_interval()
    test_interval_helpers()
    test_interval_inclusion()
    test_box_geometry()

    print("\n" + "=" * 60)
    print("All tests completed!")
    print("=" * 60)


if __name__ == "__main__":
    main()
