"""
Test script for the box predicates C0, C1 and C1x.
"""

import random
import sys
from pathlib import Path
from typing import List

import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / 'src'))

from curvepair.arith import Dyadic, IBox, Interval
from curvepair.poly import CurvePair, eval_exact, parse_polynomial
from curvepair.predicates import PredicateResult, c0, c1, c1_cross


def test_c0():
    """C0 excludes the zero set from a box."""
    print("\n" + "=" * 60)
    print("TEST: C0")
    print("=" * 60)

    circle = parse_polynomial("x^2 + y^2 - 4")
    inside = c0(circle, IBox.from_bounds(0, 0, 1, 1))
    straddling = c0(circle, IBox.from_bounds(1, 1, 2, 2))
    print(f"\n[0,1]^2: {inside}")
    print(f"[1,2]^2: {straddling}")

    assert inside.value is True
    assert inside.witness_interval == Interval(-4, -2)
    assert straddling.value is False
    assert straddling.witness_interval == Interval(-2, 4)
    assert c0(parse_polynomial("1"), IBox.from_bounds(-100, -100, 100, 100))
    print("✓ C0 correct")


def test_c1():
    """C1 rules out perpendicular gradients inside a box."""
    print("\n" + "=" * 60)
    print("TEST: C1")
    print("=" * 60)

    circle = parse_polynomial("x^2 + y^2 - 4")
    centered = c1(circle, IBox.from_bounds(-1, -1, 1, 1))
    offset = c1(circle, IBox.from_bounds(1, 1, 2, 2))
    print(f"\n[-1,1]^2: {centered}")
    print(f"[1,2]^2: {offset}")

    assert not centered
    assert centered.witness_interval == Interval(-8, 8)
    assert offset
    assert offset.witness_interval == Interval(8, 32)

    line = parse_polynomial("x")
    result = c1(line, IBox.from_bounds(-5, 0, 3, 8))
    assert result and result.witness_interval == Interval(1)

    # cached gradient gives the same answer
    pair = CurvePair.parse("x^2 + y^2 - 4", "y")
    assert c1(circle, IBox.from_bounds(1, 1, 2, 2), pair.gradient_f) == offset
    print("✓ C1 correct")


def test_c1_cross():
    """C1x rules out parallel gradients of f and g over a rectangle."""
    print("\n" + "=" * 60)
    print("TEST: C1 Cross")
    print("=" * 60)

    axes = CurvePair.parse("x", "y")
    result = c1_cross(axes, IBox.from_bounds(-3, 0, 5, 1))
    print(f"\nf=x, g=y: {result}")
    assert result and result.witness_interval == Interval(1)

    same = CurvePair.parse("x^2 + y^2 - 4", "x^2 + y^2 - 4")
    assert not c1_cross(same, IBox.from_bounds(1, 1, 2, 2))

    circles = CurvePair.parse("x^2 + y^2 - 4", "(x-2)^2 + y^2 - 4")
    result = c1_cross(circles, IBox.from_bounds(0, 0, 2, 2))
    print(f"Two circles on [0,2]^2: {result}")
    # fx*gy - fy*gx = [0,4]*[0,4] - [0,4]*[-4,0] = [0,16] - [-16,0]
    assert result.witness_interval == Interval(0, 32)
    assert not result

    # away from the line through both crossings
    assert c1_cross(circles, IBox.from_bounds(0, 1, 1, 2))
    print("✓ C1x correct")


def test_predicate_result():
    """The value must match the witness."""
    assert PredicateResult(False, Interval(-1, 1)).to_dict()['value'] is False
    with pytest.raises(ValueError):
        PredicateResult(True, Interval(-1, 1))


# ============================================================================
# Seeded properties
# ============================================================================

PAIRS = [
    ("x^2 + y^2 - 4", "(x-2)^2 + y^2 - 4"),
    ("x^2 + 4*y^2 - 4", "x^3 - y - 1"),
    ("x*y - 1", "x^2 - 2*y + 1"),
]


def random_box(rng: random.Random) -> IBox:
    """Box with sixteenth-dyadic corners inside [-4, 4]^2."""
    x0 = Dyadic(rng.randint(-64, 48), -4)
    y0 = Dyadic(rng.randint(-64, 48), -4)
    return IBox.from_bounds(x0, y0, x0 + Dyadic(rng.randint(1, 16), -4), y0 + Dyadic(rng.randint(1, 16), -4))


def sub_boxes(rng: random.Random, box: IBox) -> List[IBox]:
    """The four quadrants of box and one random sub-rectangle."""
    (x0, y0, x1, y1), (mx, my) = box.bounds(), box.midpoint
    quadrants = [
        IBox.from_bounds(x0, y0, mx, my), IBox.from_bounds(mx, y0, x1, my),
        IBox.from_bounds(x0, my, mx, y1), IBox.from_bounds(mx, my, x1, y1)
    ]
    a, b = sorted(rng.randint(0, 8) for _ in range(2))
    c, d = sorted(rng.randint(0, 8) for _ in range(2))
    w, h = box.width, box.height
    inner = IBox.from_bounds(x0 + (w * a).shift(-3), y0 + (h * c).shift(-3), x0 + (w * b).shift(-3), y0 + (h * d).shift(-3))
    return quadrants + [inner]


def grid_points(box: IBox, n: int = 8):
    """(n+1)^2 exact points spread over box, n a power of two."""
    bits = n.bit_length() - 1
    x0, y0 = box.x.lo, box.y.lo
    for i in range(n + 1):
        for j in range(n + 1):
            yield (x0 + (box.width * i).shift(-bits), y0 + (box.height * j).shift(-bits))


def test_predicates_monotone():
    """A predicate that holds on a box holds on every box inside it."""
    print("\n" + "=" * 60)
    print("TEST: Predicates Monotone")
    print("=" * 60)

    rng = random.Random(1337)
    pairs = [CurvePair.parse(f, g) for f, g in PAIRS]
    passed = {'c0': 0, 'c1': 0, 'c1_cross': 0}
    for _ in range(100):
        pair = rng.choice(pairs)
        parent = random_box(rng)
        checks = {
            'c0': lambda box: c0(pair.f, box),
            'c1': lambda box: c1(pair.f, box, pair.gradient_f),
            'c1_cross': lambda box: c1_cross(pair, box)
        }
        for name, check in checks.items():
            if not check(parent):
                continue
            passed[name] += 1
            for child in sub_boxes(rng, parent):
                assert check(child), f"{name} holds on {parent} but not on {child}"

    print(f"\nParents passing: {passed}")
    assert all(count > 0 for count in passed.values())
    print("✓ Children inherit passing predicates")


def test_predicates_sound():
    """Passing boxes agree with exact values on a dense grid of points."""
    print("\n" + "=" * 60)
    print("TEST: Predicates Sound")
    print("=" * 60)

    rng = random.Random(4242)
    pairs = [CurvePair.parse(f, g) for f, g in PAIRS]
    passed = {'c0': 0, 'c1_cross': 0}
    for _ in range(100):
        pair = rng.choice(pairs)
        box = random_box(rng)

        if c0(pair.f, box):
            passed['c0'] += 1
            signs = {eval_exact(pair.f, point).sign() for point in grid_points(box)}
            assert signs in ({1}, {-1}), f"f changes sign or vanishes in {box}"

        if c1_cross(pair, box):
            passed['c1_cross'] += 1
            points = list(grid_points(box, 4))
            gradients_f = [(eval_exact(pair.fx, p), eval_exact(pair.fy, p)) for p in points]
            gradients_g = [(eval_exact(pair.gx, p), eval_exact(pair.gy, p)) for p in points]
            crosses = {
                (fx * gy - fy * gx).sign()
                for fx, fy in gradients_f
                for gx, gy in gradients_g
            }
            assert 0 not in crosses, f"Collinear gradients in {box}"
            assert len(crosses) == 1

    print(f"\nBoxes passing: {passed}")
    assert all(count > 0 for count in passed.values())
    print("✓ No sign change or collinear gradients inside passing boxes")


def main():
    """Run all tests."""
    print("\n" + "=" * 60)
    print("Predicate Test Suite")
    print("=" * 60)

    test_c0()
    test_c1()
    test_c1_cross()
    test_predicate_result()
    test_predicates_monotone()
    test_predicates_sound()

    print("\n" + "=" * 60)
    print("All tests completed!")
    print("=" * 60)


if __name__ == "__main__":
    main()
