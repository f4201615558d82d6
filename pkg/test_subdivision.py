"""
Test script for the quadtree subdivision

Covers box addressing, neighborhoods N_i, the acceptance loop, 2:1 balancing
and the rule-4 re-verification on final neighborhoods.
"""

import sys
from pathlib import Path

import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / 'src'))

from curvepair.arith import IBox
from curvepair.poly import CurvePair
from curvepair.predicates import c1, c1_cross
from curvepair.subdivision import (
    AcceptRule,
    BoxNode,
    IterationCapExceeded,
    MaxDepthExceeded,
    Partition,
    Region,
    Side,
    SubdivisionError,
    balance,
    children,
    neighborhood,
    refine_box,
    subdivide,
    verify_rule4,
)


def contains_root3(box: IBox, sign: int = 1) -> bool:
    """Whether box contains (1, sign*sqrt(3)), decided exactly."""
    if not box.x.lo <= 1 <= box.x.hi:
        return False
    lo, hi = box.y.lo * sign, box.y.hi * sign
    lo, hi = min(lo, hi), max(lo, hi)
    return (lo <= 0 or lo * lo <= 3) and hi >= 0 and hi * hi >= 3


def test_box_addressing():
    """Children, parents and region geometry."""
    print("\n" + "=" * 60)
    print("TEST: Box Addressing")
    print("=" * 60)

    root = BoxNode(0, 0, 0)
    kids = children(root)
    print(f"\nChildren of {root}: {kids}")
    assert [k.address for k in kids] == [(1, 0, 0), (1, 1, 0), (1, 0, 1), (1, 1, 1)]
    assert all(k.parent() == root for k in kids)
    assert root.is_ancestor_of(BoxNode(3, 5, 2))
    assert not kids[0].is_ancestor_of(BoxNode(3, 5, 2))

    region = Region(-4, -4, 8)
    assert BoxNode(2, 1, 3).ibox(region) == IBox.from_bounds(-2, 2, 0, 4)
    assert region.cell_side(3) == 1
    assert Region.from_rect((0, 0, 4, 4)) == Region(0, 0, 4)

    with pytest.raises(MaxDepthExceeded):
        children(BoxNode(2, 0, 0), max_depth=2)
    with pytest.raises(SubdivisionError):
        BoxNode(1, 2, 0)
    with pytest.raises(SubdivisionError):
        Region.from_rect((0, 0, 4, 2))
    print("✓ Addressing correct")


def test_neighborhoods():
    """N1 and N2 on a uniform 8x8 partition."""
    print("\n" + "=" * 60)
    print("TEST: Neighborhoods")
    print("=" * 60)

    partition = Partition.uniform(Region(0, 0, 8), 3)
    center = partition.get((3, 3, 3))

    n1 = neighborhood(partition, center, 1)
    n2 = neighborhood(partition, center, 2)
    print(f"\nN1 of {center}: {len(n1)} members")
    print(f"N2 of {center}: {len(n2)} members, hull {n2.hull}")
    assert len(n1) == 5
    assert len(n2) == 13
    assert n2.hull == IBox.from_bounds(1, 1, 6, 6)
    # corner-only contact never qualifies
    assert partition.get((3, 4, 4)) not in n1
    assert partition.get((3, 4, 4)) in n2

    corner = neighborhood(partition, partition.get((3, 0, 0)), 1)
    assert len(corner) == 3
    assert len(neighborhood(partition, center, 0)) == 1
    print("✓ Neighborhood sizes correct")


def test_side_neighbors_mixed_depths():
    """Coarser and finer neighbors across one side."""
    partition = Partition.uniform(Region(0, 0, 8), 1)
    partition.split(partition.get((1, 1, 0)))
    west = partition.get((1, 0, 0))

    east_of_west = partition.side_neighbors(west, Side.EAST)
    assert [b.address for b in east_of_west] == [(2, 2, 0), (2, 2, 1)]
    assert partition.side_neighbors(partition.get((2, 2, 1)), Side.WEST) == [west]
    assert partition.side_neighbors(west, Side.WEST) == []


def test_subdivide_trivial():
    """Single-leaf partitions."""
    print("\n" + "=" * 60)
    print("TEST: Trivial Subdivision")
    print("=" * 60)

    axes = subdivide(CurvePair.parse("x", "y"), Region(-1, -1, 2))
    print(f"\nf=x, g=y: {axes.leaves}")
    assert len(axes) == 1
    assert axes.leaves[0].accept_rule is AcceptRule.BOUNDARY
    assert axes.leaves[0].accept_rule.is_rule4

    constants = subdivide(CurvePair.parse("1", "1"), Region(-1, -1, 2))
    assert len(constants) == 1
    assert constants.leaves[0].accept_rule is AcceptRule.C0C0
    print("✓ Root accepted")


def test_min_depth():
    """Boxes above min_depth are split untested."""
    partition = subdivide(CurvePair.parse("1", "1"), Region(0, 0, 4), min_depth=2)
    assert len(partition) == 16
    assert partition.rule_counts()['C0C0'] == 16


def test_subdivide_circles():
    """Every leaf is accepted; leaves at the crossings use rule 4."""
    print("\n" + "=" * 60)
    print("TEST: Subdivide Two Circles")
    print("=" * 60)

    pair = CurvePair.parse("x^2 + y^2 - 4", "(x-2)^2 + y^2 - 4")
    partition = subdivide(pair, Region(-4, -4, 8))
    stats = partition.statistics()
    print(f"\nStatistics: {stats}")

    assert partition.check_tiling()
    assert all(leaf.accept_rule is not None for leaf in partition.leaves)
    assert stats['leaves'] == len(partition)

    region = partition.region
    for sign in (1, -1):
        at_crossing = [leaf for leaf in partition.leaves if contains_root3(leaf.ibox(region), sign)]
        assert at_crossing
        for leaf in at_crossing:
            assert leaf.accept_rule.is_rule4, f"{leaf} holds a crossing"
    print("✓ Crossings sit in rule-4 leaves")


def test_subdivide_singular_hits_depth_cap():
    """A singular point keeps failing every rule until the depth cap."""
    pair = CurvePair.parse("x^2 - y^2", "y - 3")
    with pytest.raises(MaxDepthExceeded) as info:
        subdivide(pair, Region(-1, -1, 2), max_depth=6)
    box = info.value.box
    print(f"\nDepth cap reached at {box}")
    assert box.depth == 6
    assert box.ibox(Region(-1, -1, 2)).contains_point((0, 0))
    assert info.value.to_dict()['box'] == {'depth': 6, 'ix': box.ix, 'iy': box.iy}


def test_balance():
    """A depth-1 leaf next to depth-3 leaves is split once."""
    print("\n" + "=" * 60)
    print("TEST: Balance")
    print("=" * 60)

    partition = Partition.uniform(Region(0, 0, 8), 1)
    partition.split(partition.get((1, 1, 0)))
    partition.split(partition.get((2, 2, 0)))
    print(f"\nBefore: {len(partition)} leaves, violations {partition.balance_violations()}")
    assert not partition.check_balance()

    balanced = balance(partition)
    print(f"After: {len(balanced)} leaves")
    assert balanced.check_balance()
    assert balanced.check_tiling()
    assert len(balanced) == 13
    assert balanced.get((1, 0, 0)) is None
    assert balanced.get((2, 1, 0)) is not None
    # the input is left alone
    assert len(partition) == 10

    uniform = Partition.uniform(Region(0, 0, 8), 2)
    assert balance(uniform).leaves == uniform.leaves
    assert balance(balanced).leaves == balanced.leaves
    print("✓ Balancing correct")


def test_balance_keeps_rules():
    """Children of a split leaf inherit its rule."""
    pair = CurvePair.parse("1", "1")
    partition = Partition.uniform(Region(0, 0, 8), 1)
    for leaf in partition.leaves:
        partition.set_rule(leaf, AcceptRule.C0C0)
    partition.split(partition.get((1, 1, 0)), AcceptRule.C0C0)
    partition.split(partition.get((2, 2, 0)), AcceptRule.C0C0)
    balanced = balance(partition, pair)
    assert all(leaf.accept_rule is AcceptRule.C0C0 for leaf in balanced.leaves)


def test_verify_rule4():
    """Rule-4 leaves pass C1x on the hulls of the final partition."""
    print("\n" + "=" * 60)
    print("TEST: Rule-4 Verification")
    print("=" * 60)

    axes = CurvePair.parse("x", "y")
    single = subdivide(axes, Region(-1, -1, 2))
    assert verify_rule4(single, axes).leaves == single.leaves

    pair = CurvePair.parse("x^2 + y^2 - 4", "(x-2)^2 + y^2 - 4")
    partition = verify_rule4(balance(subdivide(pair, Region(-4, -4, 8)), pair), pair)
    assert partition.check_balance()
    assert partition.check_tiling()
    rule4 = [leaf for leaf in partition.leaves if leaf.accept_rule.is_rule4]
    print(f"\n{len(rule4)} rule-4 leaves after verification")
    for leaf in rule4:
        assert c1_cross(pair, neighborhood(partition, leaf, 2).hull)
    print("✓ Fixpoint reached")


def relabeled_circles():
    """
    Balanced partition for the two circles where every leaf that passes C1 for
    both curves is marked as a rule-4 leaf, whether or not C1x holds around it.
    """
    pair = CurvePair.parse("x^2 + y^2 - 4", "(x-2)^2 + y^2 - 4")
    partition = verify_rule4(balance(subdivide(pair, Region(-4, -4, 8)), pair), pair)
    region = partition.region
    relabeled = []
    for leaf in partition.leaves:
        box = leaf.ibox(region)
        if leaf.accept_rule.is_rule4:
            continue
        if c1(pair.f, box, pair.gradient_f) and c1(pair.g, box, pair.gradient_g):
            rule = AcceptRule.BOUNDARY if leaf.touches_boundary() else AcceptRule.C1C1X
            relabeled.append(partition.set_rule(leaf, rule))
    return pair, balance(partition, pair), relabeled


def test_verify_rule4_refines():
    """Rule-4 leaves whose final neighborhood fails C1x are split until it holds."""
    print("\n" + "=" * 60)
    print("TEST: Rule-4 Refinement")
    print("=" * 60)

    pair, partition, relabeled = relabeled_circles()
    failing = [leaf for leaf in relabeled if not c1_cross(pair, neighborhood(partition, leaf, 2).hull)]
    print(f"\n{len(relabeled)} leaves relabeled, {len(failing)} fail C1x on hull(N2)")
    assert failing

    verified = verify_rule4(partition, pair)
    print(f"Leaves: {len(partition)} -> {len(verified)}")
    assert len(verified) > len(partition)
    assert verified.check_tiling()
    assert verified.check_balance()
    for leaf in failing:
        assert verified.get(leaf.address) is None
    for leaf in verified.leaves:
        assert leaf.accept_rule is not None
        if leaf.accept_rule.is_rule4:
            assert c1_cross(pair, neighborhood(verified, leaf, 2).hull), f"{leaf} still fails"
    print("✓ Every rule-4 hull passes C1x")


def test_verify_rule4_iteration_cap():
    """No refinement rounds allowed: the failing leaves are reported."""
    pair, partition, relabeled = relabeled_circles()
    with pytest.raises(IterationCapExceeded) as info:
        verify_rule4(partition, pair, iteration_cap=0)
    error = info.value.to_dict()
    print(f"\nIteration cap: {error}")
    assert error['stage'] == "subdivide"
    assert error['details'] == {'iteration_cap': 0}
    assert info.value.box in relabeled


def test_refine_box():
    """Re-subdividing one accepted leaf keeps the partition valid."""
    pair = CurvePair.parse("x^2 + y^2 - 4", "(x-2)^2 + y^2 - 4")
    partition = verify_rule4(balance(subdivide(pair, Region(-4, -4, 8)), pair), pair)
    leaf = partition.leaves[0]
    refined = refine_box(partition, pair, leaf)
    assert refined.get(leaf.address) is None
    assert len(refined) >= len(partition) + 3
    assert refined.check_tiling() and refined.check_balance()
    assert all(other.accept_rule is not None for other in refined.leaves)
    # the input is left alone
    assert partition.get(leaf.address) is not None


def main():
    """Run all tests."""
    print("\n" + "=" * 60)
    print("Subdivision Test Suite")
    print("=" * 60)

    test_box_addressing()
    test_neighborhoods()
    test_side_neighbors_mixed_depths()
    test_subdivide_trivial()
    test_min_depth()
    test_subdivide_circles()
    test_subdivide_singular_hits_depth_cap()
    test_balance()
    test_balance_keeps_rules()
    test_verify_rule4()
    test_verify_rule4_refines()
    test_verify_rule4_iteration_cap()
    test_refine_box()

    print("\n" + "=" * 60)
    print("All tests completed!")
    print("=" * 60)


if __name__ == "__main__":
    main()
