"""
Simultaneous Approximation Demonstration

This script demonstrates the key features of the curvepair pipeline.
"""

import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / 'src'))

from curvepair.config import RunConfig
from curvepair.export import render_svg, report_to_dict, report_to_json
from curvepair.oracle import Inconclusive, certify_intersections
from curvepair.pipeline import run_pipeline


def main():
    print("=" * 70)
    print("Simultaneous Approximation Demonstration")
    print("=" * 70)

    config = RunConfig(
        f_text="x^2 + y^2 - 4",
        g_text="(x-2)^2 + y^2 - 4",
        region=(-4, -4, 4, 4),
        emit_partition=True
    )

    # Run the pipeline
    print("\n1. Running the pipeline on two circles...")
    result = run_pipeline(config)
    stats = result.get_statistics()
    print(f"   - Leaves: {stats['leaves']} (deepest {stats['max_depth_used']})")
    print(f"   - Acceptance rules: {stats['rule_counts']}")
    print(f"   - Snakes: {stats['snakes']}")
    print(f"   - Head refinements: {stats['head_refinements']}")

    # Crossings
    print("\n2. Certified crossings:")
    for crossing in result.crossings:
        print(f"   - {crossing.kind} at {[float(v) for v in crossing.point]}, hull {crossing.hull}")

    # Curves
    print("\n3. Approximations:")
    for name, polylines in result.curves.items():
        for points, closed in polylines:
            shape = "closed" if closed else "open"
            print(f"   - A({name}): {shape} polyline with {len(points)} vertices")

    # Timings
    print("\n4. Stage timings:")
    for stage, seconds in stats['timings'].items():
        print(f"   - {stage}: {seconds * 1000:.1f} ms")

    # Cross-check with the oracle
    print("\n5. Cross-checking with the interval oracle...")
    try:
        roots = certify_intersections(result.pair, config.region, grid_depth=4)
        print(f"   - Oracle certified {len(roots)} roots")
        for root in roots:
            print(f"   - {root.box}")
    except Inconclusive as e:
        print(f"   - Oracle inconclusive on {len(e.cells)} cells")

    # Export
    print("\n6. Exporting report...")
    output_dir = Path("output")
    output_dir.mkdir(exist_ok=True)
    report = report_to_dict(result, emit_partition=True)
    json_file = output_dir / "circles.json"
    svg_file = output_dir / "circles.svg"
    json_file.write_text(report_to_json(report), encoding='utf-8')
    svg_file.write_text(render_svg(report), encoding='utf-8')
    print(f"   - Report exported to: {json_file}")
    print(f"   - Drawing exported to: {svg_file}")

    # Non-square region
    print("\n7. Clipped circle on a non-square region...")
    clipped = run_pipeline(RunConfig("x^2 + y^2 - 4", "y", (0, -4, 4, 4)))
    print(f"   - Subdivision square: {clipped.affine.square}")
    print(f"   - Working f: {clipped.working_pair.f}")
    print(f"   - Crossings: {clipped.total_crossings}")

    print("\n" + "=" * 70)
    print("Demonstration completed successfully!")
    print("=" * 70)


if __name__ == "__main__":
    main()
