"""
Certified Simultaneous Approximation of Plane Curves

Piecewise-linear approximations of two algebraic curves V(f) and V(g) in a
rectangle, built on one shared 2:1-balanced quadtree, that are ambient-isotopic
to V(f) and V(g) together. Every reported crossing carries an isolating hull.
"""

__version__ = "0.1.0"

# Import main classes for easier access
from curvepair.config import RunConfig, load_settings
from curvepair.errors import CurvePairError
from curvepair.oracle import certify_intersections, check_smooth_transversal
from curvepair.pipeline import PipelineResult, run_pipeline
from curvepair.poly import CurvePair, parse_polynomial

__all__ = [
    'CurvePair',
    'CurvePairError',
    'PipelineResult',
    'RunConfig',
    'certify_intersections',
    'check_smooth_transversal',
    'load_settings',
    'parse_polynomial',
    'run_pipeline',
]
