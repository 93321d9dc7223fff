"""Exact Clifford-algebra tools and cohomological obstructions to Clifford formality."""

from .exterior import Multivector, blade, clifford_euclidean, hodge_star, parse_multivector, wedge
from .metric import GramMetric, LinearMap, clifford_metric, hodge_star_metric, scaled_clifford
from .obstructions import full_report
from .presets import parse_preset
from .ring import GradedRing, intersection_form, signature
from .search import search

__all__ = [
    "GradedRing",
    "GramMetric",
    "LinearMap",
    "Multivector",
    "blade",
    "clifford_euclidean",
    "clifford_metric",
    "full_report",
    "hodge_star",
    "hodge_star_metric",
    "intersection_form",
    "parse_multivector",
    "parse_preset",
    "scaled_clifford",
    "search",
    "signature",
    "wedge",
]
