"""
Fair top-k selection across intersectional classes
"""

from topk.errors import TopKError
from topk.model import (
    Candidate,
    Instance,
    IntersectionalClass,
    ObjectiveBreakdown,
    PolicyParams,
    Selection,
    build_instance,
    filter_small_classes,
)
from topk.objective import evaluate, marginal_gain, prefix_table
from topk.solvers import SOLVERS, solve

__all__ = [
    "Candidate",
    "Instance",
    "IntersectionalClass",
    "ObjectiveBreakdown",
    "PolicyParams",
    "SOLVERS",
    "Selection",
    "TopKError",
    "build_instance",
    "evaluate",
    "filter_small_classes",
    "marginal_gain",
    "prefix_table",
    "solve",
]
