"""Builders and hypothesis strategies shared by the test modules"""

import math

from hypothesis import strategies as st

from topk.model import Candidate, PolicyParams, build_instance

RATES = (0.25, 0.5)
TRADEOFFS = (0.0, 0.5, 1.0, 5.0, 100.0)


def make_instance(*class_scores, prefix="c"):
    """One class per score list; classes keep the given order (labels c0, c1, ...)"""
    candidates = []
    for i, scores in enumerate(class_scores):
        for j, score in enumerate(scores):
            candidates.append(Candidate(id=f"{prefix}{i}_{j}", score=score, attributes=(f"c{i}",)))
    return build_instance(candidates)


@st.composite
def small_instances(draw, max_classes=3, max_class_size=5, max_total=14, distinct=True):
    """Random instance with |C| <= 3 and n <= 14"""
    num_classes = draw(st.integers(1, max_classes))
    sizes = draw(st.lists(st.integers(1, max_class_size), min_size=num_classes, max_size=num_classes)
                 .filter(lambda s: sum(s) <= max_total))
    total = sum(sizes)
    scores = draw(st.lists(st.integers(0, 850), min_size=total, max_size=total, unique=distinct))
    groups = []
    position = 0
    for size in sizes:
        groups.append([float(s) for s in scores[position:position + size]])
        position += size
    return make_instance(*groups)


@st.composite
def problems(draw, **kwargs):
    """(instance, params) with p and lambda drawn from the acceptance grids"""
    instance = draw(small_instances(**kwargs))
    rate = draw(st.sampled_from(RATES))
    tradeoff = draw(st.sampled_from(TRADEOFFS))
    return instance, PolicyParams.from_rate(rate, instance.total_candidates, tradeoff)


def close(a, b, tol=1e-9):
    return math.isclose(a, b, rel_tol=tol, abs_tol=tol)
