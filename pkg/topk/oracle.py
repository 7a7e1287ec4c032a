"""
Brute-Force Oracles for Fair Top-k
Exhaustive reference answers for tests and manual audits
"""

from __future__ import annotations

import itertools
import math
from typing import Iterator, NamedTuple

from topk.errors import OracleTooLargeError
from topk.model import Instance, PolicyParams, Selection
from topk.objective import class_discrepancy, evaluate

MAX_COMPOSITIONS = 10_000_000
MAX_SUBSET_CANDIDATES = 20


class OracleCounts(NamedTuple):
    selection: Selection
    objective: float


class OracleSubset(NamedTuple):
    bits: tuple[int, ...]
    objective: float


def composition_count(instance: Instance, quota: int) -> int:
    """Upper bound on the count vectors the enumeration visits"""
    return math.prod(min(cls.size, quota) + 1 for cls in instance.classes)


def count_vectors(sizes, quota) -> Iterator[tuple[int, ...]]:
    """Every (c_1..c_m) with 0 <= c_i <= sizes[i] and sum == quota, in lexicographic order"""
    if not sizes:
        if quota == 0:
            yield ()
        return
    rest_capacity = sum(sizes[1:])
    low = max(0, quota - rest_capacity)
    for first in range(low, min(sizes[0], quota) + 1):
        for tail in count_vectors(sizes[1:], quota - first):
            yield (first, *tail)


def _guard(instance, params):
    params.check_against(instance)
    size = composition_count(instance, params.quota)
    if size > MAX_COMPOSITIONS:
        raise OracleTooLargeError(size, MAX_COMPOSITIONS)


def oracle_counts(instance: Instance, params: PolicyParams) -> OracleCounts:
    """Best count vector by exhaustive enumeration (ties: lexicographically smallest)"""
    _guard(instance, params)
    best = None
    best_value = -math.inf
    for counts in count_vectors([cls.size for cls in instance.classes], params.quota):
        selection = Selection(counts)
        value = evaluate(instance, params, selection).total
        if value > best_value:
            best, best_value = selection, value
    return OracleCounts(best, best_value)


def oracle_min_discrepancy(instance: Instance, params: PolicyParams) -> OracleCounts:
    """Feasible count vector of least D (ties: larger B, then lexicographically smallest)

    objective holds the minimal D, not J.
    """
    _guard(instance, params)
    best = None
    best_key = None
    for counts in count_vectors([cls.size for cls in instance.classes], params.quota):
        breakdown = evaluate(instance, params, Selection(counts))
        key = (breakdown.discrepancy, -breakdown.utility)
        if best_key is None or key < best_key:
            best, best_key = Selection(counts), key
    return OracleCounts(best, best_key[0])


def oracle_subsets(instance: Instance, params: PolicyParams) -> OracleSubset:
    """Best candidate subset of size k, scored on the 0/1 representation directly"""
    params.check_against(instance)
    total = instance.total_candidates
    if total > MAX_SUBSET_CANDIDATES:
        raise OracleTooLargeError(total, MAX_SUBSET_CANDIDATES, what="candidates")

    owner = []
    scores = []
    for i, cls in enumerate(instance.classes):
        for member in cls.members:
            owner.append(i)
            scores.append(member.score)
    sizes = [cls.size for cls in instance.classes]
    rate, tradeoff = params.selection_rate, params.tradeoff

    best_bits = None
    best_value = -math.inf
    for chosen in itertools.combinations(range(total), params.quota):
        admitted = [0] * len(sizes)
        for index in chosen:
            admitted[owner[index]] += 1
        utility = sum(scores[index] for index in chosen)
        discrepancy = sum(class_discrepancy(c, n, rate) for c, n in zip(admitted, sizes))
        value = utility - tradeoff * discrepancy
        if value > best_value:
            picked = set(chosen)
            best_bits = tuple(1 if index in picked else 0 for index in range(total))
            best_value = value
    return OracleSubset(best_bits, best_value)
