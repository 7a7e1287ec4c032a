"""
Greedy Solvers for Fair Top-k
Admit one candidate at a time, always the one that raises J the most
"""

from __future__ import annotations

import heapq
import logging
from typing import NamedTuple

from topk.model import Instance, ObjectiveBreakdown, PolicyParams, Selection
from topk.objective import evaluate, gain, gain_sequence, marginal_gain

logger = logging.getLogger(__name__)


class GreedySolution(NamedTuple):
    selection: Selection
    breakdown: ObjectiveBreakdown
    op_count: int


def solve_greedy_naive(instance: Instance, params: PolicyParams, literal: bool = False) -> GreedySolution:
    """k rounds, each re-evaluating every class frontier (or every unadmitted candidate if literal)

    The literal form scores each unadmitted candidate as the next admission. A
    non-frontier candidate carries the same discrepancy delta as its class
    frontier and no more utility, so both forms pick the same class.
    """
    params.check_against(instance)
    rate, tradeoff = params.selection_rate, params.tradeoff
    selection = Selection.empty(instance.num_classes)
    op_count = 0

    for _ in range(params.quota):
        best_gain = float("-inf")
        best_class = -1
        for i, cls in enumerate(instance.classes):
            count = selection.counts[i]
            if count >= cls.size:
                continue
            if literal:
                for rank in range(count, cls.size):
                    candidate_gain = gain(float(cls.utilities[rank]), count, cls.size, rate, tradeoff)
                    op_count += 1
                    if candidate_gain > best_gain:
                        best_gain, best_class = candidate_gain, i
            else:
                candidate_gain = marginal_gain(instance, params, selection, i)
                op_count += 1
                # strict: lowest class index wins ties
                if candidate_gain > best_gain:
                    best_gain, best_class = candidate_gain, i
        selection = selection.increment(best_class)

    breakdown = evaluate(instance, params, selection)
    logger.debug("greedy (%s): k=%d ops=%d J=%.6f",
                 "literal" if literal else "frontier", params.quota, op_count, breakdown.total)
    return GreedySolution(selection, breakdown, op_count)


def solve_greedy_merged(instance: Instance, params: PolicyParams) -> GreedySolution:
    """Precomputed per-class gain sequences merged through a priority queue of class heads"""
    params.check_against(instance)
    k = params.quota
    counts = [0] * instance.num_classes
    op_count = 0

    if k == 0:
        selection = Selection(tuple(counts))
        return GreedySolution(selection, evaluate(instance, params, selection), op_count)

    gains = []
    for cls in instance.classes:
        length = min(cls.size, k)
        gains.append(gain_sequence(cls.utilities, cls.size, params.selection_rate,
                                   params.tradeoff, length).tolist())
        op_count += length

    # (-gain, class index): max gain first, lowest index on ties
    heads = [(-seq[0], i) for i, seq in enumerate(gains) if seq]
    heapq.heapify(heads)
    op_count += len(heads)

    for _ in range(k):
        _, i = heapq.heappop(heads)
        op_count += 1
        counts[i] += 1
        # re-insert the class with its next gain; sequences are not merged blindly
        if counts[i] < len(gains[i]):
            heapq.heappush(heads, (-gains[i][counts[i]], i))
            op_count += 1

    selection = Selection(tuple(counts))
    breakdown = evaluate(instance, params, selection)
    logger.debug("greedy (merged): k=%d ops=%d J=%.6f", k, op_count, breakdown.total)
    return GreedySolution(selection, breakdown, op_count)
