"""
Dynamic Programming Solver for Fair Top-k
Exact optimum over per-class admitted counts, with backtracking
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import pandas as pd

from topk.model import Instance, ObjectiveBreakdown, PolicyParams, Selection
from topk.objective import evaluate, prefix_table

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DpTable:
    """value[i][j]: best J admitting exactly j from classes 1..i; row 0 is the padding row

    cell_updates counts the (j, m) pairs scanned, with m capped at min(n_i, k): it is
    (k + 1)(k + 2) / 2 per class holding at least k candidates and less for smaller classes.
    """

    value: np.ndarray
    choice: np.ndarray
    cell_updates: int

    @property
    def optimum(self) -> float:
        return float(self.value[-1, -1])

    def to_frame(self, labels) -> pd.DataFrame:
        frame = pd.DataFrame(self.value, columns=[str(j) for j in range(self.value.shape[1])])
        frame.insert(0, "class", ["-", *labels])
        return frame

    def to_csv(self, path, labels):
        """Audit dump of the value table (one row per class prefix, one column per budget)"""
        self.to_frame(labels).to_csv(path, index=False, float_format="%.10g", lineterminator="\n")


class DpSolution(NamedTuple):
    selection: Selection
    breakdown: ObjectiveBreakdown
    table: DpTable


def solve_dp(instance: Instance, params: PolicyParams) -> DpSolution:
    """Maximize J over all count vectors summing to k"""
    params.check_against(instance)
    k = params.quota
    rows = prefix_table(instance, params)
    num_classes = instance.num_classes

    # Only value[0][0] is reachable in the padding row, so every column j admits exactly j
    value = np.full((num_classes + 1, k + 1), -np.inf)
    value[0, 0] = 0.0
    choice = np.zeros((num_classes + 1, k + 1), dtype=np.int64)
    cell_updates = 0

    for i, cls in enumerate(instance.classes, start=1):
        contribution = rows[i - 1]
        previous = value[i - 1]
        best = value[i]
        argbest = choice[i]
        # m ascending with a strict comparison: the smallest m wins ties
        for m in range(min(cls.size, k) + 1):
            candidate = contribution[m] + previous[: k + 1 - m]
            target = best[m:]
            better = candidate > target
            target[better] = candidate[better]
            argbest[m:][better] = m
            # counts above the class size are never scanned
            cell_updates += k + 1 - m

    counts = [0] * num_classes
    budget = k
    for i in range(num_classes, 0, -1):
        m = int(choice[i, budget])
        counts[i - 1] = m
        budget -= m

    selection = Selection(tuple(counts))
    breakdown = evaluate(instance, params, selection)
    table = DpTable(value=value, choice=choice, cell_updates=cell_updates)
    logger.debug("dp: |C|=%d k=%d cell updates=%d J=%.6f",
                 num_classes, k, cell_updates, breakdown.total)
    return DpSolution(selection, breakdown, table)
