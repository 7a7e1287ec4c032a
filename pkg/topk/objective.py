"""
Objective Evaluation for Fair Top-k
J = B - lambda * D, the per-class prefix contribution table and marginal gains
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from topk.errors import ClassExhaustedError
from topk.model import Instance, ObjectiveBreakdown, PolicyParams, Selection


@dataclass(frozen=True)
class PrefixContribution:
    """R[i][j]: contribution of admitting the top j members of class i, j = 0..n_i"""

    rows: tuple[np.ndarray, ...]

    def __getitem__(self, i) -> np.ndarray:
        return self.rows[i]

    def __len__(self):
        return len(self.rows)

    def value(self, selection: Selection) -> float:
        """Sum of R[i][counts[i]] over all classes"""
        return float(sum(row[c] for row, c in zip(self.rows, selection.counts)))


def class_discrepancy(count, size, rate) -> float:
    return abs(count / size - rate)


def gain(utility, count, size, rate, tradeoff) -> float:
    """J delta of admitting the member at rank count (0-based) of a class of the given size"""
    return utility - tradeoff * (abs((count + 1) / size - rate) - abs(count / size - rate))


def gain_sequence(utilities, size, rate, tradeoff, length) -> np.ndarray:
    """Vectorized gain() for counts 0..length-1; element-wise identical to the scalar form"""
    counts = np.arange(length, dtype=np.float64)
    return utilities[:length] - tradeoff * (
        np.abs((counts + 1) / size - rate) - np.abs(counts / size - rate)
    )


def evaluate(instance: Instance, params: PolicyParams, selection: Selection) -> ObjectiveBreakdown:
    """Score a selection from scratch"""
    selection.check_feasible(instance)

    per_class_utility = []
    per_class_discrepancy = []
    for count, cls in zip(selection.counts, instance.classes):
        per_class_utility.append(float(cls.prefix[count]))
        per_class_discrepancy.append(class_discrepancy(count, cls.size, params.selection_rate))

    utility = float(sum(per_class_utility))
    discrepancy = float(sum(per_class_discrepancy))
    return ObjectiveBreakdown(
        total=utility - params.tradeoff * discrepancy,
        utility=utility,
        discrepancy=discrepancy,
        tradeoff=params.tradeoff,
        per_class_utility=tuple(per_class_utility),
        per_class_discrepancy=tuple(per_class_discrepancy),
    )


def prefix_table(instance: Instance, params: PolicyParams) -> PrefixContribution:
    """R[i][j] = sum of the top j utilities of class i - lambda * |j / n_i - p|"""
    rows = []
    for cls in instance.classes:
        j = np.arange(cls.size + 1, dtype=np.float64)
        row = cls.prefix - params.tradeoff * np.abs(j / cls.size - params.selection_rate)
        row.setflags(write=False)
        rows.append(row)
    return PrefixContribution(tuple(rows))


def marginal_gain(instance: Instance, params: PolicyParams, selection: Selection, class_index: int) -> float:
    """J(selection with one more from class_index) - J(selection)"""
    cls = instance.classes[class_index]
    count = selection.counts[class_index]
    if count >= cls.size:
        raise ClassExhaustedError(cls.label, cls.size)
    return gain(float(cls.utilities[count]), count, cls.size,
                params.selection_rate, params.tradeoff)
