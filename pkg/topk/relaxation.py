"""
Linear Relaxation Solver for Fair Top-k
Continuous relaxation solved as a separable concave allocation, then rounded
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

from topk.errors import ValidationError
from topk.model import Instance, IntersectionalClass, ObjectiveBreakdown, PolicyParams, Selection
from topk.objective import evaluate, marginal_gain

logger = logging.getLogger(__name__)

EPSILON = 1e-9
KKT_TOLERANCE = 1e-7


@dataclass(frozen=True)
class FractionalSelection:
    """amounts[i] = admitted mass t_i in [0, n_i]; value is the relaxed objective"""

    amounts: tuple[float, ...]
    value: float

    @property
    def total(self) -> float:
        return math.fsum(self.amounts)

    def fractional_classes(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.amounts) if abs(a - round(a)) > EPSILON)


class Segment(NamedTuple):
    start: float
    end: float
    slope: float


class RoundedSolution(NamedTuple):
    selection: Selection
    breakdown: ObjectiveBreakdown
    gap: float


class KktReport(NamedTuple):
    multiplier_low: float
    multiplier_high: float
    satisfied: bool


class LpSolution(NamedTuple):
    selection: Selection
    breakdown: ObjectiveBreakdown
    fractional: FractionalSelection
    gap: float


def class_segments(cls: IntersectionalClass, params: PolicyParams) -> list[Segment]:
    """Linear pieces of g(t) = P(t) - lambda |t/n - p| between consecutive breakpoints

    Breakpoints are the integers 0..n plus the kink p*n. Slopes are non-increasing.
    """
    size = cls.size
    kink = params.selection_rate * size
    step = params.tradeoff / size
    segments = []
    for rank in range(size):
        utility = float(cls.utilities[rank])
        lo, hi = float(rank), float(rank + 1)
        if params.tradeoff == 0 or hi <= kink:
            segments.append(Segment(lo, hi, utility + step))
        elif lo >= kink:
            segments.append(Segment(lo, hi, utility - step))
        else:
            segments.append(Segment(lo, kink, utility + step))
            segments.append(Segment(kink, hi, utility - step))
    return segments


def relaxed_contribution(cls: IntersectionalClass, params: PolicyParams, amount: float) -> float:
    """g(t): interpolated utility prefix minus the discrepancy penalty"""
    whole = min(int(math.floor(amount + EPSILON)), cls.size)
    utility = float(cls.prefix[whole])
    if whole < cls.size:
        utility += max(amount - whole, 0.0) * float(cls.utilities[whole])
    return utility - params.tradeoff * abs(amount / cls.size - params.selection_rate)


def relaxed_value(instance: Instance, params: PolicyParams, amounts) -> float:
    return math.fsum(relaxed_contribution(cls, params, a)
                     for cls, a in zip(instance.classes, amounts))


def solve_lp_relaxation(instance: Instance, params: PolicyParams) -> FractionalSelection:
    """Fill the budget k with the steepest remaining segment of any class"""
    params.check_against(instance)
    segments = [class_segments(cls, params) for cls in instance.classes]
    amounts = [0.0] * instance.num_classes
    remaining = float(params.quota)

    # (-slope, class index, segment index)
    frontier = [(-segs[0].slope, i, 0) for i, segs in enumerate(segments)]
    heapq.heapify(frontier)
    extended = 0
    while remaining > EPSILON and frontier:
        _, i, s = heapq.heappop(frontier)
        segment = segments[i][s]
        length = segment.end - segment.start
        extended += 1
        if length <= remaining + EPSILON:
            amounts[i] = segment.end
            remaining -= length
            if s + 1 < len(segments[i]):
                heapq.heappush(frontier, (-segments[i][s + 1].slope, i, s + 1))
        else:
            amounts[i] = segment.start + remaining
            remaining = 0.0

    value = relaxed_value(instance, params, amounts)
    logger.debug("lp relaxation: %d segments extended, relaxed J=%.6f", extended, value)
    return FractionalSelection(tuple(amounts), value)


def _derivatives(segments, amount):
    """(left, right) derivative of g at amount; +inf / -inf at the domain ends"""
    left = math.inf
    right = -math.inf
    for segment in segments:
        if segment.start < amount - EPSILON:
            left = segment.slope
        if segment.end > amount + EPSILON and right == -math.inf:
            right = segment.slope
    return left, right


def check_kkt(instance: Instance, params: PolicyParams, fractional: FractionalSelection,
              tol: float = KKT_TOLERANCE) -> KktReport:
    """Optimality certificate: one multiplier mu with right_i <= mu <= left_i for every class"""
    multiplier_low = -math.inf
    multiplier_high = math.inf
    for cls, amount in zip(instance.classes, fractional.amounts):
        left, right = _derivatives(class_segments(cls, params), amount)
        multiplier_low = max(multiplier_low, right)
        multiplier_high = min(multiplier_high, left)
    satisfied = multiplier_low <= multiplier_high + tol
    return KktReport(multiplier_low, multiplier_high, satisfied)


def round_lp(fractional: FractionalSelection, instance: Instance, params: PolicyParams) -> RoundedSolution:
    """Floor every amount, then hand the leftover budget to the largest fractional parts"""
    if abs(fractional.total - params.quota) > 1e-6:
        raise ValidationError(
            f"fractional selection sums to {fractional.total}, quota is {params.quota}"
        )
    floors = []
    parts = []
    for cls, amount in zip(instance.classes, fractional.amounts):
        whole = min(int(math.floor(amount + EPSILON)), cls.size)
        floors.append(whole)
        parts.append(max(amount - whole, 0.0) if amount - whole > EPSILON else 0.0)

    remaining = params.quota - sum(floors)
    if remaining > 0:
        base = Selection(tuple(floors))
        open_classes = [i for i, cls in enumerate(instance.classes) if floors[i] < cls.size]
        # largest fractional part, then larger marginal gain, then lowest index
        open_classes.sort(key=lambda i: (-parts[i], -marginal_gain(instance, params, base, i), i))
        for i in open_classes[:remaining]:
            floors[i] += 1

    selection = Selection(tuple(floors))
    breakdown = evaluate(instance, params, selection)
    return RoundedSolution(selection, breakdown, fractional.value - breakdown.total)


def solve_lp(instance: Instance, params: PolicyParams) -> LpSolution:
    """Relaxation followed by rounding"""
    fractional = solve_lp_relaxation(instance, params)
    rounded = round_lp(fractional, instance, params)
    logger.debug("lp rounding: gap=%.6g", rounded.gap)
    return LpSolution(rounded.selection, rounded.breakdown, fractional, rounded.gap)
