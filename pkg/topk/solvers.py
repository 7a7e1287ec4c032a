"""
Solver Registry for Fair Top-k
Maps solver names to implementations with one calling convention
"""

from __future__ import annotations

import logging
from typing import Callable, NamedTuple

from topk.dynamic import solve_dp
from topk.errors import InvalidParameterError
from topk.greedy import solve_greedy_merged, solve_greedy_naive
from topk.model import Instance, ObjectiveBreakdown, PolicyParams, Selection
from topk.relaxation import solve_lp

logger = logging.getLogger(__name__)


class SolveOutcome(NamedTuple):
    solver: str
    selection: Selection
    breakdown: ObjectiveBreakdown
    detail: object


def _dp(instance, params):
    solution = solve_dp(instance, params)
    return solution.selection, solution.breakdown, solution.table


def _greedy(instance, params):
    solution = solve_greedy_naive(instance, params)
    return solution.selection, solution.breakdown, solution.op_count


def _greedy_merged(instance, params):
    solution = solve_greedy_merged(instance, params)
    return solution.selection, solution.breakdown, solution.op_count


def _lp(instance, params):
    solution = solve_lp(instance, params)
    return solution.selection, solution.breakdown, solution


SOLVERS: dict[str, Callable] = {
    "dp": _dp,
    "greedy": _greedy,
    "greedy-merged": _greedy_merged,
    "lp": _lp,
}


def solve(instance: Instance, params: PolicyParams, solver: str = "dp") -> SolveOutcome:
    """Run the named solver; detail is the DP table, the greedy op count or the LP solution"""
    try:
        run = SOLVERS[solver]
    except KeyError:
        raise InvalidParameterError(
            f"unknown solver {solver!r} (choose from {', '.join(SOLVERS)})"
        ) from None
    selection, breakdown, detail = run(instance, params)
    logger.debug("%s: k=%d lambda=%g J=%.4f D=%.4f",
                 solver, params.quota, params.tradeoff, breakdown.total, breakdown.discrepancy)
    return SolveOutcome(solver, selection, breakdown, detail)
