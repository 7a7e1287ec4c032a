"""
Experiment Harness for Fair Top-k
Lambda sweeps (single-track and separate-tracks), solver comparison and timing runs
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

import numpy as np

from topk.errors import InvalidParameterError, NoClassesRemainError, SpecError, ValidationError
from topk.ingestion import random_instance
from topk.model import Instance, PolicyParams, build_instance, filter_small_classes
from topk.solvers import SOLVERS, solve

logger = logging.getLogger(__name__)

# Sweep defaults
DEFAULT_RATES = (0.05, 0.15, 0.30, 0.50)  # admission rates p = k / n
DEFAULT_PARITY_THRESHOLD = 0.01  # stop once the parity metric drops below this
DEFAULT_LAMBDA_STEPS = 24  # grid tops out at unit * 2**24
PARITY_METRICS = ("mean", "total")  # D / |C| or D itself

# Separate tracks: smaller classes are dropped before sweeping
SEPARATE_TRACKS_MIN_CLASS_SIZE = 3

# Greedy gap search draws p and lambda from these
GAP_SEARCH_RATES = (0.25, 0.5)
GAP_SEARCH_TRADEOFFS = (0.0, 0.5, 1.0, 5.0, 100.0)


@dataclass(frozen=True)
class SweepConfig:
    """How to walk lambda from zero up to parity"""

    rates: tuple[float, ...] = DEFAULT_RATES
    lambda_steps: int = DEFAULT_LAMBDA_STEPS
    lambda_unit: Optional[float] = None
    lambda_grid: Optional[tuple[float, ...]] = None
    parity_threshold: float = DEFAULT_PARITY_THRESHOLD
    parity_metric: str = "mean"
    min_class_size: Optional[int] = None
    solver: str = "dp"

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if not self.rates or any(not (0.0 < r <= 1.0) for r in self.rates):
            raise SpecError(f"rates must lie in (0, 1], got {self.rates}")
        if not self.parity_threshold > 0:
            raise SpecError("parity threshold must be > 0")
        if self.parity_metric not in PARITY_METRICS:
            raise SpecError(f"parity metric must be one of {PARITY_METRICS}")
        if self.lambda_steps < 0:
            raise SpecError("lambda_steps must be >= 0")
        if self.lambda_unit is not None and not self.lambda_unit > 0:
            raise SpecError("lambda_unit must be > 0")
        if self.lambda_grid is not None:
            grid = tuple(float(x) for x in self.lambda_grid)
            if not grid or grid[0] != 0.0 or any(b <= a for a, b in zip(grid, grid[1:])):
                raise SpecError("an explicit lambda grid must start at 0 and strictly increase")
            object.__setattr__(self, "lambda_grid", grid)
        if self.min_class_size is not None and self.min_class_size < 1:
            raise SpecError("min_class_size must be >= 1")
        if self.solver not in SOLVERS:
            raise SpecError(f"unknown solver {self.solver!r}")

    def class_floor(self, separate_tracks=False) -> int:
        if self.min_class_size is not None:
            return self.min_class_size
        return SEPARATE_TRACKS_MIN_CLASS_SIZE if separate_tracks else 1


@dataclass(frozen=True)
class SweepResult:
    """One point of a trade-off curve"""

    tradeoff: float
    k: int
    objective: float
    total_utility: float
    avg_utility: float
    avg_utility_decrease: float
    discrepancy: float
    mean_discrepancy: float
    parity_reached: bool
    counts: tuple[int, ...]
    per_class_rate: tuple[float, ...]
    per_class_discrepancy: tuple[float, ...]


@dataclass
class SweepRun:
    """All points of one sweep plus what was filtered out"""

    rate: float
    labels: tuple[str, ...] = ()
    sizes: tuple[int, ...] = ()
    results: list[SweepResult] = field(default_factory=list)
    removed_classes: tuple[str, ...] = ()
    program_id: Optional[str] = None
    skipped_reason: Optional[str] = None

    def __iter__(self):
        return iter(self.results)

    def __len__(self):
        return len(self.results)

    @property
    def parity_reached(self) -> bool:
        return bool(self.results) and self.results[-1].parity_reached

    @property
    def parity_unreached(self) -> bool:
        return self.skipped_reason is None and not self.parity_reached

    @property
    def skipped(self) -> bool:
        return self.skipped_reason is not None

    @property
    def decrease_to_parity(self) -> Optional[float]:
        return self.results[-1].avg_utility_decrease if self.parity_reached else None


def lambda_grid(instance: Instance, params: PolicyParams, config: SweepConfig) -> tuple[float, ...]:
    """0 followed by unit * 2^m, m = 0..steps; unit = (top-k mean utility) / |C|"""
    if config.lambda_grid is not None:
        return config.lambda_grid
    unit = config.lambda_unit
    if unit is None:
        k = params.quota
        if k == 0:
            unit = 1.0
        else:
            counts = instance.top_k_counts(k)
            top_utility = sum(float(cls.prefix[c]) for cls, c in zip(instance.classes, counts))
            unit = (top_utility / k) / instance.num_classes
        unit = unit if unit > 0 else 1.0
    return (0.0, *(unit * 2.0 ** m for m in range(config.lambda_steps + 1)))


def _sweep(instance, config, rate, removed=(), program_id=None) -> SweepRun:
    params = PolicyParams.from_rate(rate, instance.total_candidates)
    run = SweepRun(rate=rate, labels=instance.labels, sizes=tuple(int(s) for s in instance.sizes),
                   removed_classes=removed, program_id=program_id)
    k = params.quota
    baseline = None
    for tradeoff in lambda_grid(instance, params, config):
        outcome = solve(instance, params.with_tradeoff(tradeoff), config.solver)
        b = outcome.breakdown
        avg_utility = b.utility / k if k else 0.0
        if baseline is None:
            baseline = avg_utility
        metric = b.mean_discrepancy if config.parity_metric == "mean" else b.discrepancy
        result = SweepResult(
            tradeoff=tradeoff,
            k=k,
            objective=b.total,
            total_utility=b.utility,
            avg_utility=avg_utility,
            avg_utility_decrease=baseline - avg_utility,
            discrepancy=b.discrepancy,
            mean_discrepancy=b.mean_discrepancy,
            parity_reached=metric < config.parity_threshold,
            counts=outcome.selection.counts,
            per_class_rate=tuple(float(r) for r in outcome.selection.rates(instance)),
            per_class_discrepancy=b.per_class_discrepancy,
        )
        run.results.append(result)
        logger.info("%sp=%.2f lambda=%g mean D=%.5f decrease=%.3f",
                    f"[{program_id}] " if program_id else "", rate, tradeoff,
                    result.mean_discrepancy, result.avg_utility_decrease)
        if result.parity_reached:
            break
    if not run.parity_reached:
        logger.warning("%sp=%.2f: parity not reached by lambda=%g",
                       f"[{program_id}] " if program_id else "", rate, run.results[-1].tradeoff)
    return run


def run_sweep(instance: Instance, config: SweepConfig, rate: Optional[float] = None) -> SweepRun:
    """Sweep lambda up the grid until the parity threshold is crossed (that point included)"""
    rate = config.rates[0] if rate is None else rate
    filtered, removed = filter_small_classes(instance, config.class_floor())
    return _sweep(filtered, config, rate, removed)


def run_single_track(instance: Instance, config: SweepConfig) -> dict[float, SweepRun]:
    """One sweep per configured rate, in configuration order"""
    return {rate: run_sweep(instance, config, rate) for rate in config.rates}


def run_separate_tracks(pools: Iterable, config: SweepConfig) -> dict[str, SweepRun]:
    """Independent sweep per (program id, instance, rate); pools left empty by the size filter are flagged"""
    runs = {}
    floor = config.class_floor(separate_tracks=True)
    for program_id, instance, rate in pools:
        try:
            filtered, removed = filter_small_classes(instance, floor)
        except NoClassesRemainError as e:
            logger.warning("[%s] skipped: %s", program_id, e)
            runs[program_id] = SweepRun(rate=rate, program_id=program_id, skipped_reason=str(e))
            continue
        runs[program_id] = _sweep(filtered, config, rate, removed, program_id)
    return runs


def choose_lambda(run: SweepRun, max_decrease: float) -> SweepResult:
    """Largest-lambda point whose average utility decrease stays within max_decrease"""
    if max_decrease < 0:
        raise InvalidParameterError("utility decrease budget must be >= 0")
    if not run.results:
        raise ValidationError("sweep has no results")
    eligible = [r for r in run.results if r.avg_utility_decrease <= max_decrease + 1e-12]
    return max(eligible, key=lambda r: r.tradeoff)


class ComparisonRow(NamedTuple):
    tradeoff: float
    dp_objective: float
    greedy_objective: float
    gap: float
    same_selection: bool


class SolverComparison(NamedTuple):
    rows: list[ComparisonRow]
    equality_rate: float


def compare_solvers(instance: Instance, config: SweepConfig, rate: float, tol: float = 1e-9) -> SolverComparison:
    """DP against merged greedy at every grid lambda"""
    filtered, _ = filter_small_classes(instance, config.class_floor())
    params = PolicyParams.from_rate(rate, filtered.total_candidates)
    rows = []
    for tradeoff in lambda_grid(filtered, params, config):
        point = params.with_tradeoff(tradeoff)
        dp = solve(filtered, point, "dp")
        greedy = solve(filtered, point, "greedy-merged")
        gap = dp.breakdown.total - greedy.breakdown.total
        rows.append(ComparisonRow(tradeoff, dp.breakdown.total, greedy.breakdown.total, gap,
                                  dp.selection == greedy.selection))
    equal = sum(1 for row in rows if row.gap <= tol * max(1.0, abs(row.dp_objective)))
    return SolverComparison(rows, equal / len(rows))


class EfficiencyRecord(NamedTuple):
    n: int
    k: int
    solver: str
    seconds: float
    op_count: int
    objective: float


def run_efficiency(instance: Instance, sizes, rate: float, tradeoff: float, seed: int = 0) -> list[EfficiencyRecord]:
    """Time DP and merged greedy on nested random sub-samples of increasing size"""
    population = list(instance.candidates())
    if any(n < 1 or n > len(population) for n in sizes):
        raise InvalidParameterError(f"sample sizes must lie in [1, {len(population)}]")
    order = np.random.default_rng(seed).permutation(len(population))
    records = []
    for n in sorted(sizes):
        sample = build_instance(population[i] for i in order[:n])
        params = PolicyParams.from_rate(rate, n, tradeoff)
        for solver in ("dp", "greedy-merged"):
            started = time.perf_counter()
            outcome = solve(sample, params, solver)
            seconds = time.perf_counter() - started
            ops = outcome.detail.cell_updates if solver == "dp" else outcome.detail
            records.append(EfficiencyRecord(n, params.quota, solver, seconds, ops,
                                            outcome.breakdown.total))
            logger.info("n=%d %s: %.4fs ops=%d", n, solver, seconds, ops)
    return records


class GapSearch(NamedTuple):
    instance: Optional[Instance]
    params: Optional[PolicyParams]
    dp_objective: float
    greedy_objective: float
    trials: int


def search_greedy_gap(trials: int, seed: int = 0, tol: float = 1e-9) -> GapSearch:
    """Random small instances until greedy falls short of DP, or trials run out"""
    rng = np.random.default_rng(seed)
    for trial in range(1, trials + 1):
        instance = random_instance(rng)
        rate = float(rng.choice(GAP_SEARCH_RATES))
        tradeoff = float(rng.choice(GAP_SEARCH_TRADEOFFS))
        params = PolicyParams.from_rate(rate, instance.total_candidates, tradeoff)
        dp = solve(instance, params, "dp").breakdown.total
        greedy = solve(instance, params, "greedy").breakdown.total
        if dp - greedy > tol * max(1.0, abs(dp)):
            logger.info("greedy gap %.6g found after %d trials", dp - greedy, trial)
            return GapSearch(instance, params, dp, greedy, trial)
    logger.info("no greedy gap in %d trials (seed %d)", trials, seed)
    return GapSearch(None, None, math.nan, math.nan, trials)
