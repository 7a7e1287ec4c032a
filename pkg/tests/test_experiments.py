import numpy as np
import pytest

from helpers import make_instance
from topk.errors import InvalidParameterError, SpecError
from topk.experiments import (
    DEFAULT_LAMBDA_STEPS,
    DEFAULT_PARITY_THRESHOLD,
    DEFAULT_RATES,
    SweepConfig,
    choose_lambda,
    compare_solvers,
    lambda_grid,
    run_efficiency,
    run_separate_tracks,
    run_single_track,
    run_sweep,
    search_greedy_gap,
)
from topk.ingestion import ClassSpec, Pool, SyntheticSpec, generate_synthetic
from topk.model import PolicyParams


@pytest.fixture
def pool():
    """Three classes of unequal strength; p * n_i is integral for p in {0.1, 0.3, 0.5}"""
    spec = SyntheticSpec((
        ClassSpec("H", 20, 760.0, 30.0),
        ClassSpec("M", 30, 720.0, 30.0),
        ClassSpec("L", 10, 680.0, 30.0),
    ), seed=42)
    return generate_synthetic(spec)


def test_lambda_grid_is_geometric_from_the_top_k_mean(worked_instance):
    params = PolicyParams(selection_rate=0.5, quota=2)
    grid = lambda_grid(worked_instance, params, SweepConfig(lambda_steps=3))
    unit = (15.0 / 2) / 2
    assert grid == (0.0, unit, 2 * unit, 4 * unit, 8 * unit)


def test_default_grid_tops_out_at_two_to_the_steps(worked_instance):
    params = PolicyParams(selection_rate=0.5, quota=0)
    config = SweepConfig()
    assert config.rates == DEFAULT_RATES
    assert config.parity_threshold == DEFAULT_PARITY_THRESHOLD
    grid = lambda_grid(worked_instance, params, config)
    assert len(grid) == DEFAULT_LAMBDA_STEPS + 2
    assert grid[-1] == 2.0 ** DEFAULT_LAMBDA_STEPS


def test_lambda_grid_overrides(worked_instance):
    params = PolicyParams(selection_rate=0.5, quota=0)
    assert lambda_grid(worked_instance, params, SweepConfig(lambda_steps=2)) == (0.0, 1.0, 2.0, 4.0)
    config = SweepConfig(lambda_grid=(0, 3, 9))
    assert lambda_grid(worked_instance, params, config) == (0.0, 3.0, 9.0)
    assert lambda_grid(worked_instance, params, SweepConfig(lambda_steps=1, lambda_unit=0.5)) == (0.0, 0.5, 1.0)


@pytest.mark.parametrize("kwargs", [
    dict(rates=(0.0,)),
    dict(rates=(1.2,)),
    dict(rates=()),
    dict(parity_threshold=0.0),
    dict(parity_metric="median"),
    dict(lambda_grid=(1.0, 2.0)),
    dict(lambda_grid=(0.0, 2.0, 2.0)),
    dict(min_class_size=0),
    dict(solver="simplex"),
])
def test_invalid_sweep_configs(kwargs):
    with pytest.raises(SpecError):
        SweepConfig(**kwargs)


def test_sweep_starts_at_baseline_and_stops_at_parity(pool):
    run = run_sweep(pool, SweepConfig(), rate=0.3)
    first, last = run.results[0], run.results[-1]
    assert first.tradeoff == 0.0
    assert first.avg_utility_decrease == 0.0
    assert first.counts == pool.top_k_counts(first.k)
    assert run.parity_reached
    assert last.mean_discrepancy < 0.01
    assert not any(r.parity_reached for r in run.results[:-1])


def test_sweep_is_monotone_along_the_grid(pool):
    for rate in (0.1, 0.3, 0.5):
        run = run_sweep(pool, SweepConfig(), rate=rate)
        for before, after in zip(run.results, run.results[1:]):
            assert after.discrepancy <= before.discrepancy + 1e-9
            assert after.total_utility <= before.total_utility + 1e-6
            assert after.avg_utility_decrease >= -1e-9


def test_parity_selection_is_within_one_of_the_rate(pool):
    run = run_sweep(pool, SweepConfig(), rate=0.3)
    last = run.results[-1]
    for count, size in zip(last.counts, run.sizes):
        assert abs(count - 0.3 * size) < 1.0


def test_threshold_of_one_stops_at_lambda_zero(pool):
    run = run_sweep(pool, SweepConfig(parity_threshold=1.0), rate=0.3)
    assert len(run) == 1
    assert run.parity_reached


def test_unreached_parity_is_flagged_not_raised(pool):
    run = run_sweep(pool, SweepConfig(lambda_steps=0, lambda_unit=1e-6), rate=0.3)
    assert len(run) == 2
    assert not run.parity_reached
    assert run.parity_unreached
    assert run.decrease_to_parity is None


def test_total_metric_is_stricter_than_mean(pool):
    mean = run_sweep(pool, SweepConfig(parity_threshold=0.03), rate=0.3)
    total = run_sweep(pool, SweepConfig(parity_threshold=0.03, parity_metric="total"), rate=0.3)
    assert len(total) >= len(mean)


def test_single_track_keeps_rate_order(pool):
    runs = run_single_track(pool, SweepConfig(rates=(0.5, 0.05)))
    assert list(runs) == [0.5, 0.05]
    assert runs[0.05].results[0].k == 3


def test_greedy_sweep_never_beats_dp(pool):
    dp = run_sweep(pool, SweepConfig(), rate=0.3)
    greedy = run_sweep(pool, SweepConfig(solver="greedy-merged"), rate=0.3)
    for a, b in zip(dp.results, greedy.results):
        assert b.objective <= a.objective + 1e-9


def test_separate_tracks_filter_and_skip():
    small = make_instance([700.0, 690.0, 680.0, 670.0], [650.0, 640.0], [600.0, 590.0, 580.0])
    tiny = make_instance([700.0], [690.0, 680.0])
    runs = run_separate_tracks([Pool("A", small, 0.5), Pool("B", tiny, 0.5), Pool("C", small, 0.5)],
                               SweepConfig())
    assert list(runs) == ["A", "B", "C"]
    assert runs["A"].labels == ("c0", "c2")
    assert runs["A"].removed_classes == ("c1",)
    assert runs["B"].skipped
    assert runs["B"].results == []
    assert runs["A"].results == runs["C"].results


def test_choose_lambda(pool):
    run = run_sweep(pool, SweepConfig(), rate=0.3)
    assert choose_lambda(run, 0.0).avg_utility_decrease <= 1e-12
    generous = choose_lambda(run, 1e9)
    assert generous is run.results[-1]
    budget = run.results[-1].avg_utility_decrease / 2
    chosen = choose_lambda(run, budget)
    assert chosen.avg_utility_decrease <= budget
    with pytest.raises(InvalidParameterError):
        choose_lambda(run, -1.0)


def test_compare_solvers(pool):
    comparison = compare_solvers(pool, SweepConfig(lambda_steps=10), rate=0.3)
    assert len(comparison.rows) == 12
    assert all(row.gap >= -1e-9 for row in comparison.rows)
    assert 0.0 <= comparison.equality_rate <= 1.0
    assert comparison.equality_rate > 0.9


def test_efficiency_records(pool):
    records = run_efficiency(pool, [40, 20], rate=0.25, tradeoff=5.0, seed=1)
    assert [(r.n, r.solver) for r in records] == [(20, "dp"), (20, "greedy-merged"),
                                                  (40, "dp"), (40, "greedy-merged")]
    assert records[0].k == 5
    assert all(r.seconds >= 0 for r in records)
    assert records[0].objective == pytest.approx(records[1].objective)
    with pytest.raises(InvalidParameterError):
        run_efficiency(pool, [61], rate=0.25, tradeoff=0.0)


def test_greedy_gap_search_reports_its_outcome():
    outcome = search_greedy_gap(200, seed=11)
    assert outcome.trials == 200
    assert outcome.instance is None
    assert np.isnan(outcome.dp_objective)
