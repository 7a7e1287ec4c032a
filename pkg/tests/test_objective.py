import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import close, make_instance, problems
from topk.errors import ClassExhaustedError, InfeasibleSelectionError
from topk.model import PolicyParams, Selection
from topk.objective import evaluate, gain_sequence, marginal_gain, prefix_table
from topk.oracle import count_vectors


def test_worked_evaluation(worked_instance):
    params = PolicyParams(selection_rate=0.5, quota=2, tradeoff=1.0)
    breakdown = evaluate(worked_instance, params, Selection((2, 0)))
    assert breakdown.utility == 15.0
    assert breakdown.discrepancy == 1.0
    assert breakdown.total == 14.0
    assert breakdown.per_class_utility == (15.0, 0.0)
    assert breakdown.per_class_discrepancy == (0.5, 0.5)
    assert breakdown.mean_discrepancy == 0.5


def test_empty_selection():
    instance = make_instance([5.0], [4.0, 3.0], [1.0, 2.0, 3.0])
    params = PolicyParams(selection_rate=0.3, quota=0, tradeoff=2.0)
    breakdown = evaluate(instance, params, Selection((0, 0, 0)))
    assert breakdown.utility == 0.0
    assert breakdown.discrepancy == pytest.approx(3 * 0.3)
    assert breakdown.total == pytest.approx(-2.0 * 3 * 0.3)


def test_whole_class_admitted_closed_form():
    # one class of exactly k members, three classes in total
    instance = make_instance([9.0, 8.0], [1.0, 1.5, 2.0, 2.5], [3.0, 0.5, 0.25, 0.75, 0.1, 0.2])
    params = PolicyParams.from_quota(2, instance.total_candidates)
    p = params.selection_rate
    breakdown = evaluate(instance, params, Selection((2, 0, 0)))
    assert breakdown.discrepancy == pytest.approx((1 - p) + 2 * p, abs=1e-12)


def test_infeasible_selection_names_the_class(worked_instance, worked_params):
    with pytest.raises(InfeasibleSelectionError) as info:
        evaluate(worked_instance, worked_params, Selection((0, 3)))
    assert info.value.class_label == "c1"


def test_prefix_table_values():
    instance = make_instance([10.0, 5.0])
    params = PolicyParams(selection_rate=0.5, quota=1, tradeoff=2.0)
    assert list(prefix_table(instance, params)[0]) == [-1.0, 10.0, 14.0]


def test_prefix_table_limits(worked_instance):
    no_penalty = prefix_table(worked_instance, PolicyParams(selection_rate=0.5, quota=2, tradeoff=0.0))
    assert list(no_penalty[0]) == [0.0, 10.0, 15.0]
    full_rate = prefix_table(worked_instance, PolicyParams(selection_rate=1.0, quota=4, tradeoff=3.0))
    assert full_rate[1][2] == 7.0
    for row in prefix_table(worked_instance, PolicyParams(selection_rate=0.5, quota=2, tradeoff=3.0)).rows:
        assert row[0] == -1.5


@given(problems())
def test_prefix_table_consistent_with_evaluate(problem):
    instance, params = problem
    table = prefix_table(instance, params)
    for counts in count_vectors([cls.size for cls in instance.classes], params.quota):
        selection = Selection(counts)
        assert close(table.value(selection), evaluate(instance, params, selection).total)


@given(problems(), st.data())
def test_marginal_gains_telescope(problem, data):
    instance, params = problem
    selection = Selection.empty(instance.num_classes)
    start = evaluate(instance, params, selection).total
    accumulated = 0.0
    for _ in range(params.quota):
        open_classes = [i for i, cls in enumerate(instance.classes) if selection.counts[i] < cls.size]
        i = data.draw(st.sampled_from(open_classes))
        accumulated += marginal_gain(instance, params, selection, i)
        selection = selection.increment(i)
    assert close(start + accumulated, evaluate(instance, params, selection).total, 1e-7)


def test_marginal_gain_below_and_above_the_target_rate():
    instance = make_instance([10.0, 8.0, 6.0, 4.0])
    params = PolicyParams(selection_rate=0.5, quota=2, tradeoff=4.0)
    # 0/4 < p: discrepancy shrinks, gain = u + lambda / n
    assert marginal_gain(instance, params, Selection((0,)), 0) == pytest.approx(10.0 + 1.0)
    # 2/4 >= p: gain = u - lambda / n
    assert marginal_gain(instance, params, Selection((2,)), 0) == pytest.approx(6.0 - 1.0)
    assert marginal_gain(instance, params.with_tradeoff(0.0), Selection((1,)), 0) == 8.0


def test_marginal_gain_on_full_class(worked_instance, worked_params):
    with pytest.raises(ClassExhaustedError):
        marginal_gain(worked_instance, worked_params, Selection((2, 0)), 0)


@given(problems())
def test_gain_sequence_matches_scalar_gains(problem):
    instance, params = problem
    for i, cls in enumerate(instance.classes):
        sequence = gain_sequence(cls.utilities, cls.size, params.selection_rate, params.tradeoff, cls.size)
        for count in range(cls.size):
            counts = [0] * instance.num_classes
            counts[i] = count
            assert sequence[count] == marginal_gain(instance, params, Selection(tuple(counts)), i)


@given(problems())
def test_discrepancy_bounds(problem):
    instance, params = problem
    for counts in count_vectors([cls.size for cls in instance.classes], params.quota):
        breakdown = evaluate(instance, params, Selection(counts))
        assert 0.0 <= breakdown.discrepancy <= instance.num_classes
        assert close(breakdown.total, breakdown.utility - params.tradeoff * breakdown.discrepancy)
