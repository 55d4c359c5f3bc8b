import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from confsurv.data import Dataset
from confsurv.errors import InvalidInput
from confsurv.kaplan_meier import km_curve_from_arrays, km_estimate


class TestFailureTarget:
    def test_all_events_equals_empirical_survival(self):
        d = Dataset([1.0, 2.0, 3.0], [True, True, True], np.empty((3, 0)))
        curve = km_estimate(d)
        assert_allclose(curve.value(np.array([1.0, 2.0, 3.0])), [2 / 3, 1 / 3, 0.0])

    def test_hand_product_limit_with_censoring(self, three_row_data):
        # S(1) = 1 - 1/3 = 2/3; the censored row leaves at 2; S(3) = 2/3 * 0
        curve = km_estimate(three_row_data)
        assert_allclose(curve.jump_times, [1.0, 3.0])
        assert_allclose(curve.value(np.array([1.0, 2.5, 3.0])), [2 / 3, 2 / 3, 0.0])

    def test_censored_subject_at_risk_at_tied_failure(self, tied_data):
        # At t=1 the risk set still contains the subject censored at 1.
        curve = km_estimate(tied_data)
        assert_allclose(curve.value(1.0), 2 / 3)
        assert_allclose(curve.value(2.0), 0.0)


class TestCensoringTarget:
    def test_hand_complemented_product_limit(self, three_row_data):
        curve = km_estimate(three_row_data, "censoring")
        assert_allclose(curve.jump_times, [2.0])
        assert curve.value(2.0) == 0.5
        assert curve.value(3.0) == 0.5

    def test_failures_leave_risk_set_first_at_ties(self, tied_data):
        # At t=1: one failure then one censoring among the remaining 2.
        curve = km_estimate(tied_data, "censoring")
        assert_allclose(curve.value(1.0), 0.5)

    def test_no_censoring_gives_unit_curve(self):
        d = Dataset([1.0, 2.0], [True, True], np.empty((2, 0)))
        curve = km_estimate(d, "censoring")
        assert curve.jump_times.size == 0
        assert curve.value(5.0) == 1.0


def test_unknown_target_rejected(three_row_data):
    with pytest.raises(InvalidInput):
        km_estimate(three_row_data, "something")


def test_empty_arrays_rejected():
    with pytest.raises(InvalidInput):
        km_curve_from_arrays(np.empty(0), np.empty(0, dtype=bool))


@given(st.data())
@settings(max_examples=80, deadline=None)
def test_jump_times_partition_by_indicator(data):
    n = data.draw(st.integers(1, 30))
    times = np.asarray(data.draw(st.lists(st.integers(1, 6), min_size=n, max_size=n)), dtype=float)
    events = np.asarray(data.draw(st.lists(st.booleans(), min_size=n, max_size=n)))
    failure = km_curve_from_arrays(times, events, "failure")
    censoring = km_curve_from_arrays(times, events, "censoring")
    assert set(failure.jump_times) == set(times[events])
    assert set(censoring.jump_times) == set(times[~events])
    assert set(failure.jump_times) | set(censoring.jump_times) == set(times)


@given(st.data())
@settings(max_examples=80, deadline=None)
def test_curves_stay_in_unit_interval_and_monotone(data):
    n = data.draw(st.integers(1, 40))
    times = np.asarray(data.draw(st.lists(st.floats(0.1, 50.0), min_size=n, max_size=n)))
    events = np.asarray(data.draw(st.lists(st.booleans(), min_size=n, max_size=n)))
    for target in ("failure", "censoring"):
        curve = km_curve_from_arrays(times, events, target)
        if curve.values.size:
            assert np.all(curve.values >= 0.0) and np.all(curve.values <= 1.0)
            assert np.all(np.diff(curve.values) <= 0)
