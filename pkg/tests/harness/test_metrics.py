import math

import numpy as np
import pytest

from loanbandit.exceptions import ParameterError
from loanbandit.harness.metrics import (
    Breakdown,
    DecisionRecord,
    acceptance_breakdown,
    breakdown_series,
    regret_slope,
    step_counts,
)


def _record(t, accepted, true_label, pseudo=True):
    label = true_label if accepted else None
    reward = (2.0 * true_label - 1.0) if accepted else 0.0
    return DecisionRecord(t, 0, accepted, label, reward, pseudo, true_label)


def test_breakdown_counts_only_pseudo_points():
    records = [
        _record(1, True, 1),
        _record(1, False, 1),
        _record(2, True, 0),
        _record(2, False, 0),
        _record(2, False, 0),
        _record(2, True, 0, pseudo=False),
    ]
    breakdown = acceptance_breakdown(records)
    assert breakdown.p_pos == 0.5
    assert breakdown.p_neg == pytest.approx(1 / 3)
    assert breakdown.ratio == pytest.approx(1.5)


def test_breakdown_undefined_without_pseudo_points():
    assert acceptance_breakdown([_record(1, True, 1, pseudo=False)]) == Breakdown(None, None)
    assert Breakdown(0.5, 0.0).ratio is None


def test_breakdown_series_cumulative_and_windowed():
    records = [_record(1, True, 1), _record(2, False, 1), _record(3, False, 1), _record(3, True, 0)]
    counts = step_counts(records, 4)
    np.testing.assert_array_equal(counts[2], [1, 0, 1, 1])
    p_pos, p_neg = breakdown_series(counts)
    np.testing.assert_allclose(p_pos, [1.0, 0.5, 1 / 3, 1 / 3])
    assert math.isnan(p_neg[0])
    assert p_neg[3] == 1.0
    w_pos, _ = breakdown_series(counts, window=1)
    np.testing.assert_allclose(w_pos[:3], [1.0, 0.0, 0.0])
    assert math.isnan(w_pos[3])


def test_regret_slope():
    cumulative = np.array([0.0, 1.0, 2.0, 2.5, 3.0])
    assert regret_slope(cumulative, 2) == pytest.approx(0.5)
    assert regret_slope(cumulative, 10) == pytest.approx(3.0 / 5)


@pytest.mark.parametrize("window", [0, -3])
def test_window_must_be_positive(window):
    with pytest.raises(ParameterError):
        regret_slope(np.array([0.0, 1.0, 2.0]), window)
    with pytest.raises(ParameterError):
        breakdown_series(np.zeros((3, 4), dtype=np.int64), window)
