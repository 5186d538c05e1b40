from collections.abc import Iterable
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from loanbandit.exceptions import ParameterError


@dataclass(frozen=True, slots=True)
class DecisionRecord:
    """One decided point. `true_label` comes from the evaluation channel and
    is never shown to the policy; `label` is what the policy saw.

    `model_score` is the score the decision was taken on; `oracle_score` is
    f*(x), known only in oracle mode.
    """

    t: int
    index: int
    accepted: bool
    label: int | None
    reward: float
    pseudo: bool
    true_label: int
    model_score: float | None = None
    oracle_score: float | None = None


class Breakdown(NamedTuple):
    p_pos: float | None
    p_neg: float | None

    @property
    def ratio(self) -> float | None:
        if self.p_pos is None or self.p_neg is None or self.p_neg == 0:
            return None
        return self.p_pos / self.p_neg


def _rate(accepted: float, total: float) -> float | None:
    return accepted / total if total else None


def acceptance_breakdown(records: Iterable[DecisionRecord]) -> Breakdown:
    """Acceptance rates of true positives and true negatives among the
    points the policy acted on optimistically; None where no such point
    exists."""
    pos = pos_acc = neg = neg_acc = 0
    for record in records:
        if not record.pseudo:
            continue
        if record.true_label == 1:
            pos += 1
            pos_acc += record.accepted
        else:
            neg += 1
            neg_acc += record.accepted
    return Breakdown(_rate(pos_acc, pos), _rate(neg_acc, neg))


def step_counts(records: Iterable[DecisionRecord], T: int) -> np.ndarray:
    """(T, 4) array of per-step [positives, accepted positives, negatives,
    accepted negatives] over pseudo points."""
    counts = np.zeros((T, 4), dtype=np.int64)
    for record in records:
        if not record.pseudo:
            continue
        row = counts[record.t - 1]
        if record.true_label == 1:
            row[0] += 1
            row[1] += record.accepted
        else:
            row[2] += 1
            row[3] += record.accepted
    return counts


def _series(accepted: np.ndarray, total: np.ndarray) -> np.ndarray:
    out = np.full(total.shape, np.nan)
    np.divide(accepted, total, out=out, where=total > 0)
    return out


def breakdown_series(counts: np.ndarray, window: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative (window=None) or trailing-window acceptance rates per step;
    NaN where undefined."""
    if window is not None and window < 1:
        raise ParameterError(f"window must be at least 1, got {window}")
    totals = np.cumsum(counts, axis=0)
    if window is not None:
        shifted = np.zeros_like(totals)
        shifted[window:] = totals[:-window]
        totals = totals - shifted
    return _series(totals[:, 1], totals[:, 0]), _series(totals[:, 3], totals[:, 2])


def regret_slope(cumulative_regret, window: int) -> float:
    """Average per-step regret over the last `window` steps."""
    if window < 1:
        raise ParameterError(f"window must be at least 1, got {window}")
    cumulative = np.asarray(cumulative_regret, dtype=float)
    if window >= len(cumulative):
        return float(cumulative[-1] / len(cumulative))
    return float((cumulative[-1] - cumulative[-1 - window]) / window)
