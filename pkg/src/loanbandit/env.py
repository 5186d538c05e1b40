"""The bank loan problem environment.

Contexts come from a `Stream`; each batch's labels are drawn when the batch
is served and kept hidden. `act` reveals a label only for accepted points.
The harness, never a policy, may read the hidden labels of the current batch
through `BLPEnvironment.evaluation`.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Literal, NamedTuple, Protocol

import numpy as np

from loanbandit.exceptions import (
    LengthMismatchError,
    ParameterError,
    StreamExhaustedError,
)
from loanbandit.scorer import LabeledDataset, ScorerParams, link, score

logger = logging.getLogger(__name__)


class Stream(Protocol):
    dim: int
    theta_star: ScorerParams | None

    def draw(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Return `n` contexts and their (hidden) labels."""
        ...


class TableStream:
    """Finite labeled table, shuffled once with the stream's PRNG.

    cycle="replacement" draws rows uniformly with replacement, "reshuffle"
    walks the shuffled order and reshuffles when it runs out, "none" raises
    StreamExhaustedError instead.
    """

    theta_star = None

    def __init__(
        self,
        data: LabeledDataset,
        rng: np.random.Generator,
        cycle: Literal["replacement", "reshuffle", "none"] = "replacement",
    ) -> None:
        if len(data) == 0:
            raise ParameterError("cannot stream from an empty table")
        self.data = data
        self.rng = rng
        self.cycle = cycle
        self.dim = data.dim
        self._order = rng.permutation(len(data))
        self._pos = 0

    @property
    def remaining(self) -> int:
        return len(self._order) - self._pos

    def draw(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        if self.cycle == "replacement":
            index = self.rng.integers(0, len(self.data), size=n)
        else:
            if self.cycle == "none" and self.remaining < n:
                raise StreamExhaustedError(
                    f"requested {n} rows but only {self.remaining} remain"
                )
            parts = []
            need = n
            while need > 0:
                if self.remaining == 0:
                    self._order = self.rng.permutation(len(self.data))
                    self._pos = 0
                take = self._order[self._pos : self._pos + need]
                self._pos += take.size
                need -= take.size
                parts.append(take)
            index = np.concatenate(parts)
        return self.data.features[index], self.data.labels[index]


class OracleStream:
    """Contexts from a sampler, labels ~ Bernoulli(link(f*(x)))."""

    def __init__(
        self,
        sampler: Callable[[int, np.random.Generator], np.ndarray],
        theta_star: ScorerParams,
        rng: np.random.Generator,
    ) -> None:
        self.sampler = sampler
        self.theta_star = theta_star
        self.rng = rng
        self.dim = theta_star.arch.input_dim

    def draw(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        X = self.sampler(n, self.rng)
        y = (self.rng.random(n) < link(score(self.theta_star, X))).astype(float)
        return X, y


class LabeledSampleStream:
    """Generator whose samples carry their own labels (e.g. XOR clusters)."""

    theta_star = None

    def __init__(
        self,
        sampler: Callable[[int, np.random.Generator], tuple[np.ndarray, np.ndarray]],
        dim: int,
        rng: np.random.Generator,
    ) -> None:
        self.sampler = sampler
        self.dim = dim
        self.rng = rng

    def draw(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        return self.sampler(n, self.rng)


class Outcome(NamedTuple):
    reward: float
    label: int | None


class EvaluationChannel:
    """Read-only view of the current batch's true labels, for metrics."""

    def __init__(self, env: "BLPEnvironment") -> None:
        self._env = env

    def labels(self) -> np.ndarray:
        if self._env._hidden is None:
            raise ParameterError("no batch has been served yet")
        return self._env._hidden.copy()


class BLPEnvironment:
    def __init__(self, stream: Stream) -> None:
        self.stream = stream
        self.revealed_count = 0
        self._batch: np.ndarray | None = None
        self._hidden: np.ndarray | None = None
        self._acted = True
        self.evaluation = EvaluationChannel(self)

    @property
    def dim(self) -> int:
        return self.stream.dim

    @property
    def theta_star(self) -> ScorerParams | None:
        return self.stream.theta_star

    def next_batch(self, batch_size: int) -> np.ndarray:
        if batch_size < 1:
            raise ParameterError("batch_size must be at least 1")
        X, y = self.stream.draw(batch_size)
        self._batch = np.asarray(X, dtype=float)
        self._hidden = np.asarray(y, dtype=float)
        self._acted = False
        return self._batch.copy()

    def act(self, batch: np.ndarray, accepts) -> list[Outcome]:
        """Rewards 2y-1 for accepted points and 0 for rejected ones; only
        accepted points get their label back."""
        accepts = np.asarray(accepts, dtype=bool).reshape(-1)
        batch = np.asarray(batch, dtype=float)
        if accepts.size != len(batch):
            raise LengthMismatchError(len(batch), accepts.size)
        if self._batch is None or self._acted:
            raise ParameterError("act must follow exactly one next_batch call")
        if not np.array_equal(batch, self._batch):
            raise ParameterError("act was called with a batch that was not served")
        self._acted = True

        outcomes = []
        for accepted, y in zip(accepts, self._hidden, strict=True):
            if accepted:
                outcomes.append(Outcome(2.0 * y - 1.0, int(y)))
            else:
                outcomes.append(Outcome(0.0, None))
        self.revealed_count += int(accepts.sum())
        return outcomes


def pseudo_regret_increments(theta_star: ScorerParams, X: np.ndarray, accepts) -> np.ndarray:
    gain = 2.0 * np.asarray(link(score(theta_star, np.atleast_2d(X)))) - 1.0
    accepts = np.asarray(accepts, dtype=bool).reshape(-1)
    return np.maximum(0.0, gain) - np.where(accepts, gain, 0.0)


def pseudo_regret_increment(theta_star: ScorerParams, x: np.ndarray, accepted: bool) -> float:
    """max(0, 2mu(f*(x)) - 1) - a * (2mu(f*(x)) - 1); never negative."""
    return float(pseudo_regret_increments(theta_star, x, [accepted])[0])


def baseline_regret_increments(
    baseline: ScorerParams, X: np.ndarray, labels, accepts
) -> np.ndarray:
    reward = 2.0 * np.asarray(labels, dtype=float).reshape(-1) - 1.0
    baseline_accepts = np.asarray(score(baseline, np.atleast_2d(X))) >= 0
    accepts = np.asarray(accepts, dtype=bool).reshape(-1)
    gap = np.where(baseline_accepts, reward, 0.0) - np.where(accepts, reward, 0.0)
    return np.maximum(0.0, gap)


def baseline_regret_increment(
    baseline: ScorerParams, x: np.ndarray, y: int, accepted: bool
) -> float:
    """Reward the baseline's decision earns on (x, y) minus the reward earned,
    floored at 0."""
    return float(baseline_regret_increments(baseline, x, [y], [accepted])[0])


@dataclass
class RegretLedger:
    """Per-time-step regret (summed over the batch) and reward bookkeeping."""

    mode: Literal["oracle", "baseline"]
    per_step: list[float] = field(default_factory=list)
    cumulative: float = 0.0
    realized_reward: float = 0.0
    expected_reward: float = 0.0
    optimal_reward: float = 0.0

    def _add(self, increment: float) -> float:
        if self.mode == "oracle" and increment < 0:
            raise ParameterError(f"negative oracle regret increment {increment}")
        self.per_step.append(increment)
        self.cumulative += increment
        return increment

    def record_oracle(self, theta_star: ScorerParams, X: np.ndarray, accepts) -> float:
        if self.mode != "oracle":
            raise ParameterError("oracle regret needs an oracle-mode ledger")
        accepts = np.asarray(accepts, dtype=bool).reshape(-1)
        gain = 2.0 * np.asarray(link(score(theta_star, np.atleast_2d(X)))) - 1.0
        self.expected_reward += float(np.where(accepts, gain, 0.0).sum())
        self.optimal_reward += float(np.maximum(0.0, gain).sum())
        return self._add(float(pseudo_regret_increments(theta_star, X, accepts).sum()))

    def record_baseline(
        self, baseline: ScorerParams, X: np.ndarray, labels, accepts
    ) -> float:
        if self.mode != "baseline":
            raise ParameterError("baseline regret needs a baseline-mode ledger")
        return self._add(float(baseline_regret_increments(baseline, X, labels, accepts).sum()))

    def record_rewards(self, outcomes: list[Outcome]) -> float:
        reward = float(sum(o.reward for o in outcomes))
        self.realized_reward += reward
        return reward
