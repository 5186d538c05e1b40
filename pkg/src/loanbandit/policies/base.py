import abc
import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from loanbandit.config import Architecture, TrainConfig
from loanbandit.exceptions import LabelConsistencyError, LengthMismatchError, ParameterError
from loanbandit.scorer import LabeledDataset, ScorerParams, score

logger = logging.getLogger(__name__)


class AcceptedBuffer:
    """D_t: accepted points with the labels the environment revealed.
    Multiset semantics; nothing is ever removed."""

    def __init__(self, dim: int) -> None:
        self._data = LabeledDataset.empty(dim)

    def __len__(self) -> int:
        return len(self._data)

    @property
    def dim(self) -> int:
        return self._data.dim

    @property
    def data(self) -> LabeledDataset:
        return self._data

    def extend(self, features: np.ndarray, labels: Sequence[float]) -> None:
        features = np.asarray(features, dtype=float).reshape(-1, self.dim)
        labels = np.asarray(labels, dtype=float).reshape(-1)
        if not np.all((labels == 0) | (labels == 1)):
            raise LabelConsistencyError("buffer labels must be 0 or 1")
        if len(labels):
            self._data = self._data.concat(LabeledDataset(features, labels))


@dataclass
class PolicyState:
    buffer: AcceptedBuffer
    base_params: ScorerParams
    rng: np.random.Generator
    t: int = 1


@dataclass(frozen=True, eq=False)
class StepDecision:
    """What a policy decided for one batch.

    `pseudo_mask` marks the points the policy acted on optimistically (the
    pseudo-labeled batch for PLOT, explored or bonus-lifted rejections for the
    baselines); the acceptance breakdown is computed over those points.
    """

    accepts: np.ndarray
    base_scores: np.ndarray
    decision_scores: np.ndarray
    pseudo_mask: np.ndarray
    weight: float | None = None


def accept_all(state: PolicyState, batch: np.ndarray) -> StepDecision:
    """The cold-start rule shared by every policy. Its decision scores are
    +inf: accepting everything is the sign rule of an unboundedly optimistic
    model."""
    base = np.asarray(score(state.base_params, batch))
    n = len(batch)
    return StepDecision(
        accepts=np.ones(n, dtype=bool),
        base_scores=base,
        decision_scores=np.full(n, np.inf),
        pseudo_mask=np.zeros(n, dtype=bool),
    )


def as_batch(batch) -> np.ndarray:
    batch = np.atleast_2d(np.asarray(batch, dtype=float))
    if len(batch) == 0:
        raise ParameterError("batch must not be empty")
    return batch


def record_outcomes(
    state: PolicyState,
    batch: np.ndarray,
    accepts,
    revealed: Sequence[int | None],
) -> None:
    """Append accepted (x, y) pairs to the buffer and advance t."""
    batch = as_batch(batch)
    accepts = np.asarray(accepts, dtype=bool).reshape(-1)
    if accepts.size != len(batch):
        raise LengthMismatchError(len(batch), accepts.size)
    if len(revealed) != len(batch):
        raise LengthMismatchError(len(batch), len(revealed))
    for j, (accepted, label) in enumerate(zip(accepts, revealed, strict=True)):
        if accepted and label is None:
            raise LabelConsistencyError(f"accepted point {j} has no revealed label")
        if not accepted and label is not None:
            raise LabelConsistencyError(f"rejected point {j} carries a label")
    state.buffer.extend(batch[accepts], [revealed[j] for j in np.flatnonzero(accepts)])
    state.t += 1


class Policy(abc.ABC):
    name: str = "policy"

    def __init__(
        self, arch: Architecture, train_cfg: TrainConfig, rng: np.random.Generator
    ) -> None:
        self.arch = arch
        self.train_cfg = train_cfg
        self.state = self._init_state(arch, rng)

    def _init_state(self, arch: Architecture, rng: np.random.Generator) -> PolicyState:
        return PolicyState(AcceptedBuffer(arch.input_dim), ScorerParams.init(arch, rng), rng)

    @property
    def t(self) -> int:
        return self.state.t

    @property
    def params(self) -> ScorerParams:
        """The parameters the policy's last decision was based on."""
        return self.state.base_params

    @abc.abstractmethod
    def step(self, batch: np.ndarray) -> StepDecision: ...

    def record(self, batch: np.ndarray, accepts, labels: Sequence[int | None]) -> None:
        record_outcomes(self.state, batch, accepts, labels)

    def warm_start(self, data: LabeledDataset) -> None:
        """Seed the buffer with labeled points. A seeded buffer replaces the
        accept-all first round."""
        self.state.buffer.extend(data.features, data.labels)
        if self.state.t == 1 and len(data):
            self.state.t = 2
        logger.debug(
            "warm-started policy buffer",
            extra={"policy": self.name, "points": len(data)},
        )
