"""Pseudo-labels for optimism.

Each round the MLE model is refit on the accepted buffer; the points it
rejects are, with probability epsilon each, added to a pseudo batch with
label 1 and weight W. A clone of the MLE model is trained on the focus set
plus the pseudo batch, and every point the optimistic clone scores >= 0 is
accepted. Pseudo labels never enter the buffer.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from loanbandit.config import Architecture, PlotConfig, TrainConfig
from loanbandit.exceptions import ParameterError, TheoryDomainError
from loanbandit.policies.base import (
    AcceptedBuffer,
    Policy,
    PolicyState,
    StepDecision,
    accept_all,
    as_batch,
)
from loanbandit.scorer import (
    LabeledDataset,
    ParamsSnapshot,
    ScorerParams,
    link,
    loss,
    score,
    train,
)

logger = logging.getLogger(__name__)


@dataclass
class PlotState(PolicyState):
    optimistic_params: ScorerParams | None = None


@dataclass(frozen=True)
class TheoryCounters:
    """A_t: past points in the ball B(x_t, R); D_pos: the positive ones."""

    A: int
    D_pos: int

    def __post_init__(self) -> None:
        if not 0 <= self.D_pos <= self.A:
            raise ParameterError(f"need 0 <= D_pos <= A, got D_pos={self.D_pos}, A={self.A}")


def pseudo_mask(base: ScorerParams, batch: np.ndarray, eps_draws) -> np.ndarray:
    draws = np.asarray(eps_draws, dtype=bool).reshape(-1)
    return (np.asarray(score(base, as_batch(batch))) < 0) & draws


def filter_pseudo_batch(base: ScorerParams, batch: np.ndarray, eps_draws) -> np.ndarray:
    """Points the base model rejects and whose epsilon draw came up 1."""
    batch = as_batch(batch)
    return batch[pseudo_mask(base, batch, eps_draws)]


def _within_radius(features: np.ndarray, centers: np.ndarray, radius: float) -> np.ndarray:
    sq = (
        np.sum(features**2, axis=1)[:, None]
        + np.sum(centers**2, axis=1)[None, :]
        - 2.0 * features @ centers.T
    )
    return np.maximum(sq, 0.0) <= radius**2


def focus_dataset(buffer: LabeledDataset, pseudo: np.ndarray, radius: float) -> LabeledDataset:
    """Buffer points within `radius` of at least one pseudo point; an
    infinite radius keeps the whole buffer."""
    if radius <= 0:
        raise ParameterError("radius must be positive")
    if math.isinf(radius):
        return buffer
    pseudo = np.asarray(pseudo, dtype=float).reshape(-1, buffer.dim)
    if len(pseudo) == 0 or len(buffer) == 0:
        return LabeledDataset.empty(buffer.dim)
    keep = _within_radius(buffer.features, pseudo, radius).any(axis=1)
    return buffer.subset(np.flatnonzero(keep))


def optimistic_dataset(focus: LabeledDataset, pseudo: np.ndarray, weight: float) -> LabeledDataset:
    if weight < 0:
        raise ParameterError("pseudo-label weight must be non-negative")
    pseudo = np.asarray(pseudo, dtype=float).reshape(-1, focus.dim)
    return focus.concat(LabeledDataset.pseudo(pseudo, weight))


def optimistic_loss(
    params: ScorerParams,
    focus: LabeledDataset,
    pseudo: np.ndarray,
    W: float,
    l2: float,
) -> float:
    """Cross-entropy on the focus set plus W * sum(-log mu(f(x))) over the
    pseudo points, plus (l2/2)||theta||^2."""
    return loss(params, optimistic_dataset(focus, pseudo, W), l2)


def weight_schedule_theory(t: int, tau: float, delta_prime: float, counters: TheoryCounters) -> float:
    if t < 2:
        raise TheoryDomainError(f"the weight schedule is defined for t >= 2, got t={t}")
    if not 0 < tau < 1 or not 0 < delta_prime < 1:
        raise TheoryDomainError("tau and delta_prime must lie in (0, 1)")
    first = 4.0 * math.sqrt(t * math.log(6.0 * t**2 * math.log(t) / delta_prime))
    mu = link(tau)
    second = ((mu / 2 + 0.25) * counters.A - counters.D_pos) / (0.75 - mu / 2)
    return max(first, second)


def radius_theory(tau: float, lipschitz: float) -> float:
    if tau <= 0 or lipschitz <= 0:
        raise ParameterError("tau and lipschitz must be positive")
    return tau**2 / (128.0 * lipschitz)


def theory_counters(buffer: LabeledDataset, x: np.ndarray, radius: float) -> TheoryCounters:
    if len(buffer) == 0:
        return TheoryCounters(0, 0)
    if math.isinf(radius):
        inside = np.ones(len(buffer), dtype=bool)
    else:
        inside = np.linalg.norm(buffer.features - np.asarray(x, dtype=float), axis=1) <= radius
    return TheoryCounters(int(inside.sum()), int((buffer.labels[inside] == 1).sum()))


def plot_step(
    state: PlotState, batch: np.ndarray, cfg: PlotConfig, train_cfg: TrainConfig
) -> StepDecision:
    batch = as_batch(batch)
    if state.t == 1:
        state.optimistic_params = state.base_params
        return accept_all(state, batch)

    data = state.buffer.data
    state.base_params = train(state.base_params, data, train_cfg, state.rng)
    base_scores = np.asarray(score(state.base_params, batch))

    draws = state.rng.random(len(batch)) < cfg.epsilon
    mask = (base_scores < 0) & draws
    if not mask.any():
        state.optimistic_params = state.base_params
        return StepDecision(
            accepts=base_scores >= 0,
            base_scores=base_scores,
            decision_scores=base_scores,
            pseudo_mask=mask,
        )

    radius = cfg.effective_radius
    pseudo = batch[mask]
    if cfg.weight_mode == "theory":
        counters = theory_counters(data, batch[0], radius)
        weight = weight_schedule_theory(state.t, cfg.tau, cfg.delta_prime, counters)
    else:
        weight = cfg.weight

    focus = focus_dataset(data, pseudo, radius)
    state.optimistic_params = train(
        state.base_params, optimistic_dataset(focus, pseudo, weight), train_cfg, state.rng
    )
    decision_scores = np.asarray(score(state.optimistic_params, batch))
    logger.debug(
        "optimistic refit",
        extra={"t": state.t, "pseudo": int(mask.sum()), "focus": len(focus), "weight": weight},
    )
    return StepDecision(
        accepts=decision_scores >= 0,
        base_scores=base_scores,
        decision_scores=decision_scores,
        pseudo_mask=mask,
        weight=weight,
    )


class PlotSnapshot(BaseModel):
    config: PlotConfig
    train: TrainConfig
    t: int
    buffer_features: list[list[float]]
    buffer_labels: list[float]
    base: ParamsSnapshot
    optimistic: ParamsSnapshot | None = None
    rng_state: dict[str, Any]


class PlotPolicy(Policy):
    name = "plot"

    def __init__(
        self,
        arch: Architecture,
        cfg: PlotConfig,
        train_cfg: TrainConfig,
        rng: np.random.Generator,
    ) -> None:
        self.cfg = cfg
        super().__init__(arch, train_cfg, rng)

    def _init_state(self, arch: Architecture, rng: np.random.Generator) -> PlotState:
        return PlotState(AcceptedBuffer(arch.input_dim), ScorerParams.init(arch, rng), rng)

    @property
    def params(self) -> ScorerParams:
        return self.state.optimistic_params or self.state.base_params

    def step(self, batch: np.ndarray) -> StepDecision:
        return plot_step(self.state, batch, self.cfg, self.train_cfg)

    def snapshot(self) -> PlotSnapshot:
        state = self.state
        return PlotSnapshot(
            config=self.cfg,
            train=self.train_cfg,
            t=state.t,
            buffer_features=state.buffer.data.features.tolist(),
            buffer_labels=state.buffer.data.labels.tolist(),
            base=state.base_params.snapshot(),
            optimistic=state.optimistic_params.snapshot() if state.optimistic_params else None,
            rng_state=state.rng.bit_generator.state,
        )

    @classmethod
    def restore(cls, snapshot: PlotSnapshot) -> "PlotPolicy":
        rng = np.random.default_rng()
        rng.bit_generator.state = snapshot.rng_state
        base = snapshot.base.restore()
        policy = cls(base.arch, snapshot.config, snapshot.train, rng)
        state = policy.state
        state.base_params = base
        state.optimistic_params = snapshot.optimistic.restore() if snapshot.optimistic else None
        state.t = snapshot.t
        if snapshot.buffer_labels:
            state.buffer.extend(np.asarray(snapshot.buffer_features), snapshot.buffer_labels)
        # construction consumed draws for the initial parameters
        rng.bit_generator.state = snapshot.rng_state
        return policy

    def save(self, path: Path) -> None:
        Path(path).write_text(self.snapshot().model_dump_json())

    @classmethod
    def load(cls, path: Path) -> "PlotPolicy":
        return cls.restore(PlotSnapshot.model_validate(json.loads(Path(path).read_text())))
