"""Comparison policies: greedy, decayed epsilon-greedy, a diagonal
NeuralUCB surrogate and accept-all. All of them share the cold-start rule
and the MLE refit with PLOT; only the accept rule differs."""

import logging
from collections.abc import Sequence

import numpy as np

from loanbandit.config import Architecture, BaselineConfig, TrainConfig
from loanbandit.exceptions import ParameterError
from loanbandit.policies.base import (
    Policy,
    PolicyState,
    StepDecision,
    accept_all,
    as_batch,
)
from loanbandit.scorer import ScorerParams, score, score_gradients, train

logger = logging.getLogger(__name__)


def _refit(state: PolicyState, batch: np.ndarray, train_cfg: TrainConfig) -> np.ndarray:
    state.base_params = train(state.base_params, state.buffer.data, train_cfg, state.rng)
    return np.asarray(score(state.base_params, batch))


def greedy_step(state: PolicyState, batch: np.ndarray, train_cfg: TrainConfig) -> StepDecision:
    batch = as_batch(batch)
    if state.t == 1:
        return accept_all(state, batch)
    scores = _refit(state, batch, train_cfg)
    return StepDecision(
        accepts=scores >= 0,
        base_scores=scores,
        decision_scores=scores,
        pseudo_mask=np.zeros(len(batch), dtype=bool),
    )


def epsilon_schedule(t: float, eps0: float, eps_floor: float, horizon: int) -> float:
    """Exponential decay from eps0 at t=0 to eps_floor at t=horizon, then flat."""
    return max(eps_floor, eps0 * (eps_floor / eps0) ** (t / horizon))


def eps_greedy_step(
    state: PolicyState,
    batch: np.ndarray,
    t: int,
    cfg: BaselineConfig,
    train_cfg: TrainConfig,
) -> StepDecision:
    batch = as_batch(batch)
    if state.t == 1:
        return accept_all(state, batch)
    scores = _refit(state, batch, train_cfg)
    eps = epsilon_schedule(t, cfg.eps0, cfg.eps_floor, cfg.horizon)
    explore = state.rng.random(len(batch)) < eps
    return StepDecision(
        accepts=explore | (scores >= 0),
        base_scores=scores,
        decision_scores=scores,
        pseudo_mask=explore & (scores < 0),
    )


def ucb_bonus(params: ScorerParams, X: np.ndarray, design: np.ndarray, gamma: float) -> np.ndarray:
    """gamma * sqrt(sum_k g_k(x)^2 / Z_k) with g(x) the gradient of f at x."""
    if gamma < 0:
        raise ParameterError("gamma must be non-negative")
    G = score_gradients(params, X)
    return gamma * np.sqrt(np.sum(G**2 / design, axis=1))


def update_design(design: np.ndarray, params: ScorerParams, X: np.ndarray) -> np.ndarray:
    if len(X) == 0:
        return design
    return design + np.sum(score_gradients(params, X) ** 2, axis=0)


def neural_ucb_step(
    state: PolicyState,
    batch: np.ndarray,
    gamma: float,
    design: np.ndarray,
    train_cfg: TrainConfig,
) -> StepDecision:
    batch = as_batch(batch)
    if state.t == 1:
        return accept_all(state, batch)
    scores = _refit(state, batch, train_cfg)
    upper = scores + ucb_bonus(state.base_params, batch, design, gamma)
    return StepDecision(
        accepts=upper >= 0,
        base_scores=scores,
        decision_scores=upper,
        pseudo_mask=scores < 0,
    )


class GreedyPolicy(Policy):
    name = "greedy"

    def step(self, batch: np.ndarray) -> StepDecision:
        return greedy_step(self.state, batch, self.train_cfg)


class EpsGreedyPolicy(Policy):
    name = "eps-greedy"

    def __init__(
        self,
        arch: Architecture,
        cfg: BaselineConfig,
        train_cfg: TrainConfig,
        rng: np.random.Generator,
    ) -> None:
        self.cfg = cfg
        super().__init__(arch, train_cfg, rng)

    def step(self, batch: np.ndarray) -> StepDecision:
        return eps_greedy_step(self.state, batch, self.state.t, self.cfg, self.train_cfg)


class NeuralUcbPolicy(Policy):
    """Diagonal-design surrogate of NeuralUCB; results are labelled
    "neural-ucb-diag-surrogate"."""

    name = "neural-ucb-diag-surrogate"

    def __init__(
        self,
        arch: Architecture,
        cfg: BaselineConfig,
        train_cfg: TrainConfig,
        rng: np.random.Generator,
    ) -> None:
        self.cfg = cfg
        super().__init__(arch, train_cfg, rng)
        self.design = np.ones(arch.n_params)

    def step(self, batch: np.ndarray) -> StepDecision:
        return neural_ucb_step(self.state, batch, self.cfg.gamma, self.design, self.train_cfg)

    def record(self, batch: np.ndarray, accepts, labels: Sequence[int | None]) -> None:
        batch = as_batch(batch)
        accepted = batch[np.asarray(accepts, dtype=bool)]
        super().record(batch, accepts, labels)
        self.design = update_design(self.design, self.state.base_params, accepted)


class AcceptAllPolicy(Policy):
    name = "accept-all"

    def step(self, batch: np.ndarray) -> StepDecision:
        return accept_all(self.state, as_batch(batch))
