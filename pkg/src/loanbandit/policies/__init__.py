import numpy as np

from loanbandit.config import Architecture, BaselineConfig, PlotConfig, TrainConfig
from loanbandit.policies.base import (
    AcceptedBuffer,
    Policy,
    PolicyState,
    StepDecision,
    record_outcomes,
)
from loanbandit.policies.baselines import (
    AcceptAllPolicy,
    EpsGreedyPolicy,
    GreedyPolicy,
    NeuralUcbPolicy,
    epsilon_schedule,
)
from loanbandit.policies.plot import PlotPolicy, PlotState, TheoryCounters


def build_policy(
    algo: PlotConfig | BaselineConfig,
    arch: Architecture,
    train_cfg: TrainConfig,
    rng: np.random.Generator,
) -> Policy:
    if isinstance(algo, PlotConfig):
        return PlotPolicy(arch, algo, train_cfg, rng)
    train_cfg = algo.train or train_cfg
    if algo.kind == "greedy":
        return GreedyPolicy(arch, train_cfg, rng)
    if algo.kind == "eps-greedy":
        return EpsGreedyPolicy(arch, algo, train_cfg, rng)
    if algo.kind == "neural-ucb":
        return NeuralUcbPolicy(arch, algo, train_cfg, rng)
    return AcceptAllPolicy(arch, train_cfg, rng)


__all__ = [
    "AcceptAllPolicy",
    "AcceptedBuffer",
    "EpsGreedyPolicy",
    "GreedyPolicy",
    "NeuralUcbPolicy",
    "PlotPolicy",
    "PlotState",
    "Policy",
    "PolicyState",
    "StepDecision",
    "TheoryCounters",
    "build_policy",
    "epsilon_schedule",
    "record_outcomes",
]
