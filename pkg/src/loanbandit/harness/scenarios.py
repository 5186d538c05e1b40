"""The trap scenario: a positive cluster whose first labels were all bad.

Contexts are 1-d. With probability `trap_prob` a context comes from the
positive cluster around +center, otherwise from the negative cluster around
-center; f*(x) = slope * x. The learner starts with `planted` points of the
positive cluster labelled 0, so a greedy learner rejects that cluster and
never sees the labels that would correct it.
"""

import numpy as np

from loanbandit.config import Architecture, TrapScenario
from loanbandit.env import OracleStream
from loanbandit.scorer import LabeledDataset, ScorerParams


def trap_theta_star(scenario: TrapScenario) -> ScorerParams:
    return ScorerParams(Architecture.linear(1, bias=False), np.array([scenario.slope]))


def trap_contexts(scenario: TrapScenario, n: int, rng: np.random.Generator) -> np.ndarray:
    trap = rng.random(n) < scenario.trap_prob
    centers = np.where(trap, scenario.center, -scenario.center)
    return (centers + scenario.spread * rng.standard_normal(n))[:, None]


def trap_stream(scenario: TrapScenario, seed: int) -> OracleStream:
    return OracleStream(
        lambda n, rng: trap_contexts(scenario, n, rng),
        trap_theta_star(scenario),
        np.random.default_rng(seed),
    )


def planted_negatives(scenario: TrapScenario, rng: np.random.Generator) -> LabeledDataset:
    """`planted` points of the positive cluster, all labelled 0."""
    points = scenario.center + scenario.spread * rng.standard_normal(scenario.planted)
    return LabeledDataset(points[:, None], np.zeros(scenario.planted))
