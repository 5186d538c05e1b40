import numpy as np
import pytest

from loanbandit.config import Architecture, BaselineConfig, ExperimentConfig, TrainConfig, build
from loanbandit.exceptions import ConfigError, ParameterError
from loanbandit.policies import (
    AcceptAllPolicy,
    EpsGreedyPolicy,
    GreedyPolicy,
    NeuralUcbPolicy,
    build_policy,
    epsilon_schedule,
)
from loanbandit.policies.baselines import ucb_bonus, update_design
from loanbandit.scorer import LabeledDataset, ScorerParams

ARCH = Architecture.linear(1)
NEWTON = TrainConfig(optimizer="newton", steps=30, l2_lambda=1e-2)
WARM = LabeledDataset(np.array([[1.0], [1.5], [-1.0], [-1.5]]), np.array([1.0, 1.0, 0.0, 0.0]))


def _rng():
    return np.random.default_rng(0)


def test_epsilon_schedule_endpoints():
    assert epsilon_schedule(0, 0.1, 0.001, 2000) == pytest.approx(0.1)
    assert epsilon_schedule(2000, 0.1, 0.001, 2000) == pytest.approx(0.001)
    assert epsilon_schedule(10**6, 0.1, 0.001, 2000) == 0.001
    assert epsilon_schedule(1000, 0.1, 0.001, 2000) == pytest.approx(0.01)


def test_baseline_config_validation():
    with pytest.raises(ValueError):
        BaselineConfig(kind="eps-greedy", eps0=0.01, eps_floor=0.1)
    with pytest.raises(ValueError):
        BaselineConfig(kind="neural-ucb", gamma=0.0)


def test_greedy_cold_start_then_threshold():
    policy = GreedyPolicy(ARCH, NEWTON, _rng())
    assert policy.step(np.array([[-5.0], [5.0]])).accepts.all()
    policy.record(np.array([[-5.0], [5.0]]), [True, True], [0, 1])
    policy.warm_start(WARM)
    decision = policy.step(np.array([[-2.0], [-0.5], [0.5], [2.0]]))
    np.testing.assert_array_equal(decision.accepts, [False, False, True, True])
    assert not decision.pseudo_mask.any()


def test_greedy_all_negative_accepts_none():
    policy = GreedyPolicy(ARCH, NEWTON, _rng())
    policy.warm_start(WARM)
    assert not policy.step(np.array([[-3.0], [-2.0]])).accepts.any()


def test_eps_greedy_with_unit_epsilon_accepts_everything():
    cfg = BaselineConfig(kind="eps-greedy", eps0=1.0, eps_floor=1.0)
    policy = EpsGreedyPolicy(ARCH, cfg, NEWTON, _rng())
    policy.warm_start(WARM)
    decision = policy.step(np.array([[-3.0], [-2.0], [1.0]]))
    assert decision.accepts.all()
    np.testing.assert_array_equal(decision.pseudo_mask, [True, True, False])


def test_eps_greedy_floor_behaves_like_greedy_mostly():
    cfg = BaselineConfig(kind="eps-greedy", eps0=0.001, eps_floor=0.001)
    policy = EpsGreedyPolicy(ARCH, cfg, NEWTON, _rng())
    policy.warm_start(WARM)
    decision = policy.step(np.full((200, 1), -2.0))
    assert decision.accepts.sum() <= 3


def test_ucb_bonus_positive_and_finite(rng):
    arch = Architecture.mlp(2, 4, 3)
    params = ScorerParams.init(arch, rng)
    bonus = ucb_bonus(params, rng.normal(size=(10, 2)) * 100, np.ones(arch.n_params), 1.0)
    assert np.all(bonus > 0)
    assert np.all(np.isfinite(bonus))
    with pytest.raises(ParameterError):
        ucb_bonus(params, np.zeros((1, 2)), np.ones(arch.n_params), -1.0)


def test_ucb_bonus_shrinks_with_repeated_acceptance():
    params = ScorerParams(ARCH, np.array([0.5, 0.0]))
    x = np.array([[0.7]])
    design = np.ones(ARCH.n_params)
    bonuses = []
    for _ in range(5):
        bonuses.append(float(ucb_bonus(params, x, design, 1.0)[0]))
        design = update_design(design, params, x)
    assert all(b < a for a, b in zip(bonuses, bonuses[1:], strict=False))


def test_ucb_zero_bonus_reduces_to_greedy():
    batch = np.linspace(-2, 2, 7)[:, None]
    greedy = GreedyPolicy(ARCH, NEWTON, _rng())
    greedy.warm_start(WARM)
    ucb = NeuralUcbPolicy(ARCH, BaselineConfig(kind="neural-ucb", gamma=1e-300), NEWTON, _rng())
    ucb.warm_start(WARM)
    np.testing.assert_array_equal(greedy.step(batch).accepts, ucb.step(batch).accepts)


def test_ucb_large_gamma_accepts_everything():
    policy = NeuralUcbPolicy(ARCH, BaselineConfig(kind="neural-ucb", gamma=1e6), NEWTON, _rng())
    policy.warm_start(WARM)
    decision = policy.step(np.array([[-3.0], [-1.0], [2.0]]))
    assert decision.accepts.all()
    assert np.all(decision.decision_scores > decision.base_scores)


def test_ucb_record_updates_design_with_accepted_points_only():
    policy = NeuralUcbPolicy(ARCH, BaselineConfig(kind="neural-ucb"), NEWTON, _rng())
    batch = np.array([[2.0], [3.0]])
    policy.step(batch)
    policy.record(batch, [True, False], [1, None])
    # linear gradient features are (x, 1)
    np.testing.assert_allclose(policy.design, [1.0 + 4.0, 2.0])


def test_accept_all_policy():
    policy = AcceptAllPolicy(ARCH, NEWTON, _rng())
    policy.warm_start(WARM)
    decision = policy.step(np.array([[-9.0], [9.0]]))
    assert decision.accepts.all()
    assert np.all(decision.decision_scores == np.inf)
    assert np.all(np.isfinite(decision.base_scores))


def test_build_policy_dispatch():
    rng = _rng()
    assert isinstance(build_policy(BaselineConfig(kind="greedy"), ARCH, NEWTON, rng), GreedyPolicy)
    assert build_policy(BaselineConfig(kind="neural-ucb"), ARCH, NEWTON, rng).name == "neural-ucb-diag-surrogate"
    own = TrainConfig(steps=3)
    assert build_policy(BaselineConfig(kind="eps-greedy", train=own), ARCH, NEWTON, rng).train_cfg == own


def test_ucb_label_in_results():
    cfg = ExperimentConfig(dataset={"kind": "synth"}, algo={"kind": "neural-ucb"})
    assert cfg.algo_label == "neural-ucb-diag-surrogate"
    with pytest.raises(ConfigError):
        build(ExperimentConfig, {"dataset": {"kind": "synth"}, "algo": {"kind": "bogus"}})
