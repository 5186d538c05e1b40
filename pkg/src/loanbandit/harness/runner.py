import logging
import time
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from loanbandit.config import Architecture, ExperimentConfig, TrainConfig
from loanbandit.data import XorClusters, gen_synthetic_logistic, gen_xor, load_dataset, split_holdout
from loanbandit.env import BLPEnvironment, RegretLedger, Stream, TableStream
from loanbandit.harness.metrics import (
    Breakdown,
    DecisionRecord,
    acceptance_breakdown,
    breakdown_series,
    step_counts,
)
from loanbandit.harness.scenarios import planted_negatives, trap_stream
from loanbandit.policies import build_policy
from loanbandit.scorer import LabeledDataset, ScorerParams, accuracy, score, train

logger = logging.getLogger(__name__)

XOR_BASELINE_SAMPLES = 2000
XOR_HOLDOUT_SAMPLES = 1000


@dataclass(frozen=True, eq=False)
class RunContext:
    """Everything a seed's run shares with the other seeds. Immutable."""

    arch: Architecture
    table: LabeledDataset | None = None
    holdout: LabeledDataset | None = None
    baseline: ScorerParams | None = None


@dataclass(eq=False)
class RunResult:
    seed: int
    algo: str
    dataset: str
    regret_mode: str
    config_echo: dict[str, Any]
    cumulative_regret: np.ndarray
    reward: np.ndarray
    accept_counts: np.ndarray
    records: list[DecisionRecord]
    expected_reward: float | None = None
    optimal_reward: float | None = None
    final_accuracy: float | None = None
    accuracy_trace: list[tuple[int, float]] = field(default_factory=list)
    duration_s: float = 0.0

    @property
    def T(self) -> int:
        return len(self.cumulative_regret)

    @property
    def cumulative_reward(self) -> np.ndarray:
        return np.cumsum(self.reward)

    def breakdown(self, window: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        return breakdown_series(step_counts(self.records, self.T), window)

    def breakdown_since(self, t: int) -> Breakdown:
        return acceptance_breakdown(r for r in self.records if r.t > t)


@dataclass(frozen=True)
class RunFailure:
    seed: int
    algo: str
    error: str


def default_arch(cfg: ExperimentConfig, input_dim: int) -> Architecture:
    if cfg.arch is not None:
        return cfg.arch
    kind = cfg.arch_kind or ("linear" if cfg.dataset.kind in ("synth", "trap") else "mlp")
    if kind == "linear":
        return Architecture.linear(input_dim)
    return Architecture.mlp(input_dim, *cfg.hidden)


def pretrain_baseline(
    data: LabeledDataset, train_cfg: TrainConfig, arch: Architecture, seed: int = 0
) -> ScorerParams:
    """Offline model on the full labeled data; its decisions are the regret
    reference for runs without an oracle."""
    rng = np.random.default_rng(seed)
    params = train(ScorerParams.init(arch, rng), data, train_cfg, rng)
    logger.info(
        "pretrained baseline model",
        extra={"rows": len(data), "accuracy": accuracy(params, data), "arch": arch.kind},
    )
    return params


def prepare_context(cfg: ExperimentConfig) -> RunContext:
    spec = cfg.dataset
    rng = np.random.default_rng(cfg.seed_offset)
    if spec.is_real:
        loaded = load_dataset(spec)
        stream_part, holdout = split_holdout(loaded.data, spec.holdout, rng)
        arch = default_arch(cfg, loaded.dim)
        baseline = pretrain_baseline(loaded.data, cfg.baseline_train, arch, cfg.seed_offset)
        return RunContext(arch, stream_part, holdout, baseline)
    if spec.kind == "xor":
        clusters = XorClusters(positive_centers=spec.positive_centers)
        arch = default_arch(cfg, 2)
        reference = clusters.dataset(XOR_BASELINE_SAMPLES, rng)
        holdout = clusters.dataset(XOR_HOLDOUT_SAMPLES, rng)
        baseline = pretrain_baseline(reference, cfg.baseline_train, arch, cfg.seed_offset)
        return RunContext(arch, holdout=holdout, baseline=baseline)
    input_dim = spec.d if spec.kind == "synth" else 1
    return RunContext(default_arch(cfg, input_dim))


def _seed_int(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1)[0])


def build_stream(cfg: ExperimentConfig, context: RunContext, seq: np.random.SeedSequence) -> Stream:
    spec = cfg.dataset
    if spec.is_real:
        return TableStream(context.table, np.random.default_rng(seq), spec.cycle)
    if spec.kind == "xor":
        return gen_xor(_seed_int(seq), spec.positive_centers)
    if spec.kind == "trap":
        return trap_stream(spec.trap, _seed_int(seq))
    stream, _ = gen_synthetic_logistic(
        spec.d,
        spec.tau,
        spec.lipschitz,
        _seed_int(seq),
        bound=spec.bound,
        theta_seed=spec.generator_seed,
    )
    return stream


def run_single(cfg: ExperimentConfig, seed: int, context: RunContext) -> RunResult:
    """One online run: fetch batch, decide, act, learn, account."""
    start = time.perf_counter()
    stream_seq, policy_seq, aux_seq = np.random.SeedSequence(seed).spawn(3)
    env = BLPEnvironment(build_stream(cfg, context, stream_seq))
    policy = build_policy(cfg.algo, context.arch, cfg.train, np.random.default_rng(policy_seq))
    if cfg.dataset.kind == "trap":
        policy.warm_start(planted_negatives(cfg.dataset.trap, np.random.default_rng(aux_seq)))

    theta_star = env.theta_star
    ledger = RegretLedger("oracle" if theta_star is not None else "baseline")
    cumulative = np.zeros(cfg.T)
    rewards = np.zeros(cfg.T)
    accept_counts = np.zeros(cfg.T, dtype=np.int64)
    records: list[DecisionRecord] = []
    accuracy_trace: list[tuple[int, float]] = []

    for step in range(1, cfg.T + 1):
        batch = env.next_batch(cfg.batch_size)
        decision = policy.step(batch)
        outcomes = env.act(batch, decision.accepts)
        policy.record(batch, decision.accepts, [o.label for o in outcomes])

        true_labels = env.evaluation.labels()
        if theta_star is not None:
            ledger.record_oracle(theta_star, batch, decision.accepts)
        else:
            ledger.record_baseline(context.baseline, batch, true_labels, decision.accepts)
        rewards[step - 1] = ledger.record_rewards(outcomes)
        cumulative[step - 1] = ledger.cumulative
        accept_counts[step - 1] = int(decision.accepts.sum())
        oracle_scores = np.asarray(score(theta_star, batch)) if theta_star is not None else None
        records.extend(
            DecisionRecord(
                t=step,
                index=j,
                accepted=bool(decision.accepts[j]),
                label=outcome.label,
                reward=outcome.reward,
                pseudo=bool(decision.pseudo_mask[j]),
                true_label=int(true_labels[j]),
                model_score=float(decision.decision_scores[j]),
                oracle_score=float(oracle_scores[j]) if oracle_scores is not None else None,
            )
            for j, outcome in enumerate(outcomes)
        )
        if context.holdout is not None and cfg.eval_every and step % cfg.eval_every == 0:
            accuracy_trace.append((step, accuracy(policy.state.base_params, context.holdout)))

    final_accuracy = None
    if context.holdout is not None and len(context.holdout):
        final_accuracy = accuracy(policy.state.base_params, context.holdout)

    duration = time.perf_counter() - start
    logger.info(
        "run finished",
        extra={
            "seed": seed,
            "algo": cfg.algo_label,
            "dataset": cfg.dataset.kind,
            "cumulative_regret": ledger.cumulative,
            "duration_s": round(duration, 3),
        },
    )
    oracle = ledger.mode == "oracle"
    return RunResult(
        seed=seed,
        algo=cfg.algo_label,
        dataset=cfg.dataset.kind,
        regret_mode=ledger.mode,
        config_echo=cfg.model_dump(mode="json"),
        cumulative_regret=cumulative,
        reward=rewards,
        accept_counts=accept_counts,
        records=records,
        expected_reward=ledger.expected_reward if oracle else None,
        optimal_reward=ledger.optimal_reward if oracle else None,
        final_accuracy=final_accuracy,
        accuracy_trace=accuracy_trace,
        duration_s=duration,
    )


RunCallable = Callable[[ExperimentConfig, int, RunContext], RunResult]


def _guarded(call: RunCallable, cfg: ExperimentConfig, seed: int, context: RunContext) -> RunResult | RunFailure:
    try:
        return call(cfg, seed, context)
    except Exception as exc:
        logger.exception("run failed", extra={"seed": seed, "algo": cfg.algo_label})
        return RunFailure(seed=seed, algo=cfg.algo_label, error=f"{type(exc).__name__}: {exc}")


def run_experiment(
    cfg: ExperimentConfig,
    run: RunCallable | None = None,
    context: RunContext | None = None,
) -> list[RunResult | RunFailure]:
    """One entry per seed, in seed order. A failing seed becomes a
    RunFailure; the other seeds still run."""
    context = context if context is not None else prepare_context(cfg)
    seeds = cfg.seed_list()
    if cfg.workers > 1 and len(seeds) > 1:
        if run is not None:
            logger.warning("custom run wrappers only apply to sequential sweeps")
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_guarded, run_single, cfg, seed, context) for seed in seeds]
            return [future.result() for future in futures]
    call = run or run_single
    return [_guarded(call, cfg, seed, context) for seed in seeds]


def run_gamma_grid(
    cfg: ExperimentConfig,
    gammas: list[float],
    run: RunCallable | None = None,
    context: RunContext | None = None,
) -> dict[float, list[RunResult | RunFailure]]:
    """Sweep the UCB bonus scale; every grid point shares one context."""
    context = context if context is not None else prepare_context(cfg)
    grid = {}
    for gamma in gammas:
        algo = cfg.algo.model_copy(update={"gamma": gamma})
        grid[gamma] = run_experiment(cfg.model_copy(update={"algo": algo}), run, context)
    return grid


def best_gamma(grid: dict[float, list[RunResult | RunFailure]]) -> float | None:
    """Grid point with the lowest mean final regret over successful runs."""
    means = {}
    for gamma, outcomes in grid.items():
        finals = [o.cumulative_regret[-1] for o in outcomes if isinstance(o, RunResult)]
        if finals:
            means[gamma] = float(np.mean(finals))
    return min(means, key=means.get) if means else None
