"""Numeric checks of the inequalities behind the optimism analysis.

Every check returns a `CheckReport`; a failed inequality is reported, never
raised.
"""

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np
from pydantic import BaseModel, Field, field_validator

from loanbandit.exceptions import ParameterError
from loanbandit.scorer import link

if TYPE_CHECKING:
    from loanbandit.harness import DecisionRecord, RunResult

logger = logging.getLogger(__name__)

LOGISTIC_C = math.e / (1.0 + math.e) ** 2
DOMINANCE_FACTOR = 0.009
DOMINANCE_TOLERANCE = 1e-6


class TauGrid(BaseModel):
    values: list[float] = Field(default_factory=lambda: [i / 100 for i in range(1, 100)])

    @field_validator("values")
    @classmethod
    def _strictly_inside_unit_interval(cls, values: list[float]) -> list[float]:
        if not values:
            raise ValueError("grid must not be empty")
        if any(not 0 < v < 1 for v in values):
            raise ValueError("grid values must lie strictly inside (0, 1)")
        return values

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


class CheckReport(BaseModel):
    name: str
    passed: bool
    worst_slack: float
    details: dict[str, Any] = {}


class TheoryReport(BaseModel):
    passed: bool
    checks: list[CheckReport]


def check_logistic_bounds(grid: TauGrid | None = None) -> CheckReport:
    """1/2 + c x <= mu(x) <= 1/2 + x on the grid, c = e / (1 + e)^2."""
    x = (grid or TauGrid()).array()
    mu = np.asarray(link(x))
    lower_slack = mu - (0.5 + LOGISTIC_C * x)
    upper_slack = (0.5 + x) - mu
    slack = np.minimum(lower_slack, upper_slack)
    worst = int(np.argmin(slack))
    return CheckReport(
        name="logistic_bounds",
        passed=bool(np.all(slack >= 0)),
        worst_slack=float(slack[worst]),
        details={"c": LOGISTIC_C, "worst_x": float(x[worst]), "points": int(x.size)},
    )


def dominance_expression(tau):
    tau = np.asarray(tau, dtype=float)
    a = 0.5 + 49 * tau / 500
    p = 0.5 + 487 * tau / 6400
    q = 0.5 - 487 * tau / 6400
    return a * np.log(p / (0.5 + tau / 128)) + (1 - a) * np.log(q / (0.5 - tau / 128 + tau**2 / 512))


def dominance_objective(tau: float, z):
    """The dominance expression with 1/2 + tau/128 replaced by z; equal to
    `dominance_expression` at z = 1/2 + tau/128."""
    z = np.asarray(z, dtype=float)
    a = 0.5 + 49 * tau / 500
    p = 0.5 + 487 * tau / 6400
    q = 0.5 - 487 * tau / 6400
    return a * np.log(p / z) + (1 - a) * np.log(q / (1 - z + tau**2 / 512))


def check_dominance_inequality(grid: TauGrid | None = None, scan_points: int = 2001) -> CheckReport:
    tau = (grid or TauGrid()).array()
    slack = dominance_expression(tau) - (DOMINANCE_FACTOR * tau**2 - DOMINANCE_TOLERANCE)

    # the objective must decrease all the way to z = 1/2 + tau/128, so its
    # minimum over the scanned interval sits at the right end
    non_decreasing = []
    for t in tau:
        z = np.linspace(1e-3, 0.5 + t / 128, scan_points)
        if np.any(np.diff(dominance_objective(t, z)) >= 0):
            non_decreasing.append(float(t))
    worst = int(np.argmin(slack))
    return CheckReport(
        name="dominance_inequality",
        passed=bool(np.all(slack >= 0)) and not non_decreasing,
        worst_slack=float(slack[worst]),
        details={
            "worst_tau": float(tau[worst]),
            "scan_failures": non_decreasing,
            "factor": DOMINANCE_FACTOR,
        },
    )


def bernoulli_kl_bits(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        first = np.where(p > 0, p * np.log2(p / q), 0.0)
        second = np.where(p < 1, (1 - p) * np.log2((1 - p) / (1 - q)), 0.0)
    return first + second


def pinsker_bound_bits(p, q):
    """(1 / (2 ln 2)) * ||P - Q||_1^2 for two Bernoulli laws."""
    l1 = 2.0 * np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))
    return l1**2 / (2.0 * math.log(2))


def check_pinsker(samples: int = 10_000, seed: int = 0) -> CheckReport:
    rng = np.random.default_rng(seed)
    p = rng.uniform(1e-6, 1 - 1e-6, samples)
    q = rng.uniform(1e-6, 1 - 1e-6, samples)
    slack = bernoulli_kl_bits(p, q) - pinsker_bound_bits(p, q)
    violations = int(np.sum(slack < -1e-12))
    return CheckReport(
        name="pinsker",
        passed=violations == 0,
        worst_slack=float(slack.min()),
        details={"samples": samples, "violations": violations},
    )


def anytime_bound(T, delta: float, zeta: float = 1.0):
    """2 zeta sqrt(T ln(6 ln T / delta)), with the log argument clamped at 1."""
    T = np.asarray(T, dtype=float)
    argument = np.maximum(6.0 * np.log(T) / delta, 1.0)
    return 2.0 * zeta * np.sqrt(T * np.log(argument))


def anytime_violations(paths: np.ndarray, delta: float, zeta: float = 1.0) -> np.ndarray:
    """Per path: does the running sum exceed the bound at some T >= 2?"""
    sums = np.cumsum(paths, axis=1)
    T = np.arange(1, paths.shape[1] + 1)
    exceeded = sums[:, 1:] > anytime_bound(T[1:], delta, zeta)
    return exceeded.any(axis=1)


def check_anytime_hoeffding(
    trials: int = 10_000,
    horizon: int = 1000,
    delta: float = 0.05,
    seed: int = 0,
    chunk: int = 1000,
) -> CheckReport:
    rng = np.random.default_rng(seed)
    violations = 0
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        steps = rng.integers(0, 2, size=(n, horizon), dtype=np.int8) * 2 - 1
        violations += int(anytime_violations(steps, delta).sum())
        done += n
    rate = violations / trials
    allowed = delta + 3.0 * math.sqrt(delta * (1 - delta) / trials)
    return CheckReport(
        name="anytime_hoeffding",
        passed=rate <= allowed,
        worst_slack=allowed - rate,
        details={
            "trials": trials,
            "horizon": horizon,
            "delta": delta,
            "violation_rate": rate,
            "bound_at_2": float(anytime_bound(2, delta)),
        },
    )


@dataclass(frozen=True, eq=False)
class OptimismTrace:
    """Per-step model score f_t(x_t), oracle score f*(x_t) and decision."""

    model_scores: np.ndarray
    oracle_scores: np.ndarray
    accepted: np.ndarray

    def optimistic(self) -> "OptimismTrace":
        keep = self.model_scores >= self.oracle_scores
        return OptimismTrace(self.model_scores[keep], self.oracle_scores[keep], self.accepted[keep])

    @classmethod
    def from_records(cls, records: Iterable["DecisionRecord"]) -> "OptimismTrace":
        """Trace of every decided point, in decision order. Needs oracle
        scores, so only oracle-mode runs qualify."""
        records = list(records)
        if any(r.oracle_score is None or r.model_score is None for r in records):
            raise ParameterError("an optimism trace needs model and oracle scores for every point")
        return cls(
            np.array([r.model_score for r in records], dtype=float),
            np.array([r.oracle_score for r in records], dtype=float),
            np.array([r.accepted for r in records], dtype=bool),
        )

    @classmethod
    def from_result(cls, result: "RunResult") -> "OptimismTrace":
        if result.regret_mode != "oracle":
            raise ParameterError(f"run seed={result.seed} has no oracle scores ({result.regret_mode} regret)")
        return cls.from_records(result.records)


def synthetic_optimism_trace(n: int = 1000, inflation: float = 1.0, seed: int = 0) -> OptimismTrace:
    """Oracle scores ~ N(0, 2^2); the model adds `inflation` and accepts on
    its own sign."""
    rng = np.random.default_rng(seed)
    oracle = rng.normal(0.0, 2.0, n)
    model = oracle + inflation
    return OptimismTrace(model, oracle, model >= 0)


def check_optimism_decomposition(trace: OptimismTrace) -> CheckReport:
    """R(t) <= sum 2 a_l (mu(f_l) - mu(f*_l)) for every prefix of the
    optimistic part of the trace."""
    kept = trace.optimistic()
    accepted = np.asarray(kept.accepted, dtype=bool)
    gain = 2.0 * np.asarray(link(kept.oracle_scores)) - 1.0
    regret = np.maximum(0.0, gain) - np.where(accepted, gain, 0.0)
    bound = 2.0 * np.where(
        accepted, np.asarray(link(kept.model_scores)) - np.asarray(link(kept.oracle_scores)), 0.0
    )
    slack = np.cumsum(bound) - np.cumsum(regret)
    worst = float(slack.min()) if slack.size else 0.0
    return CheckReport(
        name="optimism_decomposition",
        passed=worst >= -1e-12,
        worst_slack=worst,
        details={
            "steps": int(trace.accepted.size),
            "optimistic_steps": int(accepted.size),
            "regret": float(regret.sum()),
            "bound": float(bound.sum()),
        },
    )


def run_all_checks(
    seed: int = 0,
    samples: int = 10_000,
    trials: int = 10_000,
    horizon: int = 1000,
    delta: float = 0.05,
) -> TheoryReport:
    checks = [
        check_logistic_bounds(),
        check_dominance_inequality(),
        check_pinsker(samples, seed),
        check_anytime_hoeffding(trials, horizon, delta, seed),
        check_optimism_decomposition(synthetic_optimism_trace(seed=seed)),
    ]
    for check in checks:
        logger.info(
            "theory check",
            extra={"check": check.name, "passed": check.passed, "worst_slack": check.worst_slack},
        )
    return TheoryReport(passed=all(c.passed for c in checks), checks=checks)
