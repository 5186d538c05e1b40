import typing

from pydantic import BaseModel

from loanbandit.config import ExperimentConfig

if typing.TYPE_CHECKING:
    from loanbandit.harness.runner import RunResult


class RunAttribute(BaseModel):
    span_name: str
    dataset: str
    algo: str
    attributes: dict[str, typing.Any]


def get_run_attribute(cfg: ExperimentConfig, seed: int) -> RunAttribute:
    attributes: dict[str, typing.Any] = {
        "loanbandit.dataset": cfg.dataset.kind,
        "loanbandit.algo": cfg.algo_label,
        "loanbandit.seed": seed,
        "loanbandit.horizon": cfg.T,
        "loanbandit.batch_size": cfg.batch_size,
    }
    if cfg.dataset.is_real:
        attributes["loanbandit.cycle"] = cfg.dataset.cycle
    return RunAttribute(
        span_name=f"run {cfg.dataset.kind}/{cfg.algo_label}",
        dataset=cfg.dataset.kind,
        algo=cfg.algo_label,
        attributes=attributes,
    )


def get_result_attribute(result: "RunResult") -> dict[str, typing.Any]:
    """Outcome attributes set on the span once a run has finished."""
    attributes: dict[str, typing.Any] = {
        "loanbandit.regret_mode": result.regret_mode,
        "loanbandit.cumulative_regret": float(result.cumulative_regret[-1]),
        "loanbandit.accepted": int(result.accept_counts.sum()),
    }
    if result.final_accuracy is not None:
        attributes["loanbandit.holdout_accuracy"] = result.final_accuracy
    return attributes
