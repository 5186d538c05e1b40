import logging
import os
import tempfile
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from pydantic import BaseModel

from loanbandit.exceptions import EmitError
from loanbandit.harness.runner import RunFailure, RunResult

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("t", "cum_regret", "cum_reward", "accepts", "p_accept_pos", "p_accept_neg")


class CheckpointStat(BaseModel):
    t: int
    mean: float
    sd: float
    n: int


class AccuracyPoint(BaseModel):
    t: int
    accuracy: float


class RunSummary(BaseModel):
    seed: int
    final_regret: float
    final_reward: float
    expected_reward: float | None = None
    optimal_reward: float | None = None
    final_accuracy: float | None = None
    trailing_p_accept_pos: float | None = None
    trailing_p_accept_neg: float | None = None
    accuracy_trace: list[AccuracyPoint] = []


class ExperimentSummary(BaseModel):
    dataset: str
    algo: str
    regret_mode: str
    seeds: list[int]
    failures: list[dict[str, Any]] = []
    checkpoints: list[CheckpointStat]
    reward_checkpoints: list[CheckpointStat]
    runs: list[RunSummary]
    config: dict[str, Any]


def run_frame(result: RunResult, window: int = 100) -> pd.DataFrame:
    p_pos, p_neg = result.breakdown()
    w_pos, w_neg = result.breakdown(window)
    frame = pd.DataFrame(
        {
            "t": np.arange(1, result.T + 1),
            "cum_regret": result.cumulative_regret,
            "cum_reward": result.cumulative_reward,
            "accepts": result.accept_counts,
            "p_accept_pos": p_pos,
            "p_accept_neg": p_neg,
            f"p_accept_pos_w{window}": w_pos,
            f"p_accept_neg_w{window}": w_neg,
        }
    )
    if result.accuracy_trace:
        # sparse: filled only at the evaluated steps
        holdout = np.full(result.T, np.nan)
        for t, acc in result.accuracy_trace:
            holdout[t - 1] = acc
        frame["holdout_accuracy"] = holdout
    return frame


def checkpoint_stats(series: Sequence[np.ndarray], checkpoints: Sequence[int]) -> list[CheckpointStat]:
    """Mean and sample sd across runs at each checkpoint within the horizon."""
    stats = []
    for t in checkpoints:
        values = [float(s[t - 1]) for s in series if len(s) >= t]
        if not values:
            continue
        sd = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        stats.append(CheckpointStat(t=t, mean=float(np.mean(values)), sd=sd, n=len(values)))
    return stats


def summarize(
    outcomes: Sequence[RunResult | RunFailure],
    checkpoints: Sequence[int],
    trailing: int = 500,
) -> ExperimentSummary:
    results = [o for o in outcomes if isinstance(o, RunResult)]
    failures = [o for o in outcomes if isinstance(o, RunFailure)]
    if not results:
        raise ValueError("no successful runs to summarize")
    first = results[0]
    runs = []
    for result in results:
        breakdown = result.breakdown_since(result.T - trailing)
        runs.append(
            RunSummary(
                seed=result.seed,
                final_regret=float(result.cumulative_regret[-1]),
                final_reward=float(result.cumulative_reward[-1]),
                expected_reward=result.expected_reward,
                optimal_reward=result.optimal_reward,
                final_accuracy=result.final_accuracy,
                trailing_p_accept_pos=breakdown.p_pos,
                trailing_p_accept_neg=breakdown.p_neg,
                accuracy_trace=[AccuracyPoint(t=t, accuracy=acc) for t, acc in result.accuracy_trace],
            )
        )
    checkpoints = sorted(set(checkpoints) | {first.T})
    return ExperimentSummary(
        dataset=first.dataset,
        algo=first.algo,
        regret_mode=first.regret_mode,
        seeds=[r.seed for r in results],
        failures=[{"seed": f.seed, "error": f.error} for f in failures],
        checkpoints=checkpoint_stats([r.cumulative_regret for r in results], checkpoints),
        reward_checkpoints=checkpoint_stats([r.cumulative_reward for r in results], checkpoints),
        runs=runs,
        config=first.config_echo,
    )


def atomic_write_text(path: Path, text: str) -> None:
    """Write to a temporary sibling, then rename over `path`: readers see
    either the old file or the new one."""
    path = Path(path)
    tmp_name = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            "w", dir=path.parent, prefix=f".{path.name}.", suffix=".tmp", delete=False, newline=""
        ) as tmp:
            tmp_name = tmp.name
            tmp.write(text)
        os.replace(tmp_name, path)
    except OSError as err:
        if tmp_name is not None and os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise EmitError(path, err) from err


def result_stem(result: RunResult | ExperimentSummary) -> str:
    return f"{result.dataset}_{result.algo}"


def emit(
    outcomes: Sequence[RunResult | RunFailure],
    out_dir: Path,
    checkpoints: Sequence[int] = (500, 1000, 2000),
    window: int = 100,
    label: str | None = None,
) -> list[Path]:
    """Per-run CSV files plus one JSON summary. Returns the written paths."""
    out_dir = Path(out_dir)
    results = [o for o in outcomes if isinstance(o, RunResult)]
    written = []
    for result in results:
        stem = label or result_stem(result)
        path = out_dir / f"{stem}_seed{result.seed}.csv"
        atomic_write_text(path, run_frame(result, window).to_csv(index=False, na_rep=""))
        written.append(path)
    if results:
        summary = summarize(outcomes, checkpoints)
        path = out_dir / f"{label or result_stem(summary)}_summary.json"
        atomic_write_text(path, summary.model_dump_json(indent=2))
        written.append(path)
    logger.info("wrote results", extra={"out_dir": str(out_dir), "files": len(written)})
    return written
