from loanbandit.harness.emit import emit, summarize
from loanbandit.harness.metrics import (
    Breakdown,
    DecisionRecord,
    acceptance_breakdown,
    regret_slope,
)
from loanbandit.harness.runner import (
    RunContext,
    RunFailure,
    RunResult,
    best_gamma,
    prepare_context,
    pretrain_baseline,
    run_experiment,
    run_gamma_grid,
    run_single,
)

__all__ = [
    "Breakdown",
    "DecisionRecord",
    "RunContext",
    "RunFailure",
    "RunResult",
    "acceptance_breakdown",
    "best_gamma",
    "emit",
    "prepare_context",
    "pretrain_baseline",
    "regret_slope",
    "run_experiment",
    "run_gamma_grid",
    "run_single",
    "summarize",
]
