import logging
from pathlib import Path

import click

from loanbandit.config import (
    REAL_DATASETS,
    ExperimentConfig,
    build,
    get_project_settings,
)
from loanbandit.data import resolve_dataset_paths
from loanbandit.exceptions import ConfigError, LoanBanditError
from loanbandit.harness import (
    RunFailure,
    best_gamma,
    emit,
    prepare_context,
    run_experiment,
    run_gamma_grid,
    run_single,
    summarize,
)
from loanbandit.theory import run_all_checks

logger = logging.getLogger("loanbandit")

# ruff: noqa: W291
LOANBANDIT_ASCII = r"""
 _                        _                     _  _  _
| |    ___   __ _  _ __  | |__   __ _  _ __   __| |(_)| |_
| |   / _ \ / _` || '_ \ | '_ \ / _` || '_ \ / _` || || __|
| |__| (_) | (_| || | | || |_) | (_| || | | | (_| || || |_
|_____\___/ \__,_||_| |_||_.__/ \__,_||_| |_|\__,_||_| \__|
"""


@click.group()
@click.option(
    "--log-level",
    default="WARNING",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    help="Level for the package's log records (written to stderr).",
)
def cli(log_level: str):
    click.echo(click.style(LOANBANDIT_ASCII, fg="green"), err=True)
    logging.basicConfig(
        level=log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )


def _dataset_fields(
    dataset: str,
    path: Path | None,
    labels_path: Path | None,
    data_root: Path | None,
    merge_test: bool,
) -> dict:
    if dataset not in REAL_DATASETS:
        return {}
    if path is not None:
        return {"path": path, "labels_path": labels_path}
    if data_root is None:
        raise ConfigError(
            f"{dataset} needs --path, --data-root or the LOANBANDIT_DATA_ROOT environment variable"
        )
    return resolve_dataset_paths(dataset, data_root, include_test=merge_test)


def _train_fields(
    dataset: str, arch: str | None, steps: int | None, lr: float | None, l2: float | None, optimizer: str | None
) -> dict:
    linear = arch == "linear" or (arch is None and dataset in ("synth", "trap"))
    fields = {"optimizer": optimizer or ("newton" if linear else "adam")}
    if steps is not None:
        fields["steps"] = steps
    elif fields["optimizer"] == "newton":
        fields["steps"] = 50
    if lr is not None:
        fields["learning_rate"] = lr
    if l2 is not None:
        fields["l2_lambda"] = l2
    return fields


@cli.command()
@click.option(
    "--dataset",
    required=True,
    type=click.Choice(["adult", "bank", "mnist5", "xor", "synth", "trap"]),
)
@click.option(
    "--algo",
    default="plot",
    type=click.Choice(["plot", "greedy", "eps-greedy", "neural-ucb", "accept-all"]),
)
@click.option("--T", "horizon", default=2000, type=click.IntRange(min=1), help="Number of batches.")
@click.option("--batch-size", default=32, type=click.IntRange(min=1))
@click.option("--seeds", default=5, type=click.IntRange(min=1))
@click.option("--seed-offset", default=0, type=int)
@click.option("--epsilon", default=0.05, type=click.FloatRange(0, 1), help="PLOT pseudo-label probability.")
@click.option("--weight", default=1.0, type=click.FloatRange(min=0), help="PLOT pseudo-label weight W.")
@click.option("--radius", default=None, type=click.FloatRange(min=0, min_open=True), help="Focus radius (default infinite).")
@click.option(
    "--gamma",
    multiple=True,
    type=click.FloatRange(min=0, min_open=True),
    help="NeuralUCB bonus scale; repeat to sweep a grid.",
)
@click.option("--eps0", default=0.1, type=click.FloatRange(0, 1, min_open=True))
@click.option("--eps-floor", default=0.001, type=click.FloatRange(0, 1, min_open=True))
@click.option("--eps-horizon", default=None, type=click.IntRange(min=1), help="Decay horizon (default T).")
@click.option("--theory-mode", is_flag=True, help="PLOT with the theoretical W_t and R schedules.")
@click.option("--tau", default=0.2, type=click.FloatRange(0, 1, min_open=True, max_open=True))
@click.option("--delta", default=0.1, type=click.FloatRange(0, 1, min_open=True, max_open=True))
@click.option("--lipschitz", default=1.0, type=click.FloatRange(min=0, min_open=True))
@click.option("--d", "dim", default=2, type=click.IntRange(min=1), help="Synthetic context dimension.")
@click.option("--arch", default=None, type=click.Choice(["linear", "mlp"]))
@click.option("--hidden", default=(40, 40), nargs=2, type=click.IntRange(min=1))
@click.option("--steps", default=None, type=click.IntRange(min=0), help="Optimizer steps per round.")
@click.option("--lr", default=None, type=click.FloatRange(min=0, min_open=True))
@click.option("--l2", default=None, type=click.FloatRange(min=0))
@click.option("--optimizer", default=None, type=click.Choice(["sgd", "adam", "newton"]))
@click.option("--cycle", default="replacement", type=click.Choice(["replacement", "reshuffle", "none"]))
@click.option("--holdout", default=0.2, type=click.FloatRange(0, 1, max_open=True))
@click.option("--path", default=None, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--labels-path", default=None, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--data-root", default=None, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--merge-test", is_flag=True, help="Append adult.test to the Adult training file.")
@click.option("--eval-every", default=0, type=click.IntRange(min=0))
@click.option("--workers", default=None, type=click.IntRange(min=1))
@click.option("--out", "out_dir", default=None, type=click.Path(file_okay=False, path_type=Path))
@click.option("--telemetry", default="off", type=click.Choice(["off", "console", "otlp"]))
def run(
    dataset: str,
    algo: str,
    horizon: int,
    batch_size: int,
    seeds: int,
    seed_offset: int,
    epsilon: float,
    weight: float,
    radius: float | None,
    gamma: tuple[float, ...],
    eps0: float,
    eps_floor: float,
    eps_horizon: int | None,
    theory_mode: bool,
    tau: float,
    delta: float,
    lipschitz: float,
    dim: int,
    arch: str | None,
    hidden: tuple[int, int],
    steps: int | None,
    lr: float | None,
    l2: float | None,
    optimizer: str | None,
    cycle: str,
    holdout: float,
    path: Path | None,
    labels_path: Path | None,
    data_root: Path | None,
    merge_test: bool,
    eval_every: int,
    workers: int | None,
    out_dir: Path | None,
    telemetry: str,
):
    """Run a seeded sweep of one policy and write per-seed CSV files plus a
    JSON summary."""
    try:
        settings = get_project_settings()
        spec = {
            "kind": dataset,
            "cycle": cycle,
            "holdout": holdout,
            "d": dim,
            "tau": tau,
            "lipschitz": lipschitz,
            **_dataset_fields(dataset, path, labels_path, data_root or settings.data_root, merge_test),
        }
        if algo == "plot":
            algo_cfg = {
                "kind": "plot",
                "epsilon": epsilon,
                "weight_mode": "theory" if theory_mode else "constant",
                "weight": weight,
                "radius": radius,
                "tau": tau,
                "delta_prime": delta,
                "lipschitz": lipschitz,
            }
        else:
            algo_cfg = {
                "kind": algo,
                "eps0": eps0,
                "eps_floor": eps_floor,
                "horizon": eps_horizon or horizon,
                "gamma": gamma[0] if gamma else 1.0,
            }
        cfg: ExperimentConfig = build(
            ExperimentConfig,
            {
                "dataset": spec,
                "algo": algo_cfg,
                "T": horizon,
                "batch_size": batch_size,
                "seeds": seeds,
                "seed_offset": seed_offset,
                "train": _train_fields(dataset, arch, steps, lr, l2, optimizer),
                "arch_kind": arch,
                "hidden": hidden,
                "out_dir": out_dir or settings.out_dir,
                "eval_every": eval_every,
                "workers": workers or settings.workers,
            },
        )
        logger.info("experiment config", extra={"config": cfg.model_dump(mode="json")})
        context = prepare_context(cfg)
    except LoanBanditError as err:
        raise click.ClickException(str(err)) from err

    handle = None
    runner = None
    if telemetry != "off":
        from loanbandit.telemetry import bridge_logging, configure_telemetry, force_flush
        from loanbandit.telemetry.middleware import TelemetryMiddleware

        handle = configure_telemetry(exporter=telemetry)
        bridge_logging(handle)
        runner = TelemetryMiddleware(run_single, handle)

    try:
        if cfg.algo.kind == "neural-ucb" and len(gamma) > 1:
            grid = run_gamma_grid(cfg, list(gamma), runner, context)
            outcomes = []
            for g, grid_outcomes in grid.items():
                label = f"{dataset}_{cfg.algo_label}_gamma{g:g}"
                _report(grid_outcomes, cfg, label)
                emit(grid_outcomes, cfg.out_dir, cfg.checkpoints, cfg.window, label=label)
                outcomes.extend(grid_outcomes)
            click.echo(f"best gamma: {best_gamma(grid)}")
        else:
            outcomes = run_experiment(cfg, runner, context)
            _report(outcomes, cfg, f"{dataset}_{cfg.algo_label}")
            emit(outcomes, cfg.out_dir, cfg.checkpoints, cfg.window)
    except LoanBanditError as err:
        raise click.ClickException(str(err)) from err
    finally:
        if handle is not None:
            force_flush(handle)

    failures = [o for o in outcomes if isinstance(o, RunFailure)]
    if failures:
        for failure in failures:
            click.echo(f"seed {failure.seed} failed: {failure.error}", err=True)
        click.get_current_context().exit(1)


def _report(outcomes, cfg: ExperimentConfig, label: str) -> None:
    if not any(not isinstance(o, RunFailure) for o in outcomes):
        return
    summary = summarize(outcomes, cfg.checkpoints)
    for stat in summary.checkpoints:
        click.echo(
            f"{label} t={stat.t}: cumulative regret {stat.mean:.3f} ± {stat.sd:.3f} (n={stat.n})"
        )


@cli.command("theory-check")
@click.option("--seed", default=0, type=int)
@click.option("--samples", default=10_000, type=click.IntRange(min=1), help="Pinsker pairs.")
@click.option("--trials", default=10_000, type=click.IntRange(min=1), help="Martingale paths.")
@click.option("--horizon", default=1000, type=click.IntRange(min=2))
@click.option("--delta", default=0.05, type=click.FloatRange(0, 1, min_open=True, max_open=True))
@click.option("--out", "out_file", default=None, type=click.Path(dir_okay=False, path_type=Path))
def theory_check(seed: int, samples: int, trials: int, horizon: int, delta: float, out_file: Path | None):
    """Evaluate the numeric lemmas and print a JSON report; exit 1 on any
    failed check."""
    report = run_all_checks(seed=seed, samples=samples, trials=trials, horizon=horizon, delta=delta)
    text = report.model_dump_json(indent=2)
    if out_file is not None:
        out_file.write_text(text)
    click.echo(text)
    if not report.passed:
        click.get_current_context().exit(1)


if __name__ == "__main__":
    cli()
