import math
import os
import tomllib
from pathlib import Path
from typing import Annotated, Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from loanbandit.exceptions import ConfigError

DATA_ROOT_ENV = "LOANBANDIT_DATA_ROOT"

REAL_DATASETS = ("adult", "bank", "mnist5")


class Architecture(BaseModel):
    """Shape of the scorer f_theta: a linear map or a two-hidden-layer tanh MLP."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["linear", "mlp"] = "mlp"
    input_dim: int = Field(gt=0)
    hidden: tuple[int, int] = (40, 40)
    bias: bool = True

    @classmethod
    def linear(cls, input_dim: int, bias: bool = True) -> "Architecture":
        return cls(kind="linear", input_dim=input_dim, bias=bias)

    @classmethod
    def mlp(cls, input_dim: int, h1: int = 40, h2: int = 40) -> "Architecture":
        return cls(kind="mlp", input_dim=input_dim, hidden=(h1, h2))

    def shapes(self) -> list[tuple[str, tuple[int, ...]]]:
        d = self.input_dim
        if self.kind == "linear":
            shapes: list[tuple[str, tuple[int, ...]]] = [("w", (d,))]
            if self.bias:
                shapes.append(("b", (1,)))
            return shapes
        h1, h2 = self.hidden
        return [
            ("W1", (h1, d)),
            ("b1", (h1,)),
            ("W2", (h2, h1)),
            ("b2", (h2,)),
            ("w3", (h2,)),
            ("b3", (1,)),
        ]

    @property
    def n_params(self) -> int:
        return sum(math.prod(shape) for _, shape in self.shapes())


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    steps: int = Field(default=100, ge=0)
    learning_rate: float = Field(default=1e-3, gt=0)
    l2_lambda: float = Field(default=1e-4, ge=0)
    optimizer: Literal["sgd", "adam", "newton"] = "adam"
    # None means full batch
    minibatch: int | None = Field(default=None, ge=1)
    tolerance: float = Field(default=1e-8, gt=0)


class PlotConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["plot"] = "plot"
    epsilon: float = Field(default=0.05, ge=0, le=1)
    weight_mode: Literal["constant", "theory"] = "constant"
    weight: float = Field(default=1.0, ge=0)
    # None: infinite in constant mode, tau^2 / (128 L) in theory mode
    radius: float | None = Field(default=None, gt=0)
    batch_size: int = Field(default=32, ge=1)
    tau: float = Field(default=0.2, gt=0, lt=1)
    delta_prime: float = Field(default=0.1, gt=0, lt=1)
    lipschitz: float = Field(default=1.0, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _theory_mode_forces_schedule(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("weight_mode") == "theory":
            return {**data, "batch_size": 1, "epsilon": 1.0}
        return data

    @property
    def effective_radius(self) -> float:
        if self.radius is not None:
            return self.radius
        if self.weight_mode == "theory":
            return self.tau**2 / (128 * self.lipschitz)
        return math.inf


class BaselineConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["greedy", "eps-greedy", "neural-ucb", "accept-all"] = "greedy"
    eps0: float = Field(default=0.1, gt=0, le=1)
    eps_floor: float = Field(default=0.001, gt=0, le=1)
    horizon: int = Field(default=2000, ge=1)
    gamma: float = Field(default=1.0, gt=0)
    train: TrainConfig | None = None

    @model_validator(mode="after")
    def _floor_below_start(self) -> "BaselineConfig":
        if self.eps_floor > self.eps0:
            raise ValueError("eps_floor must not exceed eps0")
        return self

    @property
    def label(self) -> str:
        if self.kind == "neural-ucb":
            return "neural-ucb-diag-surrogate"
        return self.kind


class TrapScenario(BaseModel):
    """Two tight clusters on a line: a positive one holding planted negative
    labels, and a negative one. f*(x) = slope * x."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    planted: int = Field(default=20, ge=1)
    trap_prob: float = Field(default=0.2, gt=0, lt=1)
    center: float = Field(default=1.0, gt=0)
    spread: float = Field(default=0.05, gt=0)
    slope: float = Field(default=4.0, gt=0)


class DatasetSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["adult", "bank", "mnist5", "synth", "xor", "trap"]
    path: Path | None = None
    labels_path: Path | None = None
    test_path: Path | None = None
    normalize: bool = True
    cycle: Literal["replacement", "reshuffle", "none"] = "replacement"
    holdout: float = Field(default=0.2, ge=0, lt=1)
    # synthetic logistic stream
    d: int = Field(default=2, ge=1)
    tau: float = Field(default=0.2, gt=0, lt=1)
    lipschitz: float = Field(default=1.0, gt=0)
    bound: float = Field(default=1.0, gt=0)
    generator_seed: int = 0
    # xor clusters
    positive_centers: tuple[tuple[float, float], ...] = ((0.0, 0.0), (5.0, 5.0))
    trap: TrapScenario = TrapScenario()

    @model_validator(mode="after")
    def _real_data_needs_files(self) -> "DatasetSpec":
        if self.kind not in REAL_DATASETS:
            return self
        required = [self.path]
        if self.kind == "mnist5":
            required.append(self.labels_path)
        for path in required:
            if path is None or not Path(path).is_file():
                raise ValueError(f"{self.kind} requires an existing file, got {path}")
        return self

    @property
    def is_real(self) -> bool:
        return self.kind in REAL_DATASETS


AlgoConfig = Annotated[PlotConfig | BaselineConfig, Field(discriminator="kind")]


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dataset: DatasetSpec
    algo: AlgoConfig = PlotConfig()
    T: int = Field(default=2000, ge=1)
    batch_size: int = Field(default=32, ge=1)
    seeds: int = Field(default=5, ge=1)
    seed_offset: int = 0
    train: TrainConfig = TrainConfig()
    baseline_train: TrainConfig = TrainConfig(steps=1000, learning_rate=1e-2, minibatch=256)
    # explicit architecture; otherwise arch_kind (or the dataset default) with `hidden`
    arch: Architecture | None = None
    arch_kind: Literal["linear", "mlp"] | None = None
    hidden: tuple[int, int] = (40, 40)
    out_dir: Path = Path("results")
    checkpoints: tuple[int, ...] = (500, 1000, 2000)
    window: int = Field(default=100, ge=1)
    # holdout accuracy every N steps; 0 evaluates only after the last step
    eval_every: int = Field(default=0, ge=0)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _sync_batch_size(self) -> "ExperimentConfig":
        if isinstance(self.algo, PlotConfig):
            if self.algo.weight_mode == "theory":
                self.batch_size = 1
            if self.algo.batch_size != self.batch_size:
                self.algo = self.algo.model_copy(update={"batch_size": self.batch_size})
        return self

    @property
    def algo_label(self) -> str:
        if isinstance(self.algo, PlotConfig):
            return "plot-theory" if self.algo.weight_mode == "theory" else "plot"
        return self.algo.label

    def seed_list(self) -> list[int]:
        return [self.seed_offset + i for i in range(self.seeds)]


class ProjectSettings(BaseModel):
    data_root: Path | None = None
    out_dir: Path = Path("results")
    workers: int = Field(default=1, ge=1)


def get_project_settings(pyproject: Path = Path("pyproject.toml")) -> ProjectSettings:
    """Defaults from `[tool.loanbandit]`, with the data root overridable
    through the environment."""
    table: dict[str, Any] = {}
    if pyproject.is_file():
        with open(pyproject, "rb") as f:
            data = tomllib.load(f)
        table = dict(data.get("tool", {}).get("loanbandit", {}))

    if os.environ.get(DATA_ROOT_ENV):
        table["data_root"] = os.environ[DATA_ROOT_ENV]

    return build(ProjectSettings, table)


def build(model: type[BaseModel], data: dict[str, Any]) -> Any:
    """Validate `data` into `model`, surfacing failures as ConfigError."""
    try:
        return model.model_validate(data)
    except ValidationError as err:
        raise ConfigError(
            [f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in err.errors()]
        ) from err
