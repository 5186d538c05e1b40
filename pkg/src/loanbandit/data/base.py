import typing
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from loanbandit.exceptions import DatasetError, ParameterError
from loanbandit.scorer import LabeledDataset

if typing.TYPE_CHECKING:
    from loanbandit.data.tabular import TabularEncoding

# First match wins; each name is also tried with a .gz suffix.
STANDARD_FILES: dict[str, dict[str, tuple[str, ...]]] = {
    "adult": {"path": ("adult.data", "adult.csv")},
    "bank": {"path": ("bank-additional-full.csv", "bank-full.csv", "bank.csv")},
    "mnist5": {
        "path": ("train-images-idx3-ubyte", "train-images.idx3-ubyte"),
        "labels_path": ("train-labels-idx1-ubyte", "train-labels.idx1-ubyte"),
    },
}
ADULT_TEST_FILES = ("adult.test",)


@dataclass(frozen=True, eq=False)
class LoadedDataset:
    data: LabeledDataset
    encoding: "TabularEncoding | None" = None
    skipped: int = 0

    @property
    def dim(self) -> int:
        return self.data.dim


def split_holdout(
    data: LabeledDataset, fraction: float, rng: np.random.Generator
) -> tuple[LabeledDataset, LabeledDataset]:
    """Random (train, holdout) split with round(n * fraction) holdout rows."""
    if not 0 <= fraction < 1:
        raise ParameterError("holdout fraction must be in [0, 1)")
    order = rng.permutation(len(data))
    n_holdout = int(round(len(data) * fraction))
    return data.subset(order[n_holdout:]), data.subset(order[:n_holdout])


def _find(root: Path, names: tuple[str, ...], kind: str) -> Path | None:
    for directory in (root, root / kind):
        for name in names:
            for candidate in (directory / name, directory / f"{name}.gz"):
                if candidate.is_file():
                    return candidate
    return None


def resolve_dataset_paths(
    kind: str, data_root: Path, include_test: bool = False
) -> dict[str, Path]:
    """Locate the standard UCI / MNIST files for `kind` under `data_root`
    (or `data_root/kind`)."""
    data_root = Path(data_root)
    if kind not in STANDARD_FILES:
        raise DatasetError(f"{kind} is not a file-backed dataset", path=data_root)
    found = {}
    for key, names in STANDARD_FILES[kind].items():
        path = _find(data_root, names, kind)
        if path is None:
            raise DatasetError(f"no {kind} file named any of {', '.join(names)}", path=data_root)
        found[key] = path
    if include_test and kind == "adult":
        test_path = _find(data_root, ADULT_TEST_FILES, kind)
        if test_path is None:
            raise DatasetError("no adult.test file", path=data_root)
        found["test_path"] = test_path
    return found
