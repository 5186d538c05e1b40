from loanbandit.config import DatasetSpec
from loanbandit.data.base import LoadedDataset, resolve_dataset_paths, split_holdout
from loanbandit.data.mnist import load_mnist
from loanbandit.data.synthetic import (
    LogisticScenario,
    XorClusters,
    gen_synthetic_logistic,
    gen_xor,
)
from loanbandit.data.tabular import TabularEncoding, load_adult, load_bank
from loanbandit.exceptions import DatasetError


def load_dataset(spec: DatasetSpec) -> LoadedDataset:
    """Load a file-backed dataset described by `spec`."""
    if spec.kind == "adult":
        return load_adult(spec.path, test_path=spec.test_path, normalize=spec.normalize)
    if spec.kind == "bank":
        return load_bank(spec.path, normalize=spec.normalize)
    if spec.kind == "mnist5":
        return load_mnist(spec.path, spec.labels_path)
    raise DatasetError(f"{spec.kind} is generated, not loaded")


__all__ = [
    "LoadedDataset",
    "LogisticScenario",
    "TabularEncoding",
    "XorClusters",
    "gen_synthetic_logistic",
    "gen_xor",
    "load_adult",
    "load_bank",
    "load_dataset",
    "load_mnist",
    "resolve_dataset_paths",
    "split_holdout",
]
