import numpy as np
import pytest

from loanbandit.data import resolve_dataset_paths, split_holdout
from loanbandit.exceptions import DatasetError, ParameterError
from loanbandit.scorer import LabeledDataset


def test_split_holdout_sizes_and_disjointness(rng):
    data = LabeledDataset(np.arange(20, dtype=float).reshape(10, 2), np.zeros(10))
    train, holdout = split_holdout(data, 0.3, rng)
    assert len(train) == 7
    assert len(holdout) == 3
    rows = np.concatenate([train.features[:, 0], holdout.features[:, 0]])
    assert sorted(rows) == list(np.arange(0, 20, 2, dtype=float))


def test_split_holdout_zero_fraction(rng):
    data = LabeledDataset(np.zeros((4, 1)), np.zeros(4))
    train, holdout = split_holdout(data, 0.0, rng)
    assert len(train) == 4
    assert len(holdout) == 0


def test_split_holdout_bad_fraction(rng):
    with pytest.raises(ParameterError):
        split_holdout(LabeledDataset(np.zeros((4, 1)), np.zeros(4)), 1.0, rng)


def test_resolve_from_subdirectory_and_gzip(tmp_path):
    (tmp_path / "mnist5").mkdir()
    (tmp_path / "mnist5" / "train-images-idx3-ubyte.gz").write_bytes(b"")
    (tmp_path / "train-labels.idx1-ubyte").write_bytes(b"")
    found = resolve_dataset_paths("mnist5", tmp_path)
    assert found["path"].name == "train-images-idx3-ubyte.gz"
    assert found["labels_path"].name == "train-labels.idx1-ubyte"


def test_resolve_adult_with_test_file(tmp_path):
    (tmp_path / "adult.data").write_text("")
    with pytest.raises(DatasetError, match="adult.test"):
        resolve_dataset_paths("adult", tmp_path, include_test=True)
    (tmp_path / "adult.test").write_text("")
    found = resolve_dataset_paths("adult", tmp_path, include_test=True)
    assert found == {"path": tmp_path / "adult.data", "test_path": tmp_path / "adult.test"}


def test_resolve_missing_file(tmp_path):
    with pytest.raises(DatasetError) as exc:
        resolve_dataset_paths("bank", tmp_path)
    assert exc.value.path == tmp_path
