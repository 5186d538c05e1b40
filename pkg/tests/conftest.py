import gzip

import numpy as np
import pytest

from loanbandit.config import Architecture, DatasetSpec, ExperimentConfig, TrainConfig
from loanbandit.scorer import LabeledDataset, ScorerParams

ADULT_ROWS = [
    "39, State-gov, 77516, Bachelors, 13, Never-married, Adm-clerical, Not-in-family, White, Male, 2174, 0, 40, United-States, <=50K",
    "50, Self-emp-not-inc, 83311, Bachelors, 13, Married-civ-spouse, Exec-managerial, Husband, White, Male, 0, 0, 13, United-States, <=50K",
    "38, Private, 215646, HS-grad, 9, Divorced, Handlers-cleaners, Not-in-family, White, Male, 0, 0, 40, United-States, <=50K",
    "52, Self-emp-not-inc, 209642, HS-grad, 9, Married-civ-spouse, Exec-managerial, Husband, White, Male, 0, 0, 45, United-States, >50K",
    "31, Private, 45781, Masters, 14, Never-married, Prof-specialty, Not-in-family, White, Female, 14084, 0, 50, United-States, >50K",
    "54, ?, 180211, Some-college, 10, Married-civ-spouse, ?, Husband, Asian-Pac-Islander, Male, 0, 0, 60, South, >50K",
]

ADULT_TEST_ROWS = [
    "|1x3 Cross validator",
    "25, Private, 226802, 11th, 7, Never-married, Machine-op-inspct, Own-child, Black, Male, 0, 0, 40, United-States, <=50K.",
    "44, Private, 160323, Some-college, 10, Married-civ-spouse, Machine-op-inspct, Husband, Black, Male, 7688, 0, 40, United-States, >50K.",
]

BANK_ROWS = [
    '"age";"job";"marital";"balance";"duration";"y"',
    '58;"management";"married";2143;261;"no"',
    '44;"technician";"single";29;151;"no"',
    '33;"entrepreneur";"married";2;76;"yes"',
    '47;"blue-collar";"married";1506;92;"no"',
    '33;"unknown";"single";1;198;"yes"',
]


def write_lines(path, lines, compress=False):
    text = "\n".join(lines) + "\n"
    if compress:
        path.write_bytes(gzip.compress(text.encode()))
    else:
        path.write_text(text)
    return path


def idx_images(images: np.ndarray) -> bytes:
    n, rows, cols = images.shape
    header = np.array([0x803, n, rows, cols], dtype=">u4").tobytes()
    return header + images.astype(np.uint8).tobytes()


def idx_labels(labels: np.ndarray) -> bytes:
    header = np.array([0x801, labels.size], dtype=">u4").tobytes()
    return header + labels.astype(np.uint8).tobytes()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def linear_arch():
    return Architecture.linear(2)


@pytest.fixture
def mlp_arch():
    return Architecture.mlp(3, 5, 4)


@pytest.fixture
def separable_data(rng):
    """Two well-separated 2-d blobs; label 1 on the right."""
    X = np.vstack([rng.normal((2.0, 0.0), 0.3, (40, 2)), rng.normal((-2.0, 0.0), 0.3, (40, 2))])
    y = np.concatenate([np.ones(40), np.zeros(40)])
    return LabeledDataset(X, y)


@pytest.fixture
def newton_cfg():
    return TrainConfig(optimizer="newton", steps=50, l2_lambda=1e-3)


@pytest.fixture
def adult_file(tmp_path):
    return write_lines(tmp_path / "adult.data", ADULT_ROWS)


@pytest.fixture
def adult_test_file(tmp_path):
    return write_lines(tmp_path / "adult.test", ADULT_TEST_ROWS)


@pytest.fixture
def bank_file(tmp_path):
    return write_lines(tmp_path / "bank-full.csv", BANK_ROWS)


@pytest.fixture
def mnist_files(tmp_path):
    images = np.zeros((6, 2, 2), dtype=np.uint8)
    images[:, 0, 0] = np.arange(6) * 50
    digits = np.array([5, 0, 5, 1, 2, 5], dtype=np.uint8)
    images_path = tmp_path / "train-images-idx3-ubyte"
    labels_path = tmp_path / "train-labels-idx1-ubyte"
    images_path.write_bytes(idx_images(images))
    labels_path.write_bytes(idx_labels(digits))
    return images_path, labels_path


@pytest.fixture
def synth_config(tmp_path):
    """Small oracle-mode experiment with a cheap linear learner."""
    return ExperimentConfig(
        dataset=DatasetSpec(kind="synth", d=2, tau=0.2),
        T=30,
        batch_size=4,
        seeds=2,
        train=TrainConfig(optimizer="newton", steps=10, l2_lambda=1e-2),
        out_dir=tmp_path / "results",
        checkpoints=(10, 20),
        window=5,
    )


@pytest.fixture
def linear_params(linear_arch):
    return ScorerParams(linear_arch, np.array([1.0, -0.5, 0.25]))
