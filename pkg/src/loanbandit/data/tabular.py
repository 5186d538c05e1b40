import gzip
import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from loanbandit.data.base import LoadedDataset
from loanbandit.exceptions import DatasetParseError, SchemaMismatchError
from loanbandit.scorer import LabeledDataset

logger = logging.getLogger(__name__)

MISSING_MARKER = "?"
COMMENT_MARKER = "|"
GZIP_MAGIC = b"\x1f\x8b"

ADULT_COLUMNS = (
    "age",
    "workclass",
    "fnlwgt",
    "education",
    "education-num",
    "marital-status",
    "occupation",
    "relationship",
    "race",
    "sex",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
    "native-country",
    "income",
)
ADULT_CONTINUOUS = (
    "age",
    "fnlwgt",
    "education-num",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
)
ADULT_LABELS = {">50K": 1.0, "<=50K": 0.0}

BANK_NUMERIC = (
    "age",
    "balance",
    "day",
    "duration",
    "campaign",
    "pdays",
    "previous",
    "emp.var.rate",
    "cons.price.idx",
    "cons.conf.idx",
    "euribor3m",
    "nr.employed",
)
BANK_LABELS = {"yes": 1.0, "no": 0.0}


@dataclass(frozen=True, eq=False)
class TabularEncoding:
    """z-score for continuous columns, one-hot (sorted categories) for the rest.
    Continuous columns come first in the encoded row."""

    continuous: tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray
    categories: dict[str, tuple[str, ...]]

    @classmethod
    def fit(
        cls,
        frame: pd.DataFrame,
        continuous: tuple[str, ...],
        categorical: tuple[str, ...],
        normalize: bool = True,
    ) -> "TabularEncoding":
        values = frame[list(continuous)].to_numpy(dtype=float)
        if normalize and len(values):
            means = values.mean(axis=0)
            stds = values.std(axis=0)
            stds[stds == 0] = 1.0
        else:
            means = np.zeros(len(continuous))
            stds = np.ones(len(continuous))
        categories = {col: tuple(sorted(frame[col].unique())) for col in categorical}
        return cls(continuous, means, stds, categories)

    @property
    def feature_names(self) -> list[str]:
        names = list(self.continuous)
        for col, cats in self.categories.items():
            names.extend(f"{col}={cat}" for cat in cats)
        return names

    @property
    def dim(self) -> int:
        return len(self.feature_names)

    def encode(self, frame: pd.DataFrame) -> np.ndarray:
        blocks = [(frame[list(self.continuous)].to_numpy(dtype=float) - self.means) / self.stds]
        for col, cats in self.categories.items():
            column = frame[col].to_numpy(dtype=object)
            blocks.append((column[:, None] == np.array(cats, dtype=object)[None, :]).astype(float))
        return np.hstack(blocks)

    def inverse(self, features: np.ndarray) -> pd.DataFrame:
        features = np.atleast_2d(features)
        k = len(self.continuous)
        out = {
            col: features[:, i] * self.stds[i] + self.means[i]
            for i, col in enumerate(self.continuous)
        }
        offset = k
        for col, cats in self.categories.items():
            block = features[:, offset : offset + len(cats)]
            out[col] = [cats[j] for j in block.argmax(axis=1)]
            offset += len(cats)
        return pd.DataFrame(out)


def _parse_error_row(err: Exception) -> int:
    match = re.search(r"line (\d+)", str(err))
    return int(match.group(1)) if match else -1


def _record_lines(path: Path) -> np.ndarray:
    """1-based file line of every record pandas keeps: comment and blank
    lines are skipped without being counted."""
    raw = Path(path).read_bytes()
    if raw[:2] == GZIP_MAGIC:
        raw = gzip.decompress(raw)
    lines = raw.decode("utf-8", errors="replace").splitlines()
    return np.array(
        [n for n, line in enumerate(lines, start=1) if line.strip() and not line.startswith(COMMENT_MARKER)],
        dtype=np.int64,
    )


def _read_csv(path: Path, sep: str, header: int | None) -> pd.DataFrame:
    try:
        frame = pd.read_csv(
            path,
            sep=sep,
            header=header,
            dtype=str,
            skipinitialspace=True,
            keep_default_na=False,
            comment=COMMENT_MARKER,
            compression="infer",
        )
    except pd.errors.ParserError as err:
        raise DatasetParseError(str(err).strip(), row=_parse_error_row(err), path=path) from err
    for col in frame.columns:
        frame[col] = frame[col].str.strip()
    return frame


def _numeric(frame: pd.DataFrame, columns: tuple[str, ...], lines: np.ndarray, path: Path) -> None:
    for col in columns:
        converted = pd.to_numeric(frame[col], errors="coerce")
        bad = np.flatnonzero(converted.isna().to_numpy())
        if bad.size:
            row = int(lines[frame.index[bad[0]]])
            raise DatasetParseError(
                f"column {col!r} has non-numeric value {frame[col].iloc[bad[0]]!r}",
                row=row,
                path=path,
            )
        frame[col] = converted.astype(float)


def _labels(series: pd.Series, mapping: dict[str, float], lines: np.ndarray, path: Path) -> np.ndarray:
    mapped = series.map(mapping)
    bad = np.flatnonzero(mapped.isna().to_numpy())
    if bad.size:
        raise DatasetParseError(
            f"unknown label {series.iloc[bad[0]]!r}",
            row=int(lines[series.index[bad[0]]]),
            path=path,
        )
    return mapped.to_numpy(dtype=float)


def _read_adult_file(path: Path) -> tuple[pd.DataFrame, np.ndarray]:
    frame = _read_csv(path, sep=",", header=None)
    if frame.shape[1] != len(ADULT_COLUMNS):
        raise SchemaMismatchError(
            f"expected {len(ADULT_COLUMNS)} columns, found {frame.shape[1]}", path=path
        )
    # the UCI file has no header row; a hand-made one is dropped and the index
    # keeps counting records from 0
    if len(frame) and frame.iloc[0, 0].lower() == "age":
        frame = frame.iloc[1:].copy()
    frame.columns = list(ADULT_COLUMNS)
    frame["income"] = frame["income"].str.rstrip(".")
    return frame, _record_lines(path)


def _drop_missing(frame: pd.DataFrame) -> tuple[pd.DataFrame, int]:
    missing = (frame == MISSING_MARKER).any(axis=1)
    return frame[~missing].copy(), int(missing.sum())


def load_adult(path: Path, test_path: Path | None = None, normalize: bool = True) -> LoadedDataset:
    """UCI Adult: label 1 iff income > 50K; rows holding '?' are dropped."""
    frames = []
    skipped = 0
    for file in [path] if test_path is None else [path, test_path]:
        frame, lines = _read_adult_file(Path(file))
        frame, dropped = _drop_missing(frame)
        skipped += dropped
        _numeric(frame, ADULT_CONTINUOUS, lines, Path(file))
        frame = frame.assign(label=_labels(frame["income"], ADULT_LABELS, lines, Path(file)))
        frames.append(frame)
    frame = pd.concat(frames, ignore_index=True)

    categorical = tuple(c for c in ADULT_COLUMNS if c not in ADULT_CONTINUOUS and c != "income")
    encoding = TabularEncoding.fit(frame, ADULT_CONTINUOUS, categorical, normalize=normalize)
    data = LabeledDataset(encoding.encode(frame), frame["label"].to_numpy(dtype=float))
    logger.info(
        "loaded adult dataset",
        extra={"path": str(path), "rows": len(data), "skipped": skipped, "dim": encoding.dim},
    )
    return LoadedDataset(data=data, encoding=encoding, skipped=skipped)


def load_bank(path: Path, normalize: bool = True, sep: str = ";") -> LoadedDataset:
    """UCI Bank marketing: label 1 iff the 'y' column is "yes"."""
    path = Path(path)
    frame = _read_csv(path, sep=sep, header=0)
    if "y" not in frame.columns:
        raise SchemaMismatchError("missing label column 'y'", path=path)
    continuous = tuple(c for c in frame.columns if c in BANK_NUMERIC)
    if not continuous:
        raise SchemaMismatchError("no known numeric columns", path=path)
    categorical = tuple(c for c in frame.columns if c not in BANK_NUMERIC and c != "y")

    frame, skipped = _drop_missing(frame)
    # the first kept line is the header
    lines = _record_lines(path)[1:]
    _numeric(frame, continuous, lines, path)
    labels = _labels(frame["y"], BANK_LABELS, lines, path)

    encoding = TabularEncoding.fit(frame, continuous, categorical, normalize=normalize)
    data = LabeledDataset(encoding.encode(frame), labels)
    logger.info(
        "loaded bank dataset",
        extra={"path": str(path), "rows": len(data), "skipped": skipped, "dim": encoding.dim},
    )
    return LoadedDataset(data=data, encoding=encoding, skipped=skipped)
