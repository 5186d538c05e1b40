import gzip
import logging
from pathlib import Path

import numpy as np

from loanbandit.data.base import LoadedDataset
from loanbandit.exceptions import FormatError
from loanbandit.scorer import LabeledDataset

logger = logging.getLogger(__name__)

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
GZIP_MAGIC = b"\x1f\x8b"
POSITIVE_DIGIT = 5


def _read_bytes(path: Path) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == GZIP_MAGIC:
        raw = gzip.decompress(raw)
    return raw


def _header(raw: bytes, fields: int, magic: int, path: Path) -> np.ndarray:
    size = 4 * fields
    if len(raw) < size:
        raise FormatError("truncated IDX header", path=path)
    header = np.frombuffer(raw, dtype=">u4", count=fields)
    if int(header[0]) != magic:
        raise FormatError(
            f"bad magic number 0x{int(header[0]):08x}, expected 0x{magic:08x}", path=path
        )
    return header


def read_idx_images(path: Path) -> np.ndarray:
    """(n, rows * cols) uint8 pixel matrix."""
    raw = _read_bytes(path)
    _, n, rows, cols = (int(v) for v in _header(raw, 4, IMAGES_MAGIC, path))
    pixels = np.frombuffer(raw, dtype=np.uint8, offset=16)
    if pixels.size != n * rows * cols:
        raise FormatError(
            f"header declares {n} images of {rows}x{cols} but the body holds {pixels.size} bytes",
            path=path,
        )
    return pixels.reshape(n, rows * cols)


def read_idx_labels(path: Path) -> np.ndarray:
    raw = _read_bytes(path)
    _, n = (int(v) for v in _header(raw, 2, LABELS_MAGIC, path))
    labels = np.frombuffer(raw, dtype=np.uint8, offset=8)
    if labels.size != n:
        raise FormatError(f"header declares {n} labels but the body holds {labels.size}", path=path)
    return labels


def load_mnist(images_path: Path, labels_path: Path) -> LoadedDataset:
    """Pixels scaled to [0, 1]; label 1 iff the digit is a 5."""
    images = read_idx_images(images_path)
    digits = read_idx_labels(labels_path)
    if images.shape[0] != digits.size:
        raise FormatError(
            f"{images.shape[0]} images but {digits.size} labels", path=labels_path
        )
    data = LabeledDataset(
        images.astype(float) / 255.0, (digits == POSITIVE_DIGIT).astype(float)
    )
    logger.info(
        "loaded mnist dataset",
        extra={"path": str(images_path), "rows": len(data), "dim": data.dim},
    )
    return LoadedDataset(data=data)
