"""Dataset ingestion: IDX image/label files, numeric CSV, splits.

Loaders normalize features into [0, 1], keep labels as dense integers
0..C-1, and carry a one-hot target matrix alongside.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataError

__all__ = [
    "LabeledDataset",
    "load_idx",
    "load_csv",
    "one_hot",
    "minmax_normalize",
    "split",
    "write_idx_images",
    "write_idx_labels",
]

IDX_IMAGE_MAGIC = 0x00000803  # unsigned bytes, 3 dimensions
IDX_LABEL_MAGIC = 0x00000801  # unsigned bytes, 1 dimension


@dataclass(frozen=True)
class LabeledDataset:
    samples: np.ndarray  # N x N_f, float in [0, 1]
    labels: np.ndarray  # N, ints 0..C-1
    targets: np.ndarray  # N x C one-hot
    class_count: int

    def __post_init__(self) -> None:
        if self.samples.ndim != 2:
            raise DataError(f"samples must be 2-D, got shape {self.samples.shape}")
        n = self.samples.shape[0]
        if self.labels.shape != (n,):
            raise DataError(f"labels must have shape ({n},), got {self.labels.shape}")
        if self.targets.shape != (n, self.class_count):
            raise DataError(
                f"targets must have shape ({n}, {self.class_count}), got {self.targets.shape}"
            )
        if not np.all(np.isfinite(self.samples)):
            raise DataError("samples contain non-finite entries")
        if n and (self.labels.min() < 0 or self.labels.max() >= self.class_count):
            raise DataError("labels out of range for class_count")
        if not np.array_equal(self.targets.sum(axis=1), np.ones(n)):
            raise DataError("each one-hot row must contain exactly one 1")
        if not np.array_equal(np.argmax(self.targets, axis=1), self.labels):
            raise DataError("targets inconsistent with labels")

    @classmethod
    def from_arrays(cls, samples, labels, class_count: int | None = None) -> "LabeledDataset":
        samples = np.asarray(samples, dtype=float)
        labels = np.asarray(labels, dtype=np.int64)
        if class_count is None:
            class_count = int(labels.max()) + 1 if labels.size else 0
        return cls(samples, labels, one_hot(labels, class_count), class_count)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def subset(self, idx) -> "LabeledDataset":
        """Row subset sharing this dataset's label space."""
        return LabeledDataset.from_arrays(self.samples[idx], self.labels[idx], self.class_count)


def one_hot(labels, C: int) -> np.ndarray:
    """Row i carries a single 1 at column labels[i]."""
    labels = np.asarray(labels, dtype=np.int64)
    if C < 1:
        raise ValueError(f"C must be >= 1, got {C}")
    if labels.size and (labels.min() < 0 or labels.max() >= C):
        raise ValueError(f"labels must lie in 0..{C - 1}")
    out = np.zeros((labels.shape[0], C))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def minmax_normalize(X: np.ndarray) -> np.ndarray:
    """Scale each column into [0, 1]; constant columns map to all zeros."""
    X = np.asarray(X, dtype=float)
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    out = np.zeros_like(X)
    nz = span > 0
    out[:, nz] = (X[:, nz] - lo[nz]) / span[nz]
    return out


def _read_be32(buf: bytes, offset: int, path) -> int:
    if offset + 4 > len(buf):
        raise DataError(f"{path}: truncated header")
    return struct.unpack_from(">I", buf, offset)[0]


def _parse_idx(path, magic_expected: int, ndim: int) -> np.ndarray:
    with open(path, "rb") as f:
        buf = f.read()
    magic = _read_be32(buf, 0, path)
    if magic != magic_expected:
        raise DataError(f"{path}: bad magic 0x{magic:08x}, expected 0x{magic_expected:08x}")
    dims = [_read_be32(buf, 4 + 4 * i, path) for i in range(ndim)]
    payload = buf[4 + 4 * ndim :]
    expected = int(np.prod(dims)) if dims else 0
    if len(payload) != expected:
        raise DataError(f"{path}: payload holds {len(payload)} bytes, header promises {expected}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(dims)


def load_idx(image_path, label_path) -> LabeledDataset:
    """Parse an IDX image tensor plus its label vector (the MNIST layout).

    Big-endian headers: magic 0x00000803 then (count, rows, cols) for the
    images, magic 0x00000801 then (count,) for the labels, unsigned-byte
    payloads. Pixels are scaled by 1/255 and each image flattened row-major.
    """
    images = _parse_idx(image_path, IDX_IMAGE_MAGIC, 3)
    labels = _parse_idx(label_path, IDX_LABEL_MAGIC, 1)
    if images.shape[0] != labels.shape[0]:
        raise DataError(
            f"image/label count mismatch: {images.shape[0]} images vs {labels.shape[0]} labels"
        )
    n = images.shape[0]
    samples = images.reshape(n, -1).astype(float) / 255.0
    return LabeledDataset.from_arrays(samples, labels.astype(np.int64))


def write_idx_images(path, images: np.ndarray) -> None:
    """Inverse of the image half of :func:`load_idx` (uint8, N x rows x cols)."""
    images = np.ascontiguousarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise ValueError(f"images must be 3-D, got shape {images.shape}")
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGE_MAGIC, *images.shape))
        f.write(images.tobytes())


def write_idx_labels(path, labels: np.ndarray) -> None:
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    if labels.ndim != 1:
        raise ValueError(f"labels must be 1-D, got shape {labels.shape}")
    with open(path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABEL_MAGIC, labels.shape[0]))
        f.write(labels.tobytes())


def load_csv(path, label_column: int, has_header: bool) -> LabeledDataset:
    """Numeric CSV with one label column; features min-max normalized per column.

    Labels are re-indexed densely to 0..C-1 in sorted order of the raw values.
    """
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if has_header and rows:
        rows = rows[1:]
    rows = [r for r in rows if r]
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])
    values = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}: row {i + 1} has {len(row)} cells, expected {width}")
        try:
            values[i] = [float(cell) for cell in row]
        except ValueError as exc:
            raise DataError(f"{path}: non-numeric cell in row {i + 1}: {exc}") from exc
    if not (-width <= label_column < width):
        raise DataError(f"label_column {label_column} out of range for {width} columns")
    label_column %= width
    raw_labels = values[:, label_column]
    features = np.delete(values, label_column, axis=1)
    classes, labels = np.unique(raw_labels, return_inverse=True)
    return LabeledDataset.from_arrays(minmax_normalize(features), labels, len(classes))


def split(ds: LabeledDataset, test_fraction: float, seed: int, stratified: bool = False):
    """Deterministic train/test split; stratified mode keeps per-class
    proportions within one sample."""
    if not (0.0 < test_fraction < 1.0):
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n = len(ds)
    if n < 2:
        raise DataError("need at least 2 samples to split")
    rng = np.random.default_rng(seed)
    if stratified:
        test_idx = []
        for c in range(ds.class_count):
            members = np.flatnonzero(ds.labels == c)
            if members.size < 2:
                raise DataError(f"class {c} has {members.size} samples; stratified split needs >= 2")
            members = rng.permutation(members)
            take = int(round(test_fraction * members.size))
            take = min(max(take, 1), members.size - 1)
            test_idx.append(members[:take])
        test_idx = np.sort(np.concatenate(test_idx))
    else:
        perm = rng.permutation(n)
        take = int(round(test_fraction * n))
        take = min(max(take, 1), n - 1)
        test_idx = np.sort(perm[:take])
    mask = np.zeros(n, dtype=bool)
    mask[test_idx] = True
    return ds.subset(~mask), ds.subset(mask)
