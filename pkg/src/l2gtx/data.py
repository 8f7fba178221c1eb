"""Loading, standardising and subsampling labelled univariate series.

Datasets are UCR-style delimited text: one instance per line, an integer
class label first, then T values, tab- or comma-separated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataFormatError(ValueError):
    """Malformed dataset file; `line` is 1-based when it applies."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Dataset:
    """Fixed-length labelled series: values (m, T), labels in 1..C."""

    values: np.ndarray
    labels: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] < 2:
            raise ValueError("dataset needs 2-D values with length >= 2")
        if self.labels.shape != (self.values.shape[0],):
            raise ValueError("labels must match the instance count")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("dataset values must be finite")
        present = np.unique(self.labels)
        if not np.array_equal(present, np.arange(1, present.size + 1)):
            raise ValueError("labels must cover 1..C contiguously")

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]

    @property
    def class_count(self) -> int:
        return int(self.labels.max())

    def class_indices(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)


def _split_line(line: str) -> list[str]:
    delim = "\t" if "\t" in line else ","
    return [f for f in line.strip().split(delim) if f != ""]


def load_ucr_tsv(path, name: str | None = None) -> Dataset:
    """Read a UCR-style file; labels are remapped to contiguous 1..C.

    The delimiter is auto-detected per line among tab and comma. Ragged rows,
    non-numeric (or non-finite) cells and empty files raise DataFormatError
    naming the offending line.
    """
    path = Path(path)
    raw_labels: list[float] = []
    rows: list[list[float]] = []
    width: int | None = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fields = _split_line(line)
            if len(fields) < 2:
                raise DataFormatError("expected a label and at least one value", lineno)
            try:
                numbers = [float(f) for f in fields]
            except ValueError as exc:
                raise DataFormatError(f"non-numeric cell ({exc})", lineno) from None
            if not all(np.isfinite(numbers)):
                raise DataFormatError("non-finite cell", lineno)
            label = numbers[0]
            if label != int(label):
                raise DataFormatError(f"non-integer label {fields[0]!r}", lineno)
            if width is None:
                width = len(numbers) - 1
            elif len(numbers) - 1 != width:
                raise DataFormatError(
                    f"row has {len(numbers) - 1} values, expected {width}", lineno
                )
            raw_labels.append(label)
            rows.append(numbers[1:])
    if not rows:
        raise DataFormatError(f"{path} contains no instances")
    classes = sorted(set(raw_labels))
    remap = {c: i + 1 for i, c in enumerate(classes)}
    labels = np.array([remap[c] for c in raw_labels], dtype=np.int64)
    return Dataset(np.array(rows, dtype=np.float64), labels, name or path.stem)


def save_ucr_tsv(dataset: Dataset, path) -> None:
    """Write tab-separated rows with full (round-trip exact) precision."""
    with open(path, "w", encoding="ascii") as fh:
        for label, row in zip(dataset.labels, dataset.values):
            fh.write("\t".join([str(int(label))] + [repr(float(v)) for v in row]))
            fh.write("\n")


def standardize(dataset: Dataset) -> Dataset:
    """Shift/scale each series independently to mean 0, population variance 1.

    Constant series map to all-zeros rather than erroring.
    """
    return Dataset(
        standardize_values(dataset.values), dataset.labels.copy(), dataset.name
    )


def standardize_values(values: np.ndarray) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(values, dtype=np.float64))
    mean = arr.mean(axis=1, keepdims=True)
    std = arr.std(axis=1, keepdims=True)
    out = np.zeros_like(arr)
    nonconstant = std[:, 0] > 0
    out[nonconstant] = (arr[nonconstant] - mean[nonconstant]) / std[nonconstant]
    return out if np.asarray(values).ndim == 2 else out[0]


@dataclass(frozen=True)
class InstanceSet:
    """Per-class index sample: exactly `per_class_count` indices per class."""

    by_class: dict[int, np.ndarray]
    per_class_count: int

    @property
    def total(self) -> int:
        return self.per_class_count * len(self.by_class)

    @property
    def indices(self) -> list[int]:
        return [int(i) for label in sorted(self.by_class) for i in self.by_class[label]]


def sample_per_class(dataset: Dataset, n_inst: int, seed) -> InstanceSet:
    """Sample n_inst indices per class uniformly without replacement."""
    if n_inst < 1:
        raise ValueError("n_inst must be positive")
    rng = np.random.default_rng(seed)
    by_class: dict[int, np.ndarray] = {}
    for label in range(1, dataset.class_count + 1):
        pool = dataset.class_indices(label)
        if pool.size < n_inst:
            raise ValueError(
                f"class {label} has {pool.size} instances, needs {n_inst}"
            )
        chosen = rng.choice(pool, size=n_inst, replace=False)
        by_class[label] = np.sort(chosen)
    return InstanceSet(by_class, n_inst)


def synthetic_ecg_dataset(
    n_per_class: int = 100, length: int = 96, seed: int = 7, name: str = "ECG200"
) -> Dataset:
    """Deterministic two-class heartbeat-like dataset.

    A stand-in with the shape statistics of the ECG200 benchmark (200
    instances, 2 classes, T=96): class 1 has a sharp early upstroke and a
    pronounced late dip, class 2 a blunted upstroke with a wandering
    baseline. Used by the bundled demos and the test suite.
    """
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, length)
    rows = []
    labels = []
    for label in (1, 2):
        for _ in range(n_per_class):
            shift = rng.uniform(-0.03, 0.03)
            amp = rng.uniform(0.85, 1.15)
            if label == 1:
                base = (
                    1.6 * amp * np.exp(-((t - 0.22 - shift) ** 2) / 0.0012)
                    - 0.9 * amp * np.exp(-((t - 0.55 - shift) ** 2) / 0.004)
                    + 0.35 * np.sin(2 * np.pi * (t - shift))
                )
            else:
                base = (
                    0.8 * amp * np.exp(-((t - 0.30 - shift) ** 2) / 0.006)
                    - 0.4 * amp * np.exp(-((t - 0.62 - shift) ** 2) / 0.010)
                    + 0.55 * np.sin(4 * np.pi * (t - shift))
                )
            rows.append(base + rng.normal(0.0, 0.12, size=length))
            labels.append(label)
    return Dataset(np.array(rows), np.array(labels, dtype=np.int64), name)
