"""Bundled models: uniform, nearest-centroid, and a stub to copy.

A model is a callable mapping a (n, T) float array to an (n, C) array of
probability rows. This package is deliberately standalone: the
nearest-centroid implementation here is an independent twin of any
in-process baseline a pipeline may carry, which is exactly what makes
adapter-vs-in-process comparisons meaningful.
"""

from __future__ import annotations

import numpy as np


class UniformModel:
    """Every row is 1/C; handy for wiring checks."""

    def __init__(self, class_count: int):
        if class_count < 1:
            raise ValueError("class_count must be positive")
        self.class_count = class_count

    def __call__(self, batch: np.ndarray) -> np.ndarray:
        return np.full((batch.shape[0], self.class_count), 1.0 / self.class_count)


def load_ucr(path) -> tuple[np.ndarray, np.ndarray]:
    """UCR-style rows: integer label, then values; tab or comma separated."""
    labels, rows = [], []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            fields = [f for f in line.replace(",", "\t").split() if f]
            labels.append(int(float(fields[0])))
            rows.append([float(v) for v in fields[1:]])
    if not rows:
        raise ValueError(f"{path} contains no instances")
    return np.array(labels), np.array(rows)


def standardize_rows(values: np.ndarray) -> np.ndarray:
    """Per-row zero mean, unit population variance; constant rows to zeros."""
    mean = values.mean(axis=1, keepdims=True)
    std = values.std(axis=1, keepdims=True)
    out = np.zeros_like(values)
    ok = std[:, 0] > 0
    out[ok] = (values[ok] - mean[ok]) / std[ok]
    return out


class NearestCentroidModel:
    """Softmax over negative Euclidean distances to per-class mean series.

    Fitted on a UCR file (standardised per instance); classes are the
    sorted distinct labels of the file.
    """

    def __init__(self, centroids: np.ndarray, temperature: float):
        if temperature <= 0:
            raise ValueError("temperature must be positive")
        self.centroids = centroids
        self.temperature = temperature
        self.class_count = centroids.shape[0]

    @classmethod
    def fit(cls, path, temperature: float = 1.0) -> "NearestCentroidModel":
        labels, rows = load_ucr(path)
        rows = standardize_rows(rows)
        centroids = [
            rows[labels == label].mean(axis=0) for label in sorted(set(labels.tolist()))
        ]
        return cls(np.array(centroids), temperature)

    def __call__(self, batch: np.ndarray) -> np.ndarray:
        if batch.shape[1] != self.centroids.shape[1]:
            raise ValueError(
                f"series length {batch.shape[1]} does not match fitted length "
                f"{self.centroids.shape[1]}"
            )
        diff = batch[:, None, :] - self.centroids[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=2))
        logits = -dist / self.temperature
        logits -= logits.max(axis=1, keepdims=True)
        expd = np.exp(logits)
        return expd / expd.sum(axis=1, keepdims=True)


class TrainedModelStub:
    """Replace the body of __call__ with your network's inference.

    Keep the contract: rows of probabilities over `class_count` classes,
    finite, each summing to 1.
    """

    def __init__(self, class_count: int):
        self.class_count = class_count
        # e.g. self.net = load_my_network(weights_path)

    def __call__(self, batch: np.ndarray) -> np.ndarray:
        raise NotImplementedError(
            "plug a trained classifier here: batch (n, T) -> probabilities (n, C)"
        )
