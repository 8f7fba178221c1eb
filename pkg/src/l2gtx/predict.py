"""Black-box prediction interfaces.

A predictor is anything with a `class_count` and a `predict_proba(batch)`
returning one probability row per series. Two implementations live here:
a nearest-centroid baseline for desk-scale runs, and a client for external
models spoken to over line-delimited JSON on a child process's stdio.
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

PROBABILITY_ATOL = 1e-6
DEFAULT_BATCH_CAP = 256
DEFAULT_TIMEOUT = 30.0


class ProtocolError(RuntimeError):
    """The external predictor violated the wire contract."""


class TransportError(RuntimeError):
    """The external predictor process died or stopped responding."""


@runtime_checkable
class Predictor(Protocol):
    class_count: int

    def predict_proba(self, batch: np.ndarray) -> np.ndarray: ...


def validate_probabilities(rows, n_rows: int, class_count: int) -> np.ndarray:
    """Check row count, shape, range and row sums; returns a float64 matrix."""
    probs = np.asarray(rows, dtype=np.float64)
    if probs.ndim != 2 or probs.shape != (n_rows, class_count):
        raise ProtocolError(
            f"probability matrix has shape {probs.shape}, expected ({n_rows}, {class_count})"
        )
    if not np.all(np.isfinite(probs)):
        raise ProtocolError("probability matrix contains non-finite entries")
    if probs.min() < 0.0 or probs.max() > 1.0:
        row = int(np.argmax((probs < 0).any(axis=1) | (probs > 1).any(axis=1)))
        raise ProtocolError(f"probabilities outside [0, 1] in row {row}")
    sums = probs.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > PROBABILITY_ATOL)
    if bad.size:
        raise ProtocolError(
            f"row {int(bad[0])} sums to {sums[bad[0]]:.6f}, expected 1"
        )
    return probs


def _as_batch(batch) -> np.ndarray:
    arr = np.asarray(batch, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError("expected a batch of univariate series")
    return arr


@dataclass(frozen=True)
class NearestCentroidModel:
    """Softmax over negative Euclidean distances to per-class mean series."""

    centroids: np.ndarray
    temperature: float = 1.0

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")

    @property
    def class_count(self) -> int:
        return self.centroids.shape[0]

    def predict_proba(self, batch) -> np.ndarray:
        arr = _as_batch(batch)
        if arr.shape[1] != self.centroids.shape[1]:
            raise ValueError(
                f"series length {arr.shape[1]} does not match centroid length "
                f"{self.centroids.shape[1]}"
            )
        diff = arr[:, None, :] - self.centroids[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=2))
        logits = -dist / self.temperature
        logits -= logits.max(axis=1, keepdims=True)
        expd = np.exp(logits)
        return expd / expd.sum(axis=1, keepdims=True)


def fit_nearest_centroid(dataset, temperature: float = 1.0) -> NearestCentroidModel:
    """Per-class mean centroids from a labelled dataset."""
    centroids = []
    for label in range(1, dataset.class_count + 1):
        idx = dataset.class_indices(label)
        if idx.size == 0:
            raise ValueError(f"class {label} has no training instances")
        centroids.append(dataset.values[idx].mean(axis=0))
    return NearestCentroidModel(np.array(centroids), temperature)


def _reject_constants(name):
    raise ProtocolError(f"non-finite JSON constant {name!r} on the wire")


class ExternalPredictor:
    """Client for an external model speaking the stdio line protocol.

    One request is in flight at a time per handle; callers wanting
    parallelism open multiple handles. Use as a context manager or call
    `close()` when done.
    """

    def __init__(
        self,
        command: str | Sequence[str],
        timeout: float = DEFAULT_TIMEOUT,
        batch_cap: int = DEFAULT_BATCH_CAP,
    ):
        if isinstance(command, str):
            command = shlex.split(command)
        self._command = list(command)
        self._timeout = timeout
        self._batch_cap = batch_cap
        self._lock = threading.Lock()
        self._next_id = 0
        self._stderr_tail: list[str] = []
        try:
            self._proc = subprocess.Popen(
                self._command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise TransportError(f"cannot start predictor {self._command}: {exc}") from exc
        self._lines: queue.Queue[str | None] = queue.Queue()
        threading.Thread(target=self._drain_stdout, daemon=True).start()
        threading.Thread(target=self._drain_stderr, daemon=True).start()
        reply = self._roundtrip({"op": "hello"})
        classes = reply.get("classes")
        if not isinstance(classes, int) or classes < 1:
            raise ProtocolError(f"handshake returned invalid class count {classes!r}")
        self.class_count = classes

    def _drain_stdout(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _drain_stderr(self):
        for line in self._proc.stderr:
            self._stderr_tail.append(line.rstrip("\n"))
            del self._stderr_tail[:-20]

    def _diagnostics(self) -> str:
        return "; ".join(self._stderr_tail[-5:]) or "<no stderr output>"

    def _roundtrip(self, payload: dict) -> dict:
        with self._lock:
            request_id = self._next_id
            self._next_id += 1
            message = dict(payload, id=request_id)
            try:
                self._proc.stdin.write(json.dumps(message, allow_nan=False) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, ValueError) as exc:
                raise TransportError(
                    f"predictor process closed its input ({self._diagnostics()})"
                ) from exc
            try:
                line = self._lines.get(timeout=self._timeout)
            except queue.Empty:
                raise ProtocolError(
                    f"no response within {self._timeout}s ({self._diagnostics()})"
                ) from None
            if line is None:
                raise TransportError(
                    f"predictor process exited (status {self._proc.poll()}, "
                    f"{self._diagnostics()})"
                )
        try:
            reply = json.loads(line, parse_constant=_reject_constants)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed response line: {exc}") from exc
        if not isinstance(reply, dict):
            raise ProtocolError("response is not a JSON object")
        if reply.get("id") != request_id:
            raise ProtocolError(
                f"response id {reply.get('id')!r} does not match request {request_id}"
            )
        if "error" in reply:
            raise ProtocolError(f"predictor reported: {reply['error']}")
        return reply

    def predict_proba(self, batch) -> np.ndarray:
        arr = _as_batch(batch)
        chunks = []
        for start in range(0, arr.shape[0], self._batch_cap):
            chunk = arr[start : start + self._batch_cap]
            reply = self._roundtrip(
                {"op": "predict", "series": [list(map(float, row)) for row in chunk]}
            )
            if "probs" not in reply:
                raise ProtocolError("response lacks a 'probs' field")
            chunks.append(
                validate_probabilities(reply["probs"], chunk.shape[0], self.class_count)
            )
        return np.vstack(chunks)

    def close(self):
        proc = getattr(self, "_proc", None)
        if proc is None:
            return
        try:
            if proc.stdin:
                proc.stdin.close()
            proc.wait(timeout=5)
        except (OSError, subprocess.TimeoutExpired):
            proc.kill()
            proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass
