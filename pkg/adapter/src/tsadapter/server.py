"""Single-threaded request loop over line-delimited JSON on stdio.

Protocol:
    -> {"id": 0, "op": "hello"}                     <- {"id": 0, "classes": C}
    -> {"id": n, "op": "predict", "series": [...]}  <- {"id": n, "probs": [...]}
    any failure:                                    <- {"id": n, "error": "..."}

Responses echo request ids in order, one per request. Malformed requests
and model exceptions produce error responses; the loop keeps running until
stdin closes. NaN/Inf never reach the wire: model outputs are validated
before serialisation.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field

import numpy as np

ROW_SUM_TOLERANCE = 1e-6


@dataclass
class AdapterSession:
    model: object  # callable: (n, T) array -> (n, C) probability rows
    class_count: int
    running: bool = field(default=False)
    corrupt_request: int | None = None  # test hook: break this request's reply
    _served: int = field(default=0)


def _validate_output(probs: np.ndarray, n_rows: int, class_count: int) -> list[list[float]]:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (n_rows, class_count):
        raise ValueError(f"model returned shape {probs.shape}, expected ({n_rows}, {class_count})")
    if not np.all(np.isfinite(probs)):
        raise ValueError("model returned non-finite probabilities")
    if probs.min() < 0.0 or probs.max() > 1.0:
        raise ValueError("model returned probabilities outside [0, 1]")
    sums = np.abs(probs.sum(axis=1) - 1.0)
    if sums.max() > ROW_SUM_TOLERANCE:
        raise ValueError(f"model row sums deviate from 1 by {sums.max():.2e}")
    return [[float(v) for v in row] for row in probs]


def _handle(session: AdapterSession, request: dict) -> dict:
    rid = request.get("id")
    if not isinstance(rid, int):
        return {"id": None, "error": "request lacks an integer id"}
    op = request.get("op")
    if op == "hello":
        return {"id": rid, "classes": session.class_count}
    if op != "predict":
        return {"id": rid, "error": f"unknown op {op!r}"}
    series = request.get("series")
    if not isinstance(series, list) or not series:
        return {"id": rid, "error": "predict needs a nonempty 'series' list"}
    try:
        batch = np.asarray(series, dtype=np.float64)
        if batch.ndim != 2:
            raise ValueError("series rows must have equal length")
        if not np.all(np.isfinite(batch)):
            raise ValueError("series contain non-finite values")
        probs = _validate_output(session.model(batch), batch.shape[0], session.class_count)
    except Exception as exc:
        return {"id": rid, "error": str(exc)}
    session._served += 1
    if session.corrupt_request is not None and session._served == session.corrupt_request:
        # deliberately non-stochastic first row, for protocol-failure tests
        probs[0] = [0.4] + [0.4 / max(1, session.class_count - 1)] * (session.class_count - 1)
    return {"id": rid, "probs": probs}


def serve(session: AdapterSession, stdin=None, stdout=None) -> None:
    """Answer requests until the input stream closes."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    session.running = True
    try:
        for line in stdin:
            if not line.strip():
                continue
            try:
                request = json.loads(line)
                if not isinstance(request, dict):
                    raise ValueError("request is not a JSON object")
            except ValueError as exc:
                reply = {"id": None, "error": f"malformed request: {exc}"}
            else:
                reply = _handle(session, request)
            stdout.write(json.dumps(reply, allow_nan=False) + "\n")
            stdout.flush()
    finally:
        session.running = False
