"""Temporal event primitives and their extraction from a series.

Four kinds of event: increasing/decreasing trends parameterised by
(start_time, duration, avg_gradient), and local extrema parameterised by
(time, value). Detection runs on a lightly smoothed copy of the series;
reported parameters always refer to the raw values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

INCREASING = "increasing"
DECREASING = "decreasing"
LOCAL_MAX = "local_max"
LOCAL_MIN = "local_min"
KIND_ORDER = (INCREASING, DECREASING, LOCAL_MAX, LOCAL_MIN)
TREND_KINDS = (INCREASING, DECREASING)

# Attributes summarised per kind in global explanations.
SUMMARY_ATTRIBUTES = {
    INCREASING: ("start_time", "duration"),
    DECREASING: ("start_time", "duration"),
    LOCAL_MAX: ("time", "value"),
    LOCAL_MIN: ("time", "value"),
}


@dataclass(frozen=True)
class TrendEvent:
    kind: str
    start_time: int
    duration: int
    avg_gradient: float
    source_sample: int = 0

    @property
    def params(self) -> tuple[float, float, float]:
        return (float(self.start_time), float(self.duration), self.avg_gradient)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "start_time": self.start_time,
            "duration": self.duration,
            "avg_gradient": self.avg_gradient,
        }


@dataclass(frozen=True)
class ExtremumEvent:
    kind: str
    time: int
    value: float
    source_sample: int = 0

    @property
    def params(self) -> tuple[float, float]:
        return (float(self.time), self.value)

    def to_json(self) -> dict:
        return {"kind": self.kind, "time": self.time, "value": self.value}


Event = TrendEvent | ExtremumEvent


def attribute_values(event: Event) -> dict[str, float]:
    if isinstance(event, TrendEvent):
        return {"start_time": float(event.start_time), "duration": float(event.duration)}
    return {"time": float(event.time), "value": float(event.value)}


def smooth(values: np.ndarray, window: int = 3) -> np.ndarray:
    """Centered moving average of odd width; the edge points stay raw.

    Keeping the endpoints untouched preserves the sign structure of short
    series, which edge-padded averages destroy.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("smoothing window must be odd and positive")
    v = np.asarray(values, dtype=np.float64)
    if window == 1 or v.size < window:
        return v.copy()
    half = window // 2
    out = v.copy()
    kernel = np.ones(window) / window
    out[half:-half] = np.convolve(v, kernel, mode="valid")
    return out


def extract_events(
    values,
    *,
    smooth_window: int = 3,
    gradient_threshold: float = 0.0,
    min_trend_points: int = 2,
    source_sample: int = 0,
) -> list[Event]:
    """Extract trend and extremum events from one series.

    Maximal runs of the smoothed first difference beyond
    `gradient_threshold` become trends spanning at least `min_trend_points`
    time points; strict sign changes of the smoothed difference become
    extrema. Trends whose raw net change disagrees in sign with their kind
    are discarded. Series shorter than 3 points yield no events.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("expected a 1-D series")
    if v.size < 3:
        return []
    d = np.diff(smooth(v, smooth_window))
    signs = np.zeros(d.size, dtype=np.int64)
    signs[d > gradient_threshold] = 1
    signs[d < -gradient_threshold] = -1

    out: list[Event] = []
    i = 0
    while i < signs.size:
        s = signs[i]
        if s == 0:
            i += 1
            continue
        j = i
        while j + 1 < signs.size and signs[j + 1] == s:
            j += 1
        duration = j - i + 1
        if duration + 1 >= min_trend_points:
            gradient = (v[j + 1] - v[i]) / duration
            kind = INCREASING if s > 0 else DECREASING
            if (s > 0 and gradient > 0) or (s < 0 and gradient < 0):
                out.append(TrendEvent(kind, i, duration, float(gradient), source_sample))
        i = j + 1

    for t in range(1, d.size):
        if d[t - 1] > 0 and d[t] < 0:
            out.append(ExtremumEvent(LOCAL_MAX, t, float(v[t]), source_sample))
        elif d[t - 1] < 0 and d[t] > 0:
            out.append(ExtremumEvent(LOCAL_MIN, t, float(v[t]), source_sample))
    return out
