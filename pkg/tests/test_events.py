"""Event extraction semantics, pinned by hand-computed oracles."""

import numpy as np
import pytest

from l2gtx.events import (
    DECREASING,
    INCREASING,
    LOCAL_MAX,
    LOCAL_MIN,
    ExtremumEvent,
    TrendEvent,
    extract_events,
    smooth,
)


class TestSmooth:
    def test_endpoints_stay_raw(self):
        out = smooth(np.array([0.0, 1.0, 0.0]), 3)
        np.testing.assert_allclose(out, [0.0, 1.0 / 3.0, 0.0])

    def test_window_one_is_identity(self):
        v = np.array([3.0, 1.0, 4.0, 1.0])
        assert np.array_equal(smooth(v, 1), v)

    def test_even_window_rejected(self):
        with pytest.raises(ValueError):
            smooth(np.zeros(5), 2)


class TestExtraction:
    def test_pure_ramp(self):
        events = extract_events([0.0, 1.0, 2.0, 3.0])
        assert events == [TrendEvent(INCREASING, 0, 3, 1.0, 0)]

    def test_single_peak(self):
        events = extract_events([0.0, 1.0, 0.0])
        kinds = {e.kind for e in events}
        assert kinds == {INCREASING, DECREASING, LOCAL_MAX}
        assert TrendEvent(INCREASING, 0, 1, 1.0, 0) in events
        assert TrendEvent(DECREASING, 1, 1, -1.0, 0) in events
        assert ExtremumEvent(LOCAL_MAX, 1, 1.0, 0) in events

    def test_single_valley(self):
        events = extract_events([1.0, 0.0, 1.0])
        assert ExtremumEvent(LOCAL_MIN, 1, 0.0, 0) in events

    def test_constant_series_no_events(self):
        assert extract_events([2.0] * 10) == []

    def test_too_short_series_empty(self):
        assert extract_events([1.0, 2.0]) == []

    def test_extrema_strictly_interior_and_strict(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            v = rng.normal(size=40)
            s = smooth(v, 3)
            for e in extract_events(v):
                if isinstance(e, ExtremumEvent):
                    assert 0 < e.time < len(v) - 1
                    if e.kind == LOCAL_MAX:
                        assert s[e.time] > s[e.time - 1]
                        assert s[e.time] > s[e.time + 1]
                    else:
                        assert s[e.time] < s[e.time - 1]
                        assert s[e.time] < s[e.time + 1]
                    assert e.value == v[e.time]

    def test_trend_sign_consistency(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            v = rng.normal(size=50)
            for e in extract_events(v):
                if isinstance(e, TrendEvent):
                    assert e.duration >= 1
                    if e.kind == INCREASING:
                        assert e.avg_gradient > 0
                    else:
                        assert e.avg_gradient < 0

    def test_trends_nonoverlapping_within_kind(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            v = np.cumsum(rng.normal(size=60))
            spans = {}
            for e in extract_events(v):
                if isinstance(e, TrendEvent):
                    spans.setdefault(e.kind, []).append(
                        (e.start_time, e.start_time + e.duration)
                    )
            for kind_spans in spans.values():
                kind_spans.sort()
                for (s0, e0), (s1, _) in zip(kind_spans, kind_spans[1:]):
                    assert e0 <= s1

    def test_source_sample_tag(self):
        events = extract_events([0.0, 1.0, 0.0], source_sample=7)
        assert all(e.source_sample == 7 for e in events)

    def test_min_trend_points_filter(self):
        # with a 3-point minimum, the duration-1 legs of a spike are dropped
        events = extract_events([0.0, 1.0, 0.0], min_trend_points=3)
        assert all(isinstance(e, ExtremumEvent) for e in events)
