"""Configuration shared by the local explainer and the global pipeline."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class ExplainerConfig:
    """Knobs of the local (per-instance) explainer."""

    n_samples: int = 150
    n_segments: int = 10
    sigma: float | None = None  # None: median of the neighbourhood DTW distances
    ridge_lambda: float = 1.0
    top_n: int = 5
    k_min: int = 2
    k_max: int = 6
    silhouette_subsample: int = 500
    smooth_window: int = 3
    gradient_threshold: float = 0.0
    min_trend_points: int = 2
    dtw_radius: int = 8
    dtw_exact_len: int = 64

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("n_samples must be at least 2")
        if self.n_segments < 1:
            raise ValueError("n_segments must be positive")
        if self.sigma is not None and self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be nonnegative")
        if self.top_n < 1:
            raise ValueError("top_n must be positive")


@dataclass(frozen=True)
class PipelineConfig:
    """Full local-to-global run configuration."""

    n_inst: int = 15
    budget: int | None = None  # None: equal to n_inst
    percentiles: tuple[float, ...] = (25.0, 50.0, 75.0, 95.0)
    seed: int = 0
    pooled_tau: bool = False
    coverage_epsilon: float = 1e-9
    jobs: int = 1
    explainer: ExplainerConfig = field(default_factory=ExplainerConfig)

    def __post_init__(self):
        if self.n_inst < 1:
            raise ValueError("n_inst must be positive")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be positive")
        for p in self.percentiles:
            if not 0 <= p <= 100:
                raise ValueError("percentiles must lie in [0, 100]")
        if not self.percentiles:
            raise ValueError("at least one percentile is required")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")

    @property
    def effective_budget(self) -> int:
        return self.n_inst if self.budget is None else self.budget

    def echo(self) -> dict:
        """Flat, JSON-ready view of every resolved setting."""
        flat = asdict(self)
        explainer = flat.pop("explainer")
        flat["budget"] = self.effective_budget
        flat["percentiles"] = [float(p) for p in self.percentiles]
        flat.update(explainer)
        return flat
