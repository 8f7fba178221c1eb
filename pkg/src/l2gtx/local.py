"""Per-instance surrogate explanations over temporal event primitives.

The explainer perturbs random segments of the instance to build a
neighbourhood, weights each sample by DTW similarity to the original,
extracts events from every sample, clusters them per kind, and fits a
weighted ridge surrogate from per-cluster event counts to the black-box
probability of the instance's predicted class. The top-n clusters by
absolute coefficient form the local explanation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ExplainerConfig
from .events import (
    KIND_ORDER,
    Event,
    extract_events,
)
from .numerics import dtw_distance, kmeans, r_squared, silhouette_select_k, weighted_ridge

PERTURB_ZEROS = "zeros"
PERTURB_SEGMENT_MEAN = "segment_mean"
PERTURB_SERIES_MEAN = "series_mean"
PERTURB_NOISE = "noise"
PERTURB_METHODS = (PERTURB_ZEROS, PERTURB_SEGMENT_MEAN, PERTURB_SERIES_MEAN, PERTURB_NOISE)

# Sub-stream tags so every draw is a pure function of (seed, instance_id).
_STREAM_PERTURB = 1
_STREAM_CLUSTER = 2


def _seed_list(seed) -> list[int]:
    if isinstance(seed, (int, np.integer)):
        return [int(seed)]
    return [int(s) for s in seed]


@dataclass(frozen=True)
class PerturbRecord:
    method: str
    segment_start: int
    segment_end: int


@dataclass
class Neighbourhood:
    """Perturbed samples around an instance; samples[0] is the original."""

    samples: np.ndarray
    log: list[PerturbRecord]
    weights: np.ndarray | None = None
    sigma: float | None = None


def segment_bounds(length: int, n_segments: int) -> np.ndarray:
    """Boundaries of contiguous near-equal segments covering [0, length)."""
    n_segments = min(n_segments, length)
    return np.linspace(0, length, n_segments + 1).astype(np.int64)


def apply_perturbation(base: np.ndarray, method: str, s0: int, s1: int, rng=None) -> np.ndarray:
    """Replace base[s0:s1] according to `method`; returns a new series."""
    z = np.asarray(base, dtype=np.float64).copy()
    if method == PERTURB_ZEROS:
        z[s0:s1] = 0.0
    elif method == PERTURB_SEGMENT_MEAN:
        z[s0:s1] = z[s0:s1].mean()
    elif method == PERTURB_SERIES_MEAN:
        z[s0:s1] = base.mean()
    elif method == PERTURB_NOISE:
        if rng is None:
            raise ValueError("noise perturbation needs an rng")
        z[s0:s1] = rng.normal(base.mean(), base.std(), size=s1 - s0)
    else:
        raise ValueError(f"unknown perturbation method {method!r}")
    return z


def perturb_neighbourhood(
    x, n_samples: int, seed, cfg: ExplainerConfig | None = None
) -> Neighbourhood:
    """Generate `n_samples` series; each non-original one has a random
    segment replaced by zeros, its own mean, the series mean, or Gaussian
    noise matching the series statistics."""
    cfg = cfg or ExplainerConfig()
    if n_samples < 2:
        raise ValueError("a neighbourhood needs at least 2 samples")
    base = np.asarray(x, dtype=np.float64)
    if base.ndim != 1 or base.size < 2:
        raise ValueError("expected a 1-D series of length >= 2")
    rng = np.random.default_rng(_seed_list(seed))
    bounds = segment_bounds(base.size, cfg.n_segments)
    n_segments = bounds.size - 1
    samples = np.empty((n_samples, base.size))
    samples[0] = base
    log = [PerturbRecord("original", 0, 0)]
    for i in range(1, n_samples):
        seg = int(rng.integers(n_segments))
        method = PERTURB_METHODS[int(rng.integers(len(PERTURB_METHODS)))]
        s0, s1 = int(bounds[seg]), int(bounds[seg + 1])
        samples[i] = apply_perturbation(base, method, s0, s1, rng)
        log.append(PerturbRecord(method, s0, s1))
    return Neighbourhood(samples, log)


def neighbourhood_distances(
    x, samples: np.ndarray, radius: int = 8, exact_len: int = 64
) -> np.ndarray:
    base = np.asarray(x, dtype=np.float64)
    return np.array(
        [dtw_distance(base, s, radius=radius, exact_len=exact_len) for s in samples]
    )


def resolve_sigma(distances: np.ndarray, sigma: float | None) -> float:
    """Explicit bandwidth, or the median neighbourhood distance (1.0 when
    that degenerates to zero)."""
    if sigma is not None:
        return float(sigma)
    others = distances[1:] if distances.size > 1 else distances
    med = float(np.median(others))
    return med if med > 0 else 1.0


def weigh_samples(x, samples, sigma: float, radius: int = 8, exact_len: int = 64) -> np.ndarray:
    """Similarity kernel exp(-(d/sigma)^2) over DTW distances to x."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    d = neighbourhood_distances(x, np.atleast_2d(np.asarray(samples, float)), radius, exact_len)
    return np.exp(-((d / sigma) ** 2))


@dataclass
class KindClustering:
    """K-means partition of one event kind's parameter vectors."""

    kind: str
    events: list[Event]
    labels: np.ndarray
    centroids: np.ndarray  # original parameter space, one row per cluster
    k: int
    degenerate: bool = False


def cluster_events(
    events: list[Event],
    seed,
    k_min: int = 2,
    k_max: int = 6,
    subsample: int = 500,
) -> list[KindClustering]:
    """Cluster pooled events independently per kind.

    Features are the kind's parameter tuples, z-scored per dimension; k is
    chosen by the silhouette method. Kinds with fewer than k_min + 1 events
    form a single cluster and are flagged degenerate.
    """
    if not events:
        raise ValueError("cannot cluster an empty event set")
    base_seed = _seed_list(seed)
    out: list[KindClustering] = []
    for kind_index, kind in enumerate(KIND_ORDER):
        kind_events = [e for e in events if e.kind == kind]
        if not kind_events:
            continue
        feats = np.array([e.params for e in kind_events], dtype=np.float64)
        if len(kind_events) < k_min + 1:
            labels = np.zeros(len(kind_events), np.int64)
            out.append(
                KindClustering(kind, kind_events, labels, feats.mean(axis=0)[None, :], 1, True)
            )
            continue
        mu = feats.mean(axis=0)
        sd = feats.std(axis=0)
        sd_safe = np.where(sd > 0, sd, 1.0)
        scaled = (feats - mu) / sd_safe
        kind_seed = base_seed + [kind_index]
        selection = silhouette_select_k(scaled, k_min, k_max, kind_seed, subsample)
        result = kmeans(scaled, selection.k, kind_seed)
        centroids = np.empty((selection.k, feats.shape[1]))
        for c in range(selection.k):
            member = feats[result.assignments == c]
            if member.shape[0]:
                centroids[c] = member.mean(axis=0)
            else:
                centroids[c] = mu + sd_safe * result.centroids[c]
        out.append(
            KindClustering(
                kind, kind_events, result.assignments, centroids, selection.k,
                selection.degenerate,
            )
        )
    return out


def build_event_matrix(
    n_samples: int, clusterings: list[KindClustering]
) -> tuple[np.ndarray, list[tuple[str, int]]]:
    """Count matrix Z[s, j] = events of sample s in cluster column j.

    Columns are ordered kind-major, then cluster index within the kind.
    """
    columns: list[tuple[str, int]] = []
    for clustering in clusterings:
        columns.extend((clustering.kind, c) for c in range(clustering.k))
    Z = np.zeros((n_samples, len(columns)), np.int64)
    offset = 0
    for clustering in clusterings:
        for event, label in zip(clustering.events, clustering.labels):
            Z[event.source_sample, offset + int(label)] += 1
        offset += clustering.k
    return Z, columns


@dataclass
class LocalCluster:
    """One retained event cluster with its surrogate importance."""

    cluster_id: int
    kind: str
    centroid: tuple[float, ...]
    importance: float
    member_events: list[Event]

    def to_json(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "kind": self.kind,
            "centroid": list(self.centroid),
            "importance": self.importance,
            "events": [e.to_json() for e in self.member_events],
        }


@dataclass
class LocalExplanation:
    instance_id: int
    predicted_class: int
    fidelity: float | None
    clusters: list[LocalCluster]
    full_coefficients: np.ndarray
    column_kinds: list[tuple[str, int]]
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "predicted_class": self.predicted_class,
            "fidelity": self.fidelity,
            "clusters": [c.to_json() for c in self.clusters],
        }


def explain_instance(
    x, predictor, cfg: ExplainerConfig | None = None, seed=0, instance_id: int = 0
) -> LocalExplanation:
    """Run the full local explanation for one instance.

    Deterministic: every random draw derives from (seed, instance_id), so
    instances may be explained concurrently without changing any result.
    """
    cfg = cfg or ExplainerConfig()
    base = np.asarray(x, dtype=np.float64)
    base_seed = _seed_list(seed) + [instance_id]
    nb = perturb_neighbourhood(base, cfg.n_samples, base_seed + [_STREAM_PERTURB], cfg)
    distances = neighbourhood_distances(base, nb.samples, cfg.dtw_radius, cfg.dtw_exact_len)
    sigma = resolve_sigma(distances, cfg.sigma)
    weights = np.exp(-((distances / sigma) ** 2))
    nb.weights = weights
    nb.sigma = sigma

    probs = predictor.predict_proba(nb.samples)
    target_index = int(np.argmax(probs[0]))
    predicted_class = target_index + 1
    y = probs[:, target_index]

    all_events: list[Event] = []
    for i, sample in enumerate(nb.samples):
        all_events.extend(
            extract_events(
                sample,
                smooth_window=cfg.smooth_window,
                gradient_threshold=cfg.gradient_threshold,
                min_trend_points=cfg.min_trend_points,
                source_sample=i,
            )
        )
    hist_counts, hist_edges = np.histogram(weights, bins=10, range=(0.0, 1.0))
    diagnostics = {
        "sigma": sigma,
        "n_events": len(all_events),
        "weights_min": float(weights.min()),
        "weights_mean": float(weights.mean()),
        "weights_histogram": {
            "counts": [int(c) for c in hist_counts],
            "bin_edges": [float(e) for e in hist_edges],
        },
    }
    if not all_events:
        diagnostics["no_events"] = True
        return LocalExplanation(
            instance_id, predicted_class, None, [], np.zeros(0), [], diagnostics
        )

    clusterings = cluster_events(
        all_events, base_seed + [_STREAM_CLUSTER], cfg.k_min, cfg.k_max,
        cfg.silhouette_subsample,
    )
    Z, columns = build_event_matrix(cfg.n_samples, clusterings)

    # Ridge on z-scored count columns; coefficients reported in count units.
    Zf = Z.astype(np.float64)
    mu = Zf.mean(axis=0)
    sd = Zf.std(axis=0)
    informative = sd > 0
    Zs = np.zeros_like(Zf)
    Zs[:, informative] = (Zf[:, informative] - mu[informative]) / sd[informative]
    ridge = weighted_ridge(Zs, y, weights, cfg.ridge_lambda)
    beta = np.zeros(Zf.shape[1])
    beta[informative] = ridge.coef[informative] / sd[informative]
    y_hat = Zs @ ridge.coef + ridge.intercept
    fidelity = r_squared(y, y_hat, weights)
    diagnostics["rank_deficient"] = ridge.rank_deficient
    diagnostics["degenerate_kinds"] = [c.kind for c in clusterings if c.degenerate]
    if fidelity is None:
        diagnostics["constant_target"] = True

    order = sorted(range(len(columns)), key=lambda j: (-abs(beta[j]), j))
    retained = order[: cfg.top_n]
    by_kind = {c.kind: c for c in clusterings}
    clusters = []
    for j in retained:
        kind, local_index = columns[j]
        clustering = by_kind[kind]
        members = [
            e
            for e, lab in zip(clustering.events, clustering.labels)
            if int(lab) == local_index and e.source_sample == 0
        ]
        clusters.append(
            LocalCluster(
                cluster_id=j,
                kind=kind,
                centroid=tuple(float(v) for v in clustering.centroids[local_index]),
                importance=float(beta[j]),
                member_events=members,
            )
        )
    return LocalExplanation(
        instance_id, predicted_class, fidelity, clusters, beta, columns, diagnostics
    )
