"""Numeric building blocks: DTW, k-means, silhouette, linkage, ridge, R².

Everything here is deterministic for a fixed seed and free of shared mutable
state, so callers may evaluate independent invocations concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels

DTW_RADIUS = 8
DTW_EXACT_LEN = 64


def _as_series(x) -> np.ndarray:
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D series")
    return arr


def _full_band(n: int, m: int):
    lo = np.zeros(n, np.int64)
    hi = np.full(n, m, np.int64)
    return lo, hi


def _halve(x: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    half = (n + 1) // 2
    out = np.empty(half)
    for i in range(n // 2):
        out[i] = 0.5 * (x[2 * i] + x[2 * i + 1])
    if n % 2:
        out[half - 1] = x[n - 1]
    return out

def _expand_window(path: np.ndarray, n: int, m: int, radius: int):
    """Project a coarse warping path to the fine grid and widen it by `radius`."""
    lo = np.full(n, m, np.int64)
    hi = np.full(n, -1, np.int64)
    for t in range(path.shape[0]):
        cj0 = 2 * path[t, 1]
        cj1 = min(cj0 + 1, m - 1)
        for di in range(2):
            fi = 2 * path[t, 0] + di
            if fi >= n:
                continue
            if cj0 < lo[fi]:
                lo[fi] = cj0
            if cj1 > hi[fi]:
                hi[fi] = cj1
    # Row-direction expansion: take the min/max over the +-radius row window.
    elo = np.empty(n, np.int64)
    ehi = np.empty(n, np.int64)
    for i in range(n):
        r0 = max(0, i - radius)
        r1 = min(n, i + radius + 1)
        elo[i] = max(0, int(lo[r0:r1].min()) - radius)
        ehi[i] = min(m, int(hi[r0:r1].max()) + radius + 1)
    return elo, ehi


def _fastdtw(a: np.ndarray, b: np.ndarray, radius: int):
    if a.shape[0] <= radius + 2 or b.shape[0] <= radius + 2:
        lo, hi = _full_band(a.shape[0], b.shape[0])
        return kernels.dtw_band(a, b, lo, hi)
    _, coarse_path = _fastdtw(_halve(a), _halve(b), radius)
    lo, hi = _expand_window(coarse_path, a.shape[0], b.shape[0], radius)
    return kernels.dtw_band(a, b, lo, hi)


def dtw_distance(a, b, radius: int = DTW_RADIUS, exact_len: int = DTW_EXACT_LEN) -> float:
    """DTW alignment cost between two series under absolute-difference cost.

    Short series (both lengths <= `exact_len`) and radii covering the longer
    series are computed with the exact O(nm) dynamic program; longer inputs
    use the multiresolution approximation with window `radius`.
    """
    av = _as_series(a)
    bv = _as_series(b)
    if av.size == 0 or bv.size == 0:
        raise ValueError("DTW is undefined for empty series")
    # Canonical argument order keeps the multiresolution approximation
    # (whose window construction is orientation-dependent) exactly symmetric.
    if (bv.size, bv.tobytes()) < (av.size, av.tobytes()):
        av, bv = bv, av
    longest = max(av.size, bv.size)
    if longest <= exact_len or radius >= longest:
        lo, hi = _full_band(av.size, bv.size)
        cost, _ = kernels.dtw_band(av, bv, lo, hi)
    else:
        cost, _ = _fastdtw(av, bv, radius)
    return float(cost)


@dataclass(frozen=True)
class KMeansResult:
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    n_iter: int


def _as_points(points) -> np.ndarray:
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("expected an (n, d) point array")
    return pts


def kmeans(points, k: int, seed, max_iter: int = 100) -> KMeansResult:
    """Lloyd's algorithm with greedy farthest-point seeding.

    The first centroid is drawn from `seed`; the rest are the points farthest
    from any chosen centroid (ties to the lowest index). Clusters that empty
    out are re-seeded with the point farthest from its assigned centroid.
    Iteration stops at an assignment fixpoint or after `max_iter` rounds.
    """
    pts = _as_points(points)
    n = pts.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    rng = np.random.default_rng(seed)
    centroids = np.empty((k, pts.shape[1]))
    centroids[0] = pts[int(rng.integers(n))]
    mind = np.sum((pts - centroids[0]) ** 2, axis=1)
    for c in range(1, k):
        centroids[c] = pts[int(np.argmax(mind))]
        mind = np.minimum(mind, np.sum((pts - centroids[c]) ** 2, axis=1))

    labels = None
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        new_labels, sqd = kernels.assign_to_centroids(pts, centroids)
        counts = np.bincount(new_labels, minlength=k)
        if np.any(counts == 0):
            farthest = sqd.copy()
            for c in np.flatnonzero(counts == 0):
                idx = int(np.argmax(farthest))
                new_labels[idx] = c
                farthest[idx] = -1.0
        if labels is not None and np.array_equal(labels, new_labels):
            break
        labels = new_labels
        for c in range(k):
            member = pts[labels == c]
            if member.shape[0]:
                centroids[c] = member.mean(axis=0)
    else:
        labels, _ = kernels.assign_to_centroids(pts, centroids)
    inertia = float(np.sum((pts - centroids[labels]) ** 2))
    return KMeansResult(labels, centroids, inertia, n_iter)


class KSelection(NamedTuple):
    k: int
    degenerate: bool
    scores: dict[int, float]


def silhouette_select_k(
    points,
    k_min: int = 2,
    k_max: int = 6,
    seed=0,
    subsample: int = 500,
) -> KSelection:
    """Pick k in [k_min, k_max] maximising the mean silhouette of k-means.

    Scoring runs on a without-replacement subsample of at most `subsample`
    points. Ties go to the smallest k. Inputs too small to score every k
    (fewer than k_max + 1 points) or with zero spread return k_min with the
    degenerate flag set.
    """
    if k_min < 2:
        raise ValueError("k_min must be at least 2")
    if k_max < k_min:
        raise ValueError("k_max must be >= k_min")
    pts = _as_points(points)
    n = pts.shape[0]
    rng = np.random.default_rng(seed)
    if n > subsample:
        idx = np.sort(rng.choice(n, size=subsample, replace=False))
        pts = pts[idx]
        n = subsample
    if n < k_max + 1:
        return KSelection(k_min, True, {})
    if np.all(pts == pts[0]):
        return KSelection(k_min, True, {})
    scores: dict[int, float] = {}
    best_k = k_min
    best_score = -np.inf
    for k in range(k_min, k_max + 1):
        result = kmeans(pts, k, seed)
        score = float(kernels.silhouette_mean(pts, result.assignments, k))
        scores[k] = score
        if score > best_score:
            best_score = score
            best_k = k
    return KSelection(best_k, False, scores)


@dataclass(frozen=True)
class MergeStep:
    left: int
    right: int
    distance: float
    new_id: int


def agglomerative(points) -> list[MergeStep]:
    """Average-linkage agglomerative merge sequence over Euclidean distance.

    Leaves are ids 0..n-1; each merge creates id n+step. Returns exactly
    n-1 steps with non-decreasing distances; ties break on the smallest
    (left, right) id pair.
    """
    pts = _as_points(points)
    if pts.shape[0] == 0:
        raise ValueError("agglomerative clustering needs at least one point")
    if pts.shape[0] == 1:
        return []
    rows = kernels.average_linkage(pts)
    return [
        MergeStep(int(r[0]), int(r[1]), float(r[2]), int(r[3])) for r in rows
    ]


def cut_at_threshold(
    merges: Sequence[MergeStep], tau: float, n_leaves: int | None = None
) -> np.ndarray:
    """Flat cluster labels after applying every merge with distance <= tau.

    Labels are contiguous from 0 in order of first leaf occurrence.
    """
    if n_leaves is None:
        n_leaves = len(merges) + 1
    parent = list(range(n_leaves + len(merges)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for m in merges:
        if m.distance <= tau:
            parent[find(m.left)] = m.new_id
            parent[find(m.right)] = m.new_id
    labels = np.empty(n_leaves, np.int64)
    seen: dict[int, int] = {}
    for leaf in range(n_leaves):
        root = find(leaf)
        if root not in seen:
            seen[root] = len(seen)
        labels[leaf] = seen[root]
    return labels


def cut_at_percentile(
    merges: Sequence[MergeStep], p: float, n_leaves: int | None = None
) -> np.ndarray:
    """Flat cluster labels from cutting the merge sequence at a percentile.

    The cut height is the linear-interpolation percentile of the merge
    distances; every merge with distance <= that height is applied.
    """
    if not 0.0 <= p <= 100.0:
        raise ValueError("percentile must be in [0, 100]")
    if not merges:
        return cut_at_threshold(merges, 0.0, n_leaves)
    tau = float(np.percentile([m.distance for m in merges], p))
    return cut_at_threshold(merges, tau, n_leaves)


@dataclass(frozen=True)
class RidgeResult:
    coef: np.ndarray
    intercept: float
    rank_deficient: bool


def weighted_ridge(Z, y, w, lam: float) -> RidgeResult:
    """Weighted ridge regression with an unpenalised intercept.

    Minimises sum_i w_i (y_i - b0 - z_i b)^2 + lam * ||b||^2. With lam = 0 and
    a rank-deficient design the minimum-norm coefficient vector is returned
    and flagged.
    """
    Zm = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    yv = np.asarray(y, dtype=np.float64).ravel()
    wv = np.asarray(w, dtype=np.float64).ravel()
    if Zm.shape[0] != yv.size or yv.size != wv.size:
        raise ValueError("Z, y and w must agree on the sample dimension")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if np.any(wv < 0):
        raise ValueError("weights must be nonnegative")
    sw = float(wv.sum())
    if sw <= 0:
        raise ValueError("at least one weight must be positive")
    if Zm.shape[1] == 0:
        return RidgeResult(np.zeros(0), float((wv @ yv) / sw), False)
    zbar = (wv @ Zm) / sw
    ybar = float(wv @ yv) / sw
    Zc = Zm - zbar
    yc = yv - ybar
    if lam > 0:
        A = (Zc * wv[:, None]).T @ Zc + lam * np.eye(Zm.shape[1])
        beta = np.linalg.solve(A, (Zc * wv[:, None]).T @ yc)
        deficient = False
    else:
        sq = np.sqrt(wv)
        beta, _, rank, _ = np.linalg.lstsq(sq[:, None] * Zc, sq * yc, rcond=None)
        deficient = rank < Zm.shape[1]
    intercept = ybar - float(zbar @ beta)
    return RidgeResult(beta, intercept, deficient)


def r_squared(y_true, y_pred, w) -> float | None:
    """Weighted coefficient of determination; None when it is undefined.

    Undefined means the weighted target is (numerically) constant, so the
    total sum of squares vanishes.
    """
    yt = np.asarray(y_true, dtype=np.float64).ravel()
    yp = np.asarray(y_pred, dtype=np.float64).ravel()
    wv = np.asarray(w, dtype=np.float64).ravel()
    if yt.size != yp.size or yt.size != wv.size:
        raise ValueError("y_true, y_pred and w must have equal length")
    sw = float(wv.sum())
    if sw <= 0:
        raise ValueError("at least one weight must be positive")
    ybar = float(wv @ yt) / sw
    ss_tot = float(wv @ (yt - ybar) ** 2)
    if ss_tot <= 1e-12 * sw * max(1.0, ybar * ybar):
        return None
    ss_res = float(wv @ (yt - yp) ** 2)
    return 1.0 - ss_res / ss_tot
