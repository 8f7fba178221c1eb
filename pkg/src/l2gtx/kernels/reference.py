"""Pure-numpy reference kernels.

These are the hot inner loops of the pipeline, written as plain loops over
float64 arrays so that `jit.py` can compile the very same functions with
numba. Both backends therefore execute the same operation sequence and
produce bit-identical results.
"""

import numpy as np


def dtw_band(a, b, lo, hi):
    """Banded DTW with absolute-difference local cost.

    `lo[i]`/`hi[i]` bound the admissible columns of row i (half-open). The
    band must contain (0, 0) and (n-1, m-1) and be connected. Returns the
    alignment cost and the optimal warping path as an (L, 2) int64 array.
    """
    n = a.shape[0]
    m = b.shape[0]
    cost = np.full((n, m), np.inf)
    for i in range(n):
        for j in range(lo[i], hi[i]):
            c = a[i] - b[j]
            if c < 0.0:
                c = -c
            if i == 0 and j == 0:
                cost[0, 0] = c
                continue
            best = np.inf
            if i > 0 and j > 0 and cost[i - 1, j - 1] < best:
                best = cost[i - 1, j - 1]
            if i > 0 and cost[i - 1, j] < best:
                best = cost[i - 1, j]
            if j > 0 and cost[i, j - 1] < best:
                best = cost[i, j - 1]
            cost[i, j] = c + best

    # Backtrack, preferring diagonal moves on ties.
    rev = np.empty((n + m, 2), np.int64)
    i = n - 1
    j = m - 1
    k = 0
    rev[k, 0] = i
    rev[k, 1] = j
    k += 1
    while i > 0 or j > 0:
        best = np.inf
        ni = 0
        nj = 0
        if i > 0 and j > 0 and cost[i - 1, j - 1] < best:
            best = cost[i - 1, j - 1]
            ni = i - 1
            nj = j - 1
        if i > 0 and cost[i - 1, j] < best:
            best = cost[i - 1, j]
            ni = i - 1
            nj = j
        if j > 0 and cost[i, j - 1] < best:
            best = cost[i, j - 1]
            ni = i
            nj = j - 1
        i = ni
        j = nj
        rev[k, 0] = i
        rev[k, 1] = j
        k += 1
    path = np.empty((k, 2), np.int64)
    for t in range(k):
        path[t, 0] = rev[k - 1 - t, 0]
        path[t, 1] = rev[k - 1 - t, 1]
    return cost[n - 1, m - 1], path


def assign_to_centroids(points, centroids):
    """Nearest-centroid assignment; ties resolve to the lowest centroid index.

    Returns (labels, squared distances to the assigned centroid).
    """
    n = points.shape[0]
    d = points.shape[1]
    k = centroids.shape[0]
    labels = np.empty(n, np.int64)
    sqd = np.empty(n, np.float64)
    for i in range(n):
        best = np.inf
        bl = 0
        for c in range(k):
            s = 0.0
            for t in range(d):
                diff = points[i, t] - centroids[c, t]
                s += diff * diff
            if s < best:
                best = s
                bl = c
        labels[i] = bl
        sqd[i] = best
    return labels, sqd


def silhouette_mean(points, labels, k):
    """Mean silhouette coefficient under Euclidean distance.

    Singleton-cluster points score 0; so do points whose intra and nearest
    inter distances are both 0 (coincident data).
    """
    n = points.shape[0]
    d = points.shape[1]
    counts = np.zeros(k, np.int64)
    for i in range(n):
        counts[labels[i]] += 1
    total = 0.0
    sums = np.empty(k, np.float64)
    for i in range(n):
        for c in range(k):
            sums[c] = 0.0
        for j in range(n):
            if j == i:
                continue
            s = 0.0
            for t in range(d):
                diff = points[i, t] - points[j, t]
                s += diff * diff
            sums[labels[j]] += np.sqrt(s)
        li = labels[i]
        if counts[li] > 1:
            a = sums[li] / (counts[li] - 1)
            b = np.inf
            for c in range(k):
                if c != li and counts[c] > 0:
                    mb = sums[c] / counts[c]
                    if mb < b:
                        b = mb
            denom = a if a > b else b
            if denom > 0.0:
                total += (b - a) / denom
    return total / n


def average_linkage(points):
    """Agglomerative clustering with average linkage over Euclidean distance.

    Returns an (n-1, 4) float64 array of merge rows
    (left_id, right_id, distance, new_id); leaves are ids 0..n-1 and merged
    clusters take ids n, n+1, ... in merge order. Distance ties break on the
    lexicographically smallest (left_id, right_id) pair.
    """
    n = points.shape[0]
    d = points.shape[1]
    dist = np.zeros((n, n), np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for t in range(d):
                diff = points[i, t] - points[j, t]
                s += diff * diff
            e = np.sqrt(s)
            dist[i, j] = e
            dist[j, i] = e
    active = np.ones(n, np.bool_)
    sizes = np.ones(n, np.float64)
    ids = np.empty(n, np.int64)
    for i in range(n):
        ids[i] = i
    merges = np.empty((n - 1, 4), np.float64)
    for step in range(n - 1):
        best = np.inf
        bi = -1
        bj = -1
        for i in range(n):
            if not active[i]:
                continue
            for j in range(i + 1, n):
                if not active[j]:
                    continue
                dv = dist[i, j]
                lo_id = ids[i] if ids[i] < ids[j] else ids[j]
                hi_id = ids[j] if ids[i] < ids[j] else ids[i]
                if bi >= 0:
                    blo = ids[bi] if ids[bi] < ids[bj] else ids[bj]
                    bhi = ids[bj] if ids[bi] < ids[bj] else ids[bi]
                else:
                    blo = -1
                    bhi = -1
                if dv < best or (
                    dv == best and (lo_id < blo or (lo_id == blo and hi_id < bhi))
                ):
                    best = dv
                    bi = i
                    bj = j
        left = ids[bi] if ids[bi] < ids[bj] else ids[bj]
        right = ids[bj] if ids[bi] < ids[bj] else ids[bi]
        merges[step, 0] = left
        merges[step, 1] = right
        merges[step, 2] = best
        merges[step, 3] = n + step
        si = sizes[bi]
        sj = sizes[bj]
        for t in range(n):
            if active[t] and t != bi and t != bj:
                nv = (si * dist[bi, t] + sj * dist[bj, t]) / (si + sj)
                dist[bi, t] = nv
                dist[t, bi] = nv
        sizes[bi] = si + sj
        active[bj] = False
        ids[bi] = n + step
    return merges
