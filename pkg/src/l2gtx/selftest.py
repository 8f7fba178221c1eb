"""Bundled oracle suite for `l2gtx selftest`.

Each check recomputes a library result through an independent route (plain
dynamic programming, normal equations, brute-force search, two-pass
statistics) and compares. Setting L2GTX_SELFTEST_CORRUPT=<check> perturbs
that check's library-side value, which is how the wiring itself is tested.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import numerics, synthesis


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def _corrupted(name: str) -> bool:
    return os.environ.get("L2GTX_SELFTEST_CORRUPT", "") == name


def _dtw_reference(a: np.ndarray, b: np.ndarray) -> float:
    n, m = len(a), len(b)
    cost = np.full((n, m), np.inf)
    cost[0, 0] = abs(a[0] - b[0])
    for i in range(n):
        for j in range(m):
            if i == 0 and j == 0:
                continue
            prev = []
            if i > 0:
                prev.append(cost[i - 1, j])
            if j > 0:
                prev.append(cost[i, j - 1])
            if i > 0 and j > 0:
                prev.append(cost[i - 1, j - 1])
            cost[i, j] = abs(a[i] - b[j]) + min(prev)
    return float(cost[-1, -1])


def check_dtw(n_cases: int = 100, seed: int = 11) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_cases):
        a = rng.normal(size=int(rng.integers(1, 17)))
        b = rng.normal(size=int(rng.integers(1, 17)))
        got = numerics.dtw_distance(a, b, radius=32)
        if _corrupted("dtw"):
            got += 0.1
        worst = max(worst, abs(got - _dtw_reference(a, b)))
    return CheckResult("dtw", worst == 0.0, f"max |diff| = {worst:g}")


def _ridge_reference(Z, y, w, lam):
    n_feat = Z.shape[1]
    phi = np.hstack([np.ones((Z.shape[0], 1)), Z])
    penalty = lam * np.diag([0.0] + [1.0] * n_feat)
    G = phi.T @ (w[:, None] * phi) + penalty
    solution = np.linalg.solve(G, phi.T @ (w * y))
    return solution[1:], solution[0]


def check_ridge(n_cases: int = 50, seed: int = 12) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_cases):
        n = int(rng.integers(8, 40))
        d = int(rng.integers(1, 6))
        Z = rng.normal(size=(n, d))
        y = rng.normal(size=n)
        w = rng.uniform(0.1, 2.0, size=n)
        lam = float(rng.choice([0.0, 0.1, 1.0, 10.0]))
        got = numerics.weighted_ridge(Z, y, w, lam)
        coef = got.coef + (0.1 if _corrupted("ridge") else 0.0)
        ref_coef, ref_int = _ridge_reference(Z, y, w, lam)
        worst = max(
            worst,
            float(np.max(np.abs(coef - ref_coef))),
            abs(got.intercept - ref_int),
        )
    return CheckResult("ridge", worst < 1e-8, f"max |diff| = {worst:g}")


def check_greedy(n_cases: int = 30, seed: int = 13) -> CheckResult:
    rng = np.random.default_rng(seed)
    for case in range(n_cases):
        n = int(rng.integers(3, 13))
        g = int(rng.integers(2, 11))
        M = rng.normal(size=(n, g)) * (rng.random(size=(n, g)) < 0.5)
        importance = synthesis.global_importance(M)
        budget = int(rng.integers(1, 4))
        member = np.abs(M) > 1e-9
        covered = np.zeros(g, dtype=bool)
        picked: set[int] = set()
        steps = []
        for _ in range(budget):
            gains = [
                (float(importance[member[i] & ~covered].sum()), i)
                for i in range(n)
                if i not in picked
            ]
            best_gain = max(gain for gain, _ in gains)
            if best_gain <= 0:
                break
            best = min(i for gain, i in gains if gain == best_gain)
            steps.append(best)
            picked.add(best)
            covered |= member[best]
        got = list(
            synthesis.select_instances(M, importance, budget, epsilon=1e-9).ids
        )
        if _corrupted("greedy"):
            got = got[::-1]
        if got != steps:
            return CheckResult("greedy", False, f"case {case}: {got} != {steps}")
    return CheckResult("greedy", True, f"{n_cases} cases exact")


def check_percentile(seed: int = 14) -> CheckResult:
    merges = [
        numerics.MergeStep(0, 1, 1.0, 5),
        numerics.MergeStep(2, 3, 2.0, 6),
        numerics.MergeStep(5, 6, 3.0, 7),
        numerics.MergeStep(4, 7, 4.0, 8),
    ]
    expectations = {100.0: 1, 50.0: 3, 0.0: 4}
    rng = np.random.default_rng(seed)
    for p, want in expectations.items():
        labels = numerics.cut_at_percentile(merges, p, n_leaves=5)
        count = len(set(labels.tolist()))
        if _corrupted("percentile"):
            count += 1
        if count != want:
            return CheckResult(
                "percentile", False, f"p={p}: {count} clusters, expected {want}"
            )
    for _ in range(20):
        pts = rng.normal(size=(int(rng.integers(2, 12)), 2))
        ms = numerics.agglomerative(pts)
        p = float(rng.uniform(0, 100))
        tau = float(np.percentile([m.distance for m in ms], p))
        want_labels = numerics.cut_at_threshold(ms, tau, len(pts))
        got_labels = numerics.cut_at_percentile(ms, p, len(pts))
        if not np.array_equal(want_labels, got_labels):
            return CheckResult("percentile", False, "random case mismatch")
    return CheckResult("percentile", True, "fixed and random cases exact")


def check_aggregation(n_cases: int = 50, seed: int = 15) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_cases):
        vals = rng.normal(size=int(rng.integers(1, 30)))
        mean = float(vals.mean())
        std = float(vals.std())
        if _corrupted("aggregation"):
            mean += 0.1
        total = 0.0
        for v in vals:
            total += float(v)
        ref_mean = total / len(vals)
        acc = 0.0
        for v in vals:
            acc += (float(v) - ref_mean) ** 2
        ref_std = (acc / len(vals)) ** 0.5
        worst = max(worst, abs(mean - ref_mean), abs(std - ref_std))
    return CheckResult("aggregation", worst < 1e-12, f"max |diff| = {worst:g}")


def run_selftest() -> list[CheckResult]:
    return [
        check_dtw(),
        check_ridge(),
        check_greedy(),
        check_percentile(),
        check_aggregation(),
    ]
