"""Local-to-global synthesis: merge, weight, select, aggregate, score.

All steps are pure transformations over the local explanations, run
independently per class. Retained local clusters are merged across
instances per event kind (average-linkage over z-scored centroids, cut at a
percentile of the merge distances), summed importances form the
instance-cluster matrix, a greedy budgeted selection covers the globally
important clusters, and the selected instances' events are summarised into
the class-wise explanation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import PipelineConfig
from .data import Dataset, sample_per_class, standardize_values
from .events import KIND_ORDER, SUMMARY_ATTRIBUTES, attribute_values
from .local import LocalExplanation, explain_instance
from .numerics import MergeStep, agglomerative, cut_at_threshold

_STREAM_SAMPLE = 0


@dataclass(frozen=True)
class GlobalCluster:
    global_id: int
    kind: str
    members: tuple[tuple[int, int], ...]  # (instance_id, local cluster_id)
    merged_centroid: tuple[float, ...]


@dataclass(frozen=True)
class MergeOutcome:
    clusters: list[GlobalCluster]
    mapping: dict[tuple[int, int], int]


def merge_clusters(
    locals_: list[LocalExplanation], p: float, pooled_tau: bool = False
) -> MergeOutcome:
    """Merge retained local clusters across instances, kind by kind.

    Centroids are compared in z-scored parameter space so distances are
    commensurate across attributes. The dendrogram cut height is the p-th
    percentile of each kind's merge distances (or of all kinds' distances
    pooled when `pooled_tau` is set).
    """
    if not 0.0 <= p <= 100.0:
        raise ValueError("merge percentile must be in [0, 100]")
    entries: dict[str, list[tuple[int, int, np.ndarray]]] = {k: [] for k in KIND_ORDER}
    for exp in locals_:
        for cluster in exp.clusters:
            entries[cluster.kind].append(
                (exp.instance_id, cluster.cluster_id, np.asarray(cluster.centroid))
            )
    if not any(entries.values()):
        raise ValueError("no retained local clusters to merge")

    per_kind: list[tuple[str, list[tuple[int, int, np.ndarray]], list[MergeStep]]] = []
    for kind in KIND_ORDER:
        kind_entries = entries[kind]
        if not kind_entries:
            continue
        feats = np.array([c for _, _, c in kind_entries])
        mu = feats.mean(axis=0)
        sd = feats.std(axis=0)
        scaled = (feats - mu) / np.where(sd > 0, sd, 1.0)
        merges = agglomerative(scaled) if len(kind_entries) > 1 else []
        per_kind.append((kind, kind_entries, merges))

    pooled: list[float] = [m.distance for _, _, merges in per_kind for m in merges]
    clusters: list[GlobalCluster] = []
    mapping: dict[tuple[int, int], int] = {}
    next_id = 0
    for kind, kind_entries, merges in per_kind:
        if pooled_tau:
            distances = pooled
        else:
            distances = [m.distance for m in merges]
        if merges and distances:
            tau = float(np.percentile(distances, p))
        else:
            tau = 0.0
        labels = cut_at_threshold(merges, tau, n_leaves=len(kind_entries))
        members: dict[int, list[tuple[int, int, np.ndarray]]] = {}
        for entry, label in zip(kind_entries, labels):
            members.setdefault(int(label), []).append(entry)
        for label in sorted(members):
            group = members[label]
            centroid = np.mean([c for _, _, c in group], axis=0)
            clusters.append(
                GlobalCluster(
                    global_id=next_id,
                    kind=kind,
                    members=tuple((iid, cid) for iid, cid, _ in group),
                    merged_centroid=tuple(float(v) for v in centroid),
                )
            )
            for iid, cid, _ in group:
                mapping[(iid, cid)] = next_id
            next_id += 1
    return MergeOutcome(clusters, mapping)


def build_matrix(
    locals_: list[LocalExplanation],
    mapping: dict[tuple[int, int], int],
    n_globals: int,
) -> tuple[np.ndarray, list[int]]:
    """Instance-cluster matrix of summed signed importances."""
    row_ids = [exp.instance_id for exp in locals_]
    M = np.zeros((len(locals_), n_globals))
    for row, exp in enumerate(locals_):
        for cluster in exp.clusters:
            M[row, mapping[(exp.instance_id, cluster.cluster_id)]] += cluster.importance
    return M, row_ids


def global_importance(M: np.ndarray) -> np.ndarray:
    """Cluster weight: sqrt of the column sum of absolute importances."""
    return np.sqrt(np.abs(M).sum(axis=0))


@dataclass(frozen=True)
class SelectedSet:
    ids: tuple[int, ...]  # selection order
    coverage: np.ndarray  # 0/1 per global cluster
    shortfall: int = 0
    budget_clamped: bool = False


def select_instances(
    M: np.ndarray,
    importance: np.ndarray,
    budget: int,
    row_ids: list[int] | None = None,
    epsilon: float = 1e-9,
) -> SelectedSet:
    """Greedy selection maximising importance-weighted coverage gain.

    An instance covers cluster j when |M[i, j]| > epsilon. Each step picks
    the unselected instance with the largest sum of importances over newly
    covered clusters (ties to the lowest instance id) and stops early once
    no positive gain remains.
    """
    if budget < 1:
        raise ValueError("budget must be positive")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    n = M.shape[0]
    if row_ids is None:
        row_ids = list(range(n))
    member = np.abs(M) > epsilon
    covered = np.zeros(M.shape[1], dtype=bool)
    chosen: list[int] = []
    chosen_rows: set[int] = set()
    clamped = budget > n
    effective = min(budget, n)
    while len(chosen) < effective:
        best_row = -1
        best_gain = 0.0
        for row in range(n):
            if row in chosen_rows:
                continue
            gain = float(importance[member[row] & ~covered].sum())
            if gain > best_gain or (
                gain == best_gain
                and best_row >= 0
                and gain > 0.0
                and row_ids[row] < row_ids[best_row]
            ):
                best_gain = gain
                best_row = row
        if best_row < 0 or best_gain <= 0.0:
            break
        chosen.append(best_row)
        chosen_rows.add(best_row)
        covered |= member[best_row]
    return SelectedSet(
        ids=tuple(row_ids[r] for r in chosen),
        coverage=covered.astype(np.int64),
        shortfall=effective - len(chosen),
        budget_clamped=clamped,
    )


@dataclass(frozen=True)
class ClusterSummary:
    global_id: int
    kind: str
    normalised_importance: float
    event_count: int
    stats: dict[str, tuple[float, float]]  # attribute -> (mean, population std)


def aggregate_events(
    selected: SelectedSet,
    clusters: list[GlobalCluster],
    locals_: list[LocalExplanation],
) -> tuple[list[dict], int]:
    """Flatten original-instance events of the selected instances into the
    covered global clusters and summarise each attribute as mean +- std.

    Returns (entries without importances yet, count of covered clusters
    omitted for having no events).
    """
    if not selected.ids:
        raise ValueError("cannot aggregate an empty selection")
    lookup = {
        (exp.instance_id, c.cluster_id): c for exp in locals_ for c in exp.clusters
    }
    selected_ids = set(selected.ids)
    entries: list[dict] = []
    omitted = 0
    for cluster in clusters:
        if not selected.coverage[cluster.global_id]:
            continue
        pooled = [
            event
            for iid, cid in cluster.members
            if iid in selected_ids
            for event in lookup[(iid, cid)].member_events
        ]
        if not pooled:
            omitted += 1
            continue
        stats: dict[str, tuple[float, float]] = {}
        for attr in SUMMARY_ATTRIBUTES[cluster.kind]:
            vals = np.array([attribute_values(e)[attr] for e in pooled])
            stats[attr] = (float(vals.mean()), float(vals.std()))
        entries.append(
            {
                "global_id": cluster.global_id,
                "kind": cluster.kind,
                "event_count": len(pooled),
                "stats": stats,
            }
        )
    return entries, omitted


def global_faithfulness(
    selected_ids, fidelity_by_instance: dict[int, float | None]
) -> tuple[float, int]:
    """Mean local fidelity over the selected instances.

    Undefined fidelities contribute 0 and are counted separately.
    """
    ids = list(selected_ids)
    if not ids:
        raise ValueError("global faithfulness needs a nonempty selection")
    undefined = 0
    total = 0.0
    for iid in ids:
        fid = fidelity_by_instance[iid]
        if fid is None:
            undefined += 1
        else:
            total += fid
    return total / len(ids), undefined


@dataclass
class GlobalSummary:
    class_label: int
    percentile: float
    gf: float
    clusters: list[ClusterSummary]
    total_global_clusters: int
    selected_ids: tuple[int, ...]
    diagnostics: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "class_label": self.class_label,
            "percentile": self.percentile,
            "gf": self.gf,
            "total_global_clusters": self.total_global_clusters,
            "selected_instances": list(self.selected_ids),
            "clusters": [
                {
                    "global_id": c.global_id,
                    "kind": c.kind,
                    "normalised_importance": c.normalised_importance,
                    "event_count": c.event_count,
                    "stats": {
                        attr: {"mean": m, "std": s} for attr, (m, s) in c.stats.items()
                    },
                }
                for c in self.clusters
            ],
            "diagnostics": self.diagnostics,
            "config": self.config,
        }


def summarize_class(
    class_label: int,
    locals_: list[LocalExplanation],
    p: float,
    budget: int,
    epsilon: float = 1e-9,
    pooled_tau: bool = False,
    config_echo: dict | None = None,
) -> GlobalSummary:
    """Run merge -> matrix -> importance -> selection -> aggregation -> GF
    for one class at one merge percentile."""
    outcome = merge_clusters(locals_, p, pooled_tau)
    M, row_ids = build_matrix(locals_, outcome.mapping, len(outcome.clusters))
    importance = global_importance(M)
    selected = select_instances(M, importance, budget, row_ids, epsilon)
    if not selected.ids:
        raise ValueError(
            f"class {class_label}: no instance carries importance above epsilon"
        )
    entries, omitted = aggregate_events(selected, outcome.clusters, locals_)
    fidelities = {exp.instance_id: exp.fidelity for exp in locals_}
    gf, undefined = global_faithfulness(selected.ids, fidelities)
    reported_weight = sum(importance[e["global_id"]] for e in entries)
    clusters = [
        ClusterSummary(
            global_id=e["global_id"],
            kind=e["kind"],
            normalised_importance=(
                float(importance[e["global_id"]] / reported_weight)
                if reported_weight > 0
                else 1.0 / len(entries)
            ),
            event_count=e["event_count"],
            stats=e["stats"],
        )
        for e in entries
    ]
    return GlobalSummary(
        class_label=class_label,
        percentile=p,
        gf=gf,
        clusters=clusters,
        total_global_clusters=len(outcome.clusters),
        selected_ids=selected.ids,
        diagnostics={
            "covered_clusters": int(selected.coverage.sum()),
            "omitted_empty_clusters": omitted,
            "selection_shortfall": selected.shortfall,
            "budget_clamped": selected.budget_clamped,
            "undefined_fidelities": undefined,
        },
        config=config_echo or {},
    )


@dataclass
class PipelineResult:
    summaries: dict[tuple[int, float], GlobalSummary]  # (class, percentile)
    locals_by_class: dict[int, list[LocalExplanation]]
    metrics: dict

    def macro_gf(self, p: float) -> float:
        values = [s.gf for (label, pp), s in self.summaries.items() if pp == p]
        return float(np.mean(values))


def run_pipeline(dataset: Dataset, predictor, cfg: PipelineConfig) -> PipelineResult:
    """Full class-wise local-to-global run over a sampled instance subset.

    Local explanations are computed once per instance and reused across all
    merge percentiles. Instances may be explained concurrently (`cfg.jobs`);
    results do not depend on the degree of parallelism.
    """
    instance_set = sample_per_class(dataset, cfg.n_inst, [cfg.seed, _STREAM_SAMPLE])
    values = standardize_values(dataset.values)

    def explain(idx: int) -> LocalExplanation:
        return explain_instance(
            values[idx], predictor, cfg.explainer, cfg.seed, instance_id=int(idx)
        )

    all_indices = instance_set.indices
    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            explanations = dict(zip(all_indices, pool.map(explain, all_indices)))
    else:
        explanations = {idx: explain(idx) for idx in all_indices}

    echo = cfg.echo()
    echo["dataset"] = dataset.name
    summaries: dict[tuple[int, float], GlobalSummary] = {}
    per_p: dict[float, dict] = {}
    for p in cfg.percentiles:
        class_gf: dict[int, float] = {}
        class_clusters: dict[int, int] = {}
        for label in sorted(instance_set.by_class):
            locals_ = [explanations[int(i)] for i in instance_set.by_class[label]]
            summary = summarize_class(
                label,
                locals_,
                p,
                cfg.effective_budget,
                cfg.coverage_epsilon,
                cfg.pooled_tau,
                config_echo=echo,
            )
            summaries[(label, p)] = summary
            class_gf[label] = summary.gf
            class_clusters[label] = summary.total_global_clusters
        per_p[p] = {
            "per_class_gf": class_gf,
            "macro_gf": float(np.mean(list(class_gf.values()))),
            "per_class_clusters": class_clusters,
            "total_clusters": int(sum(class_clusters.values())),
        }
    metrics = {
        "dataset": dataset.name,
        "seed": cfg.seed,
        "per_percentile": per_p,
        "config": echo,
    }
    locals_by_class = {
        label: [explanations[int(i)] for i in instance_set.by_class[label]]
        for label in sorted(instance_set.by_class)
    }
    return PipelineResult(summaries, locals_by_class, metrics)
