"""Group-level comparisons: Betti-curve areas, threshold and node rankings.

All two-sample comparisons use Welch's t-test (no equal-variance
assumption) with two-sided p-values from the regularized incomplete beta
function.  No multiple-comparison correction is applied; consumers can
correct the exported p-values themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .errors import DegenerateGroups, InvariantViolation
from .ingest import DistanceMatrix
from .persistence import PersistenceDiagram, node_participation
from .vectorize import bin_centers, live_counts


@dataclass(frozen=True)
class ComparisonItem:
    item_id: object
    t: float
    p: float


@dataclass
class GroupComparison:
    """Per-item t-statistics with items ranked by |t| descending."""

    statistic_name: str
    items: list[ComparisonItem]
    ranking: list[object]

    def __post_init__(self):
        ids = {it.item_id for it in self.items}
        if set(self.ranking) != ids or len(self.ranking) != len(ids):
            raise InvariantViolation("ranking must be a permutation of item ids")
        for it in self.items:
            if not 0.0 <= it.p <= 1.0:
                raise InvariantViolation(f"p-value {it.p} outside [0, 1]")


def betti_auc(
    diagram: PersistenceDiagram,
    dims: set[int] = frozenset({1, 2}),
    n_bins: int = 100,
    value_range: tuple[float, float] = (0.0, 2.0),
) -> dict[int, float]:
    """Area under each requested Betti curve: mean sampled count x width.

    Uses the same cell-center grid as the vectorized Betti curves, so the
    result equals range width times the mean of that feature segment.
    """
    if not set(dims) <= {0, 1, 2}:
        raise InvariantViolation(f"dims must be within {{0,1,2}}, got {dims}")
    ts = bin_centers(n_bins, *value_range)
    width = value_range[1] - value_range[0]
    out = {}
    for k in sorted(dims):
        b, d = diagram.births_deaths(k, essential_to=diagram.max_eps)
        counts = live_counts(b, d, ts) if b.size else np.zeros_like(ts)
        out[k] = float(counts.mean() * width)
    return out


def group_ttest(values_a, values_b) -> tuple[float, float]:
    """Welch's two-sample t with Welch-Satterthwaite df, two-sided p.

    Both groups constant with equal means raises DegenerateGroups; constant
    groups with different means return (signed inf, 0.0).
    """
    a = np.asarray(values_a, dtype=np.float64)
    b = np.asarray(values_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise InvariantViolation("each group needs at least 2 values")
    ma, mb = a.mean(), b.mean()
    va, vb = a.var(ddof=1), b.var(ddof=1)
    sa, sb = va / a.size, vb / b.size
    tot = sa + sb
    if tot == 0.0:  # constant groups (or variance underflow)
        if ma == mb:
            raise DegenerateGroups("both groups constant with equal means")
        return (math.inf if ma > mb else -math.inf), 0.0
    t = (ma - mb) / math.sqrt(tot)
    # Welch-Satterthwaite df, normalized by tot^2 so tiny variances cannot
    # underflow to 0/0.
    ra, rb = sa / tot, sb / tot
    df = 1.0 / (ra * ra / (a.size - 1) + rb * rb / (b.size - 1))
    if t == 0.0:
        return 0.0, 1.0
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return float(t), min(max(p, 0.0), 1.0)


def _safe_ttest(values_a, values_b) -> tuple[float, float]:
    # Items with no variation and no mean gap show no group difference;
    # rankings must still include them.
    try:
        return group_ttest(values_a, values_b)
    except DegenerateGroups:
        return 0.0, 1.0


def _split_by_label(values: np.ndarray, labels: np.ndarray):
    labels = np.asarray(labels)
    if set(np.unique(labels)) != {0, 1}:
        raise InvariantViolation("cohort must contain both labels 0 and 1")
    return values[labels == 0], values[labels == 1]


def _ranked(statistic_name: str, ids: list, ts: list[float], ps: list[float]) -> GroupComparison:
    items = [ComparisonItem(i, t, p) for i, t, p in zip(ids, ts, ps)]
    order = sorted(range(len(items)), key=lambda i: (-abs(items[i].t), i))
    return GroupComparison(statistic_name, items, [ids[i] for i in order])


def rank_thresholds(
    diagrams: list[PersistenceDiagram],
    labels,
    n_thresholds: int = 100,
    dims: set[int] = frozenset({1, 2}),
    value_range: tuple[float, float] = (0.0, 2.0),
) -> GroupComparison:
    """Rank filtration thresholds by group difference in live-bar counts.

    The per-subject statistic at a threshold is the pooled count of live
    bars over the requested dimensions (born <= t < death; essential bars
    stay alive).  Thresholds are the same cell-center grid the Betti curves
    sample.
    """
    ts = bin_centers(n_thresholds, *value_range)
    counts = np.zeros((len(diagrams), n_thresholds), dtype=np.float64)
    for si, dg in enumerate(diagrams):
        for k in sorted(dims):
            b, d = dg.births_deaths(k, essential_to=None)
            if b.size:
                counts[si] += live_counts(b, d, ts)
    ids = [float(t) for t in ts]
    tstats, pvals = [], []
    for col in range(n_thresholds):
        a, b = _split_by_label(counts[:, col], labels)
        t, p = _safe_ttest(a, b)
        tstats.append(t)
        pvals.append(p)
    return _ranked("live_cycle_cavity_count", ids, tstats, pvals)


def rank_nodes(
    matrices: list[DistanceMatrix], labels, eps: float, top_k: int = 10
) -> GroupComparison:
    """Rank nodes by group difference in cycle/cavity participation at eps.

    Returns the top_k nodes (clamped to N) by |t|.
    """
    ns = {m.n for m in matrices}
    if len(ns) != 1:
        raise InvariantViolation(f"all subjects must share one region count, got {ns}")
    n = ns.pop()
    part = np.stack([node_participation(m, eps) for m in matrices]).astype(np.float64)
    tstats, pvals = [], []
    for v in range(n):
        a, b = _split_by_label(part[:, v], labels)
        t, p = _safe_ttest(a, b)
        tstats.append(t)
        pvals.append(p)
    full = _ranked(f"node_participation_eps_{eps:g}", list(range(n)), tstats, pvals)
    keep = full.ranking[: min(top_k, n)]
    items = [it for it in full.items if it.item_id in set(keep)]
    return GroupComparison(full.statistic_name, items, keep)


@dataclass(frozen=True)
class NodeVote:
    item_id: object
    votes: int
    mean_abs_t: float


def vote_nodes(rankings: list[GroupComparison], top_k: int = 10) -> list[NodeVote]:
    """Aggregate rankings: one vote per appearance in a ranking's top_k.

    Ordered by votes descending, ties by mean |t| over the rankings where
    the node appears, then by id for full determinism.
    """
    if not rankings:
        raise InvariantViolation("need at least one ranking to vote")
    votes: dict[object, int] = {}
    tsums: dict[object, list[float]] = {}
    for r in rankings:
        by_id = {it.item_id: it for it in r.items}
        for node in r.ranking[:top_k]:
            votes[node] = votes.get(node, 0) + 1
            tsums.setdefault(node, []).append(abs(by_id[node].t))
    out = [
        NodeVote(node, votes[node], float(np.mean(tsums[node])))
        for node in votes
    ]
    out.sort(key=lambda nv: (-nv.votes, -nv.mean_abs_t, str(nv.item_id)))
    return out
