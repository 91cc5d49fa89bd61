"""Report figures rendered next to the CSV/JSON outputs.

The delimited files remain the authoritative outputs; these PNGs are the
quick-look companions the stats and classify stages drop in figures/.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

GROUP_STYLE = {0: ("tab:blue", "label 0"), 1: ("tab:red", "label 1")}


def _finish(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def group_betti_curves(path, ts, curves: dict[tuple[int, int], np.ndarray]) -> Path:
    """One panel per homology dimension, group means overlaid."""
    dims = sorted({k for (_, k) in curves})
    fig, axes = plt.subplots(1, len(dims), figsize=(4 * len(dims), 3.2), squeeze=False)
    for ax, k in zip(axes[0], dims):
        for label in (0, 1):
            if (label, k) in curves:
                color, name = GROUP_STYLE[label]
                ax.plot(ts, curves[(label, k)], color=color, label=name)
        ax.set_title(f"mean Betti curve, dim {k}")
        ax.set_xlabel("threshold")
        ax.set_ylabel(f"$\\beta_{k}$")
        ax.legend(frameon=False)
    return _finish(fig, path)


def threshold_tstats(path, comparison) -> Path:
    """|t| per threshold with the top-ranked thresholds highlighted."""
    ids = [it.item_id for it in comparison.items]
    ts = [abs(it.t) if np.isfinite(it.t) else 0.0 for it in comparison.items]
    top = set(comparison.ranking[:10])
    colors = ["tab:orange" if i in top else "tab:gray" for i in ids]
    fig, ax = plt.subplots(figsize=(7, 3.2))
    ax.bar(ids, ts, width=(max(ids) - min(ids)) / max(len(ids), 1), color=colors)
    ax.set_xlabel("threshold")
    ax.set_ylabel("|t|")
    ax.set_title("group difference in live cycle/cavity counts")
    return _finish(fig, path)


def node_votes(path, votes) -> Path:
    """Vote counts for the aggregated node ranking."""
    names = [str(v.item_id) for v in votes]
    counts = [v.votes for v in votes]
    fig, ax = plt.subplots(figsize=(max(4, 0.4 * len(names)), 3.2))
    ax.bar(names, counts, color="tab:purple")
    ax.set_xlabel("node")
    ax.set_ylabel("votes")
    ax.set_title("node importance votes across thresholds")
    return _finish(fig, path)


def classifier_metrics(path, reports) -> Path:
    """Grouped bars: mean CV metrics per configured model."""
    metrics = ("accuracy", "precision", "recall", "f1")
    kinds = [r.spec.kind for r in reports]
    x = np.arange(len(kinds))
    width = 0.8 / len(metrics)
    fig, ax = plt.subplots(figsize=(1.8 * max(len(kinds), 2) + 2, 3.2))
    for mi, name in enumerate(metrics):
        vals = [r.mean_metrics[name] for r in reports]
        ax.bar(x + mi * width, vals, width=width, label=name)
    ax.set_xticks(x + 1.5 * width)
    ax.set_xticklabels(kinds)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("mean over folds")
    ax.legend(frameon=False, ncol=2)
    return _finish(fig, path)
