"""End-to-end pipeline stages behind the CLI.

Each stage reads/writes plain CSV and JSON under the configured output
directory so stages can rerun independently and results stay diffable.
All floats are serialized with shortest round-trip repr, which makes
reruns with identical seeds byte-identical; the only nondeterministic
field in any output is the single "generated_at" stamp in JSON reports.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import plots
from .classify import ClassifierSpec, EvalReport, kfold_cv
from .errors import CohortDataError, ConfigError, DegenerateGroups, TopofcError
from .filtration import DEFAULT_SIMPLEX_CAP, build_rips
from .ingest import (
    CohortRecord,
    ShapeSpec,
    load_record,
    read_manifest_entries,
    synth_cohort,
)
from .persistence import compute_persistence, read_diagram_csv, write_diagram_csv
from .stats import betti_auc, group_ttest, rank_nodes, rank_thresholds, vote_nodes
from .vectorize import (
    FeatureVector,
    Segment,
    VectorizationConfig,
    bin_centers,
    extract_features,
    live_counts,
)


@dataclass
class FiltrationSettings:
    max_dim: int = 3
    max_eps: float = 2.0
    simplex_cap: int = DEFAULT_SIMPLEX_CAP


@dataclass
class CVSettings:
    k: int = 5
    seed: int = 0


@dataclass
class StatsSettings:
    n_thresholds: int = 100
    eps_list: tuple[float, ...] = (0.7, 1.0, 1.3)
    top_k: int = 10
    dims: tuple[int, ...] = (1, 2)


@dataclass
class SynthSettings:
    n_per_class: int
    class_a: ShapeSpec
    class_b: ShapeSpec


@dataclass
class PipelineConfig:
    out_dir: Path = Path("out")
    manifest: Path | None = None
    seed: int = 0
    jobs: int = 1
    filtration: FiltrationSettings = field(default_factory=FiltrationSettings)
    vectorize: VectorizationConfig = field(default_factory=VectorizationConfig)
    classifiers: list[ClassifierSpec] = field(default_factory=list)
    cv: CVSettings = field(default_factory=CVSettings)
    stats: StatsSettings = field(default_factory=StatsSettings)
    synth: SynthSettings | None = None

    def to_json_dict(self) -> dict:
        d = {
            "out_dir": str(self.out_dir),
            "manifest": None if self.manifest is None else str(self.manifest),
            "seed": self.seed,
            "jobs": self.jobs,
            "filtration": asdict(self.filtration),
            "vectorize": {
                "n_bins": self.vectorize.n_bins,
                "n_layers": list(self.vectorize.n_layers),
                "heat_sigmas": list(self.vectorize.heat_sigmas),
                "heat_grid": self.vectorize.heat_grid,
                "range": list(self.vectorize.value_range),
                "max_hom_dim": self.vectorize.max_hom_dim,
            },
            "classifiers": [
                {
                    "kind": s.kind,
                    "l2": s.l2,
                    "learning_rate": s.learning_rate,
                    "epochs": s.epochs,
                    "max_iters": s.max_iters,
                    "hidden": list(s.hidden),
                    "C": s.C,
                    "seed": s.seed,
                }
                for s in self.classifiers
            ],
            "cv": asdict(self.cv),
            "stats": {
                "n_thresholds": self.stats.n_thresholds,
                "eps_list": list(self.stats.eps_list),
                "top_k": self.stats.top_k,
                "dims": list(self.stats.dims),
            },
        }
        if self.synth is not None:
            d["synth"] = {
                "n_per_class": self.synth.n_per_class,
                "class_a": asdict(self.synth.class_a),
                "class_b": asdict(self.synth.class_b),
            }
        return d


def _take(raw: dict, key: str, default, caster):
    try:
        return caster(raw[key]) if key in raw else default
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}") from exc


def load_config(path: str | Path) -> PipelineConfig:
    """Parse the JSON pipeline config; unknown keys are rejected."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")

    known = {
        "out_dir", "manifest", "seed", "jobs",
        "filtration", "vectorize", "classifiers", "cv", "stats", "synth",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    try:
        filt = FiltrationSettings(**raw.get("filtration", {}))
        vec_raw = dict(raw.get("vectorize", {}))
        if "range" in vec_raw:
            vec_raw["value_range"] = tuple(vec_raw.pop("range"))
        vec = VectorizationConfig(**vec_raw)
        specs = [ClassifierSpec(**c) for c in raw.get("classifiers", [])]
        cv = CVSettings(**raw.get("cv", {}))
        st_raw = dict(raw.get("stats", {}))
        if "eps_list" in st_raw:
            st_raw["eps_list"] = tuple(st_raw["eps_list"])
        if "dims" in st_raw:
            st_raw["dims"] = tuple(st_raw["dims"])
        st = StatsSettings(**st_raw)
        synth = None
        if "synth" in raw:
            s = raw["synth"]
            synth = SynthSettings(
                n_per_class=int(s["n_per_class"]),
                class_a=ShapeSpec(**s["class_a"]),
                class_b=ShapeSpec(**s["class_b"]),
            )
    except (TypeError, KeyError, TopofcError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
    if synth is not None and synth.n_per_class < 2:
        raise ConfigError("synth.n_per_class must be >= 2")

    manifest = raw.get("manifest")
    return PipelineConfig(
        out_dir=Path(_take(raw, "out_dir", "out", str)),
        manifest=None if manifest is None else (path.parent / manifest),
        seed=_take(raw, "seed", 0, int),
        jobs=_take(raw, "jobs", 1, int),
        filtration=filt,
        vectorize=vec,
        classifiers=specs,
        cv=cv,
        stats=st,
        synth=synth,
    )


def _report_scaffold(config: PipelineConfig) -> dict:
    return {
        "config": config.to_json_dict(),
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_fallback)
        fh.write("\n")


def _json_fallback(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    raise TypeError(f"not JSON serializable: {obj!r}")


def _fmt(x: float) -> str:
    return repr(float(x))


def _load_cohort(config: PipelineConfig) -> list[CohortRecord]:
    if config.manifest is None:
        raise ConfigError("this command needs a 'manifest' entry in the config")
    entries = read_manifest_entries(config.manifest)
    records, failures = [], []
    for entry in entries:
        try:
            records.append(load_record(entry))
        except TopofcError as exc:
            failures.append((entry.subject_id, exc))
    if failures:
        raise CohortDataError(failures)
    return records


def _subject_outputs(args):
    """Worker: diagram + feature vector for one record."""
    record, filt, vec = args
    c = build_rips(
        record.distance, max_dim=filt.max_dim, max_eps=filt.max_eps,
        simplex_cap=filt.simplex_cap,
    )
    diagram = compute_persistence(c)
    features = extract_features(diagram, record.distance, vec)
    return record.subject_id, diagram, features


def run_features(config: PipelineConfig) -> Path:
    """Stage 1+2: diagrams and fused features for every manifest subject.

    Writes diagrams/<subject>.csv, features.csv and layout.json under the
    output directory; reruns with unchanged inputs are byte-identical.
    """
    records = _load_cohort(config)
    out = Path(config.out_dir)
    (out / "diagrams").mkdir(parents=True, exist_ok=True)

    jobs = [(r, config.filtration, config.vectorize) for r in records]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_subject_outputs, jobs))
    else:
        results = [_subject_outputs(j) for j in jobs]

    labels = {r.subject_id: r.label for r in records}
    vectors: list[FeatureVector] = []
    layout: tuple[Segment, ...] | None = None
    for sid, diagram, features in results:
        write_diagram_csv(diagram, out / "diagrams" / f"{sid}.csv")
        if layout is None:
            layout = features.layout
        elif layout != features.layout:
            raise CohortDataError([(sid, TopofcError("feature layout differs across cohort"))])
        vectors.append(features)

    features_path = out / "features.csv"
    with open(features_path, "w", encoding="utf-8") as fh:
        fh.write("subject_id,label," + ",".join(f"f{i}" for i in range(len(vectors[0].values))) + "\n")
        for fv in vectors:
            row = ",".join(_fmt(x) for x in fv.values)
            fh.write(f"{fv.subject_id},{labels[fv.subject_id]},{row}\n")

    _write_json(
        out / "layout.json",
        {
            "segments": [asdict(s) for s in layout],
            "n_features": int(sum(s.length for s in layout)),
            "config": config.to_json_dict(),
        },
    )
    return features_path


def read_features_csv(path: str | Path) -> tuple[list[str], np.ndarray, np.ndarray]:
    """(subject_ids, labels, matrix) from a features.csv written above."""
    ids, labels, rows = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        fh.readline()
        for line in fh:
            parts = line.rstrip("\n").split(",")
            ids.append(parts[0])
            labels.append(int(parts[1]))
            rows.append([float(x) for x in parts[2:]])
    return ids, np.array(labels, dtype=np.int64), np.array(rows, dtype=np.float64)


def run_classify(config: PipelineConfig, features_path: Path | None = None) -> list[Path]:
    """Stage 3: cross-validated evaluation of every configured classifier."""
    out = Path(config.out_dir)
    if features_path is None:
        features_path = out / "features.csv"
    if not config.classifiers:
        raise ConfigError("no classifiers configured")
    layout_path = out / "layout.json"
    if layout_path.exists():
        with open(layout_path, "r", encoding="utf-8") as fh:
            n_expected = json.load(fh)["n_features"]
    else:
        n_expected = None

    ids, labels, x = read_features_csv(features_path)
    if n_expected is not None and x.shape[1] != n_expected:
        raise CohortDataError(
            [("features.csv", TopofcError(
                f"feature width {x.shape[1]} != layout sidecar {n_expected}"))]
        )

    paths = []
    reports: list[EvalReport] = []
    for i, spec in enumerate(config.classifiers):
        report = kfold_cv(spec, x, labels, k=config.cv.k, seed=config.cv.seed)
        payload = _report_scaffold(config)
        payload.update(report.to_json_dict())
        payload["subjects"] = ids
        p = out / f"report_{i:02d}_{spec.kind}.json"
        _write_json(p, payload)
        paths.append(p)
        reports.append(report)

    plots.classifier_metrics(out / "figures" / "classifier_metrics.png", reports)

    header = f"{'model':<12} {'accuracy':>9} {'precision':>9} {'recall':>9} {'f1':>9}"
    print(header)
    print("-" * len(header))
    for report in reports:
        m = report.mean_metrics
        print(
            f"{report.spec.kind:<12} {m['accuracy']:>9.3f} {m['precision']:>9.3f} "
            f"{m['recall']:>9.3f} {m['f1']:>9.3f}"
        )
    return paths


def _comparison_dict(gc) -> dict:
    return {
        "statistic": gc.statistic_name,
        "items": [{"id": it.item_id, "t": it.t, "p": it.p} for it in gc.items],
        "ranking": list(gc.ranking),
    }


def run_stats(config: PipelineConfig, diagrams_dir: Path | None = None) -> list[Path]:
    """Stage 4: threshold ranking, node ranking, Betti-AUC group summary.

    Alongside the JSON reports this writes per-group mean Betti curves as
    CSV and renders the report figures.
    """
    out = Path(config.out_dir)
    if diagrams_dir is None:
        diagrams_dir = out / "diagrams"
    records = _load_cohort(config)
    labels = np.array([r.label for r in records], dtype=np.int64)

    diagrams = []
    missing = []
    for r in records:
        p = Path(diagrams_dir) / f"{r.subject_id}.csv"
        if not p.exists():
            missing.append((r.subject_id, TopofcError(f"missing diagram file {p}")))
            continue
        diagrams.append(read_diagram_csv(p, r.subject_id, config.filtration.max_eps))
    if missing:
        raise CohortDataError(missing)

    st = config.stats
    dims = set(st.dims)
    paths = []

    thr = rank_thresholds(
        diagrams, labels, n_thresholds=st.n_thresholds, dims=dims,
        value_range=config.vectorize.value_range,
    )
    payload = _report_scaffold(config)
    payload.update(_comparison_dict(thr))
    p = out / "threshold_ranking.json"
    _write_json(p, payload)
    paths.append(p)

    matrices = [r.distance for r in records]
    per_eps = []
    for eps in st.eps_list:
        per_eps.append(rank_nodes(matrices, labels, eps, top_k=st.top_k))
    votes = vote_nodes(per_eps, top_k=st.top_k)
    payload = _report_scaffold(config)
    payload.update(
        {
            "per_threshold": [_comparison_dict(gc) for gc in per_eps],
            "eps_list": list(st.eps_list),
            "votes": [
                {"id": v.item_id, "votes": v.votes, "mean_abs_t": v.mean_abs_t} for v in votes
            ],
        }
    )
    p = out / "node_ranking.json"
    _write_json(p, payload)
    paths.append(p)

    auc_dims = sorted(dims)
    aucs = np.array(
        [[betti_auc(dg, {k}, st.n_thresholds, config.vectorize.value_range)[k] for k in auc_dims]
         for dg in diagrams]
    )
    summary = {"dims": auc_dims, "groups": {}}
    for label in (0, 1):
        sel = aucs[labels == label]
        summary["groups"][str(label)] = {
            "n": int(sel.shape[0]),
            "mean_auc": {str(k): float(sel[:, i].mean()) for i, k in enumerate(auc_dims)},
        }
    summary["welch"] = {}
    for i, k in enumerate(auc_dims):
        try:
            t, pv = group_ttest(aucs[labels == 0, i], aucs[labels == 1, i])
        except DegenerateGroups:
            t, pv = 0.0, 1.0  # both groups constant and equal: no difference
        summary["welch"][str(k)] = {"t": t, "p": pv}
    payload = _report_scaffold(config)
    payload.update(summary)
    p = out / "betti_auc_summary.json"
    _write_json(p, payload)
    paths.append(p)

    # Per-group mean Betti curves, one row per (label, dim).
    ts = bin_centers(st.n_thresholds, *config.vectorize.value_range)
    curves: dict[tuple[int, int], np.ndarray] = {}
    for label in (0, 1):
        group = [dg for dg, l in zip(diagrams, labels) if l == label]
        for k in (0, 1, 2):
            acc = np.zeros_like(ts)
            for dg in group:
                b, d = dg.births_deaths(k, essential_to=dg.max_eps)
                if b.size:
                    acc += live_counts(b, d, ts)
            curves[(label, k)] = acc / max(len(group), 1)
    curves_path = out / "group_betti_curves.csv"
    with open(curves_path, "w", encoding="utf-8") as fh:
        fh.write("label,dim," + ",".join(_fmt(t) for t in ts) + "\n")
        for (label, k), curve in sorted(curves.items()):
            fh.write(f"{label},{k}," + ",".join(_fmt(v) for v in curve) + "\n")
    paths.append(curves_path)

    figdir = out / "figures"
    plots.group_betti_curves(figdir / "group_betti_curves.png", ts, curves)
    plots.threshold_tstats(figdir / "threshold_tstats.png", thr)
    plots.node_votes(figdir / "node_votes.png", votes)
    return paths


def run_synth(config: PipelineConfig) -> Path:
    """Write a synthetic cohort (distance CSVs) plus its manifest."""
    if config.synth is None:
        raise ConfigError("config has no 'synth' section")
    s = config.synth
    out = Path(config.out_dir)
    data_dir = out / "data"
    data_dir.mkdir(parents=True, exist_ok=True)
    records = synth_cohort(s.n_per_class, s.class_a, s.class_b, config.seed)
    manifest = []
    for r in records:
        fname = f"{r.subject_id}.csv"
        with open(data_dir / fname, "w", encoding="utf-8") as fh:
            for row in r.distance.w:
                fh.write(",".join(_fmt(x) for x in row) + "\n")
        manifest.append(
            {"subject_id": r.subject_id, "label": r.label, "path": f"data/{fname}", "kind": "distance"}
        )
    manifest_path = out / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest_path
