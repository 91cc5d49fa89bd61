"""Acceptance suite: one test per criterion, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
The synthetic end-to-end cohort (criteria 6, 7, 10) is built once per
session through the real CLI pipeline stages.
"""

import json
import math
import resource
import time
from math import comb
from pathlib import Path

import numpy as np
import pytest

from helpers import octahedron_distance_matrix, planted_cycle_cohort, square_distance_matrix
from test_classify import finite_diff_max_rel_err
from topofc.filtration import build_rips
from topofc.ingest import synth_point_cloud
from topofc.persistence import betti_oracle, compute_persistence
from topofc.pipeline import load_config, run_classify, run_features, run_stats, run_synth
from topofc.stats import rank_nodes
from topofc.vectorize import (
    VectorizationConfig,
    bin_centers,
    extract_features,
    heat_kernel,
    landscape,
    live_counts,
    persistent_entropy,
)
from topofc.persistence import PersistenceDiagram, PersistencePair


def report(n, text):
    print(f"\n[PASS] criterion {n}: {text}")


@pytest.fixture(scope="session")
def e2e_run(tmp_path_factory):
    """Criterion-6 cohort: 30 noisy circles vs 30 noise clouds, full pipeline."""
    root = tmp_path_factory.mktemp("e2e")
    cfg_path = root / "config.json"
    cfg_path.write_text(
        json.dumps(
            {
                "out_dir": str(root / "out"),
                "manifest": "out/manifest.json",
                "seed": 2024,
                "synth": {
                    "n_per_class": 30,
                    "class_a": {"shape": "circle", "n_points": 24, "noise_sigma": 0.05},
                    "class_b": {"shape": "uniform_noise", "n_points": 24, "noise_sigma": 0.05},
                },
                "classifiers": [
                    {"kind": "logreg", "l2": 1e-4, "max_iters": 300, "learning_rate": 0.1},
                    {"kind": "mlp", "hidden": [256, 64, 16], "epochs": 300, "l2": 1e-4},
                ],
                "cv": {"k": 5, "seed": 0},
                "stats": {"n_thresholds": 100, "eps_list": [0.8, 1.1, 1.4], "top_k": 10},
            }
        )
    )
    t0 = time.monotonic()
    config = load_config(cfg_path)
    run_synth(config)
    run_features(config)
    report_paths = run_classify(config)
    run_stats(config)
    elapsed = time.monotonic() - t0
    return {"root": root, "config_path": cfg_path, "reports": report_paths, "elapsed": elapsed}


def test_criterion_1_oracle_equivalence():
    t0 = time.monotonic()
    checked = 0
    for seed in range(20):
        n = 5 + seed % 4
        dm = synth_point_cloud("uniform_noise", n, 0.0, seed)
        dg = compute_persistence(build_rips(dm, max_dim=3, max_eps=2.0))
        thresholds = sorted(set(dm.w[np.triu_indices(n, 1)]))
        for eps in thresholds:
            expected = betti_oracle(dm, eps, 3)
            for k in range(3):
                live = sum(1 for p in dg.pairs if p.dim == k and p.birth <= eps < p.death)
                assert live == expected[k], (seed, eps, k, live, expected[k])
                checked += 1
    elapsed = time.monotonic() - t0
    assert elapsed < 60.0
    report(1, f"oracle equivalence exact on {checked} (cloud, eps, dim) checks in {elapsed:.1f}s")


def test_criterion_2_known_topology():
    dg = compute_persistence(build_rips(square_distance_matrix(), max_dim=2, max_eps=2.0))
    h1 = dg.in_dim(1)
    assert len(h1) == 1
    assert h1[0].birth == 1.0 and h1[0].death == math.sqrt(2.0)

    dg = compute_persistence(build_rips(octahedron_distance_matrix(), max_dim=3, max_eps=2.0))
    h2 = dg.in_dim(2)
    assert len(h2) == 1
    assert h2[0].birth == math.sqrt(2.0) and h2[0].death == 2.0

    dm = synth_point_cloud("circle", 50, 0.0, 0)
    dg = compute_persistence(build_rips(dm, max_dim=2, max_eps=2.0))
    pers = sorted((p.persistence for p in dg.in_dim(1)), reverse=True)
    runner_up = pers[1] if len(pers) > 1 else 0.0
    assert pers and pers[0] >= 10.0 * runner_up
    report(2, "square H1 (1, sqrt 2), octahedron single H2, circle dominance >= 10x")


def test_criterion_3_feature_layout():
    dm = synth_point_cloud("uniform_noise", 90, 0.0, 123)
    dg = compute_persistence(build_rips(dm, max_dim=3, max_eps=2.0))
    fv = extract_features(dg, dm, VectorizationConfig())
    lengths = [(s.name, s.length) for s in fv.layout]
    assert fv.values.shape == (5808,)
    assert lengths == [
        ("landscape_l1", 300),
        ("landscape_l2", 600),
        ("betti_curve", 300),
        ("heat_s1.2", 300),
        ("heat_s1.4", 300),
        ("entropy", 3),
        ("lower_order", 4005),
    ]
    report(3, "fused vector 5808 = 300+600+300+300+300+3+4005 at N=90 defaults")


def test_criterion_4_vectorization_identities():
    # landscape peak (d-b)/2 at (b+d)/2 within one bin width
    d = PersistenceDiagram("c4", [PersistencePair(1, 0.6, 1.4)], 2.0)
    lam = landscape(d, 1, 100).reshape(3, 100)[1]
    ts = bin_centers(100, 0.0, 2.0)
    assert abs(lam.max() - 0.4) <= 0.02
    assert abs(ts[int(np.argmax(lam))] - 1.0) <= 0.02

    # Betti half-open boundary at t = death, exact
    b, dd = np.array([0.25]), np.array([0.75])
    assert live_counts(b, dd, np.array([0.75]))[0] == 0
    assert live_counts(b, dd, np.array([0.74999999]))[0] == 1
    assert live_counts(b, dd, np.array([0.25]))[0] == 1

    # entropy of n equal bars = ln n to 1e-12
    for n in (2, 5, 11):
        eq = PersistenceDiagram(
            "e", [PersistencePair(0, 0.1 * i, 0.1 * i + 0.3) for i in range(n)], 2.0
        )
        assert abs(persistent_entropy(eq)[0] - math.log(n)) < 1e-12

    # heat-kernel discrete mass ~ 1 at grid 100 for a well-contained Gaussian
    hd = PersistenceDiagram("h", [PersistencePair(0, 0.9, 1.1)], 2.0)
    v = heat_kernel(hd, 0.08, 100).reshape(3, 100, 100)
    mass = v[0].sum() * (2.0 / 100) ** 2
    assert abs(mass - 1.0) <= 0.02
    report(4, "landscape peak, half-open Betti boundary, entropy ln(n), heat mass 1 +/- 0.02")


def test_criterion_5_gradient_checks():
    t0 = time.monotonic()
    worst = 0.0
    for kind, hidden in (("logreg", ()), ("linear_svm", ()), ("mlp", (5, 4, 3))):
        for seed in range(5):
            err = finite_diff_max_rel_err(kind, hidden, seed)
            worst = max(worst, err)
            assert err < 1e-4, (kind, seed, err)
    elapsed = time.monotonic() - t0
    assert elapsed < 30.0
    report(5, f"3 losses x 5 seeds, max rel err {worst:.2e} < 1e-4 in {elapsed:.1f}s")


def test_criterion_6_end_to_end_classification(e2e_run):
    assert e2e_run["elapsed"] < 600.0
    best = {}
    for p in e2e_run["reports"]:
        payload = json.loads(Path(p).read_text())
        best[payload["classifier"]] = payload["mean_metrics"]["accuracy"]
    assert max(best.values()) >= 0.90, best
    report(
        6,
        "30 circles vs 30 noise, 5-fold CV: "
        + ", ".join(f"{k} acc {v:.3f}" for k, v in best.items())
        + f" (pipeline {e2e_run['elapsed']:.0f}s)",
    )


def test_criterion_7_group_statistics_direction(e2e_run):
    summary = json.loads((e2e_run["root"] / "out" / "betti_auc_summary.json").read_text())
    welch_h1 = summary["welch"]["1"]
    mean0 = summary["groups"]["0"]["mean_auc"]["1"]
    mean1 = summary["groups"]["1"]["mean_auc"]["1"]
    assert welch_h1["p"] < 0.05
    assert mean0 > mean1  # circles (label 0) carry more cycles
    report(
        7,
        f"H1 Betti-AUC circles {mean0:.2f} > noise {mean1:.2f}, p = {welch_h1['p']:.2e} < 0.05",
    )


def test_criterion_8_planted_node_recovery():
    records = planted_cycle_cohort(8, n_nodes=12, seed=5)
    mats = [r.distance for r in records]
    labels = [r.label for r in records]
    gc = rank_nodes(mats, labels, eps=0.7, top_k=6)
    top6 = set(gc.ranking[:6])
    assert top6 >= {0, 1, 2, 3}, gc.ranking
    report(8, f"planted nodes {{0,1,2,3}} inside top-6 ranking {gc.ranking[:6]}")


def test_criterion_9_scale():
    t0 = time.monotonic()
    dm = synth_point_cloud("uniform_noise", 90, 0.0, 42)
    c = build_rips(dm, max_dim=3, max_eps=2.0)
    expected = sum(comb(90, k) for k in range(1, 5))
    assert len(c) == expected  # ~2.67M simplices
    dg = compute_persistence(c)
    elapsed = time.monotonic() - t0
    peak_gb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1e6
    assert elapsed < 300.0
    assert peak_gb < 4.0
    essential = [p for p in dg.pairs if math.isinf(p.death)]
    assert len(essential) == 1
    report(
        9,
        f"N=90 full Rips ({expected} simplices) persistence in {elapsed:.1f}s, "
        f"session peak RSS {peak_gb:.2f} GB",
    )


def test_criterion_10_determinism(e2e_run):
    import shutil

    root = e2e_run["root"]
    out = root / "out"
    snapshot = root / "snapshot"
    shutil.copytree(out, snapshot)

    # identical config, identical seeds, rerun in place
    config = load_config(e2e_run["config_path"])
    run_synth(config)
    run_features(config)
    run_classify(config)
    run_stats(config)

    checked = 0
    for old in sorted(snapshot.rglob("*")):
        if not old.is_file() or old.suffix == ".png":
            continue
        new = out / old.relative_to(snapshot)
        assert new.exists(), new
        if old.suffix == ".json":
            a = [l for l in old.read_text().splitlines() if "generated_at" not in l]
            b = [l for l in new.read_text().splitlines() if "generated_at" not in l]
            assert a == b, f"JSON differs: {new.name}"
        else:
            assert old.read_bytes() == new.read_bytes(), f"bytes differ: {new.name}"
        checked += 1

    # rank_nodes determinism on the planted cohort (criterion 8 machinery)
    records = planted_cycle_cohort(8, n_nodes=12, seed=5)
    mats = [r.distance for r in records]
    labels = [r.label for r in records]
    g1 = rank_nodes(mats, labels, eps=0.7, top_k=6)
    g2 = rank_nodes(mats, labels, eps=0.7, top_k=6)
    assert g1.ranking == g2.ranking
    assert [(i.t, i.p) for i in g1.items] == [(i.t, i.p) for i in g2.items]
    assert checked > 5
    report(10, f"rerun byte-identical across {checked} report files (timestamp excluded)")
