"""topofc: multiscale topological features from connectivity matrices.

Pipeline: distance matrices (1 - Pearson correlation) -> Vietoris-Rips
filtration -> persistence diagrams over GF(2) -> landscape / Betti-curve /
heat-kernel / entropy features fused with the connectivity upper triangle
-> cross-validated classification and group-level statistics.
"""

from .classify import ClassifierSpec, EvalReport, TrainedModel, embed, kfold_cv, predict, train
from .filtration import FilteredComplex, FilteredSimplex, build_rips
from .ingest import (
    CohortRecord,
    DistanceMatrix,
    ShapeSpec,
    TimeSeriesMatrix,
    distance_matrix,
    load_distance_matrix,
    load_manifest,
    load_time_series,
    synth_cohort,
    synth_point_cloud,
)
from .persistence import (
    CycleFootprint,
    PersistenceDiagram,
    PersistencePair,
    betti_oracle,
    compute_persistence,
    cycle_footprints,
    node_participation,
)
from .stats import GroupComparison, betti_auc, group_ttest, rank_nodes, rank_thresholds, vote_nodes
from .vectorize import (
    FeatureVector,
    VectorizationConfig,
    betti_curve,
    extract_features,
    fuse,
    heat_kernel,
    landscape,
    lower_order,
    persistent_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "ClassifierSpec", "EvalReport", "TrainedModel", "embed", "kfold_cv", "predict", "train",
    "FilteredComplex", "FilteredSimplex", "build_rips",
    "CohortRecord", "DistanceMatrix", "ShapeSpec", "TimeSeriesMatrix",
    "distance_matrix", "load_distance_matrix", "load_manifest", "load_time_series",
    "synth_cohort", "synth_point_cloud",
    "CycleFootprint", "PersistenceDiagram", "PersistencePair",
    "betti_oracle", "compute_persistence", "cycle_footprints", "node_participation",
    "GroupComparison", "betti_auc", "group_ttest", "rank_nodes", "rank_thresholds", "vote_nodes",
    "FeatureVector", "VectorizationConfig", "betti_curve", "extract_features", "fuse",
    "heat_kernel", "landscape", "lower_order", "persistent_entropy",
    "__version__",
]
