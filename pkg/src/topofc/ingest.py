"""Subject ingestion: time series, distance matrices, synthetic cohorts.

The dissimilarity between two regional signals is one minus their sample
Pearson correlation, which lands every entry in [0, 2].  All synthetic point
clouds are rescaled so the largest pairwise distance is exactly 2.0, putting
real and synthetic data on the same filtration range.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionTooSmall,
    EntryOutOfRange,
    InvariantViolation,
    NonzeroDiagonal,
    NotSymmetric,
    ParseError,
    TooFewPoints,
    ZeroVarianceRow,
)

# Correlations may leave [-1, 1] by at most this much before we call it a bug
# rather than roundoff.
CLAMP_TOL = 1e-12

SYMMETRY_TOL = 1e-9

SHAPES = ("circle", "sphere", "two_clusters", "uniform_noise")


@dataclass
class TimeSeriesMatrix:
    """Per-subject regional signals: N region rows by T time-point columns."""

    subject_id: str
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise InvariantViolation("time series must be a 2-D matrix")
        n, t = self.data.shape
        if n < 3 or t < 2:
            raise DimensionTooSmall(f"need N >= 3 regions and T >= 2 samples, got {n}x{t}")
        stds = self.data.std(axis=1, ddof=1)
        for i, s in enumerate(stds):
            if not s > 0:
                raise ZeroVarianceRow(i, self.subject_id)

    @property
    def n_regions(self) -> int:
        return self.data.shape[0]


@dataclass
class DistanceMatrix:
    """Symmetric dissimilarity matrix with zero diagonal and entries in [0, 2]."""

    subject_id: str
    w: np.ndarray

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=np.float64)
        if self.w.ndim != 2 or self.w.shape[0] != self.w.shape[1]:
            raise InvariantViolation("distance matrix must be square")
        n = self.w.shape[0]
        for i in range(n):
            if self.w[i, i] != 0.0:
                raise NonzeroDiagonal(i, float(self.w[i, i]))
        if not np.array_equal(self.w, self.w.T):
            raise NotSymmetric("matrix is not exactly symmetric")
        bad = (self.w < 0.0) | (self.w > 2.0)
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            raise EntryOutOfRange(i, j, float(self.w[i, j]))

    @property
    def n(self) -> int:
        return self.w.shape[0]


@dataclass
class ShapeSpec:
    """Recipe for one synthetic point cloud."""

    shape: str
    n_points: int
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise InvariantViolation(f"unknown shape {self.shape!r}, pick one of {SHAPES}")
        if self.noise_sigma < 0:
            raise InvariantViolation("noise_sigma must be >= 0")


@dataclass
class CohortRecord:
    """One subject: id, binary label (0 control / 1 case), distance matrix."""

    subject_id: str
    label: int
    distance: DistanceMatrix = field(repr=False)

    def __post_init__(self):
        if self.label not in (0, 1):
            raise InvariantViolation(f"label must be 0 or 1, got {self.label}")


def distance_matrix(ts: TimeSeriesMatrix) -> DistanceMatrix:
    """Dissimilarity w[i, j] = 1 - Pearson(row i, row j).

    Sample statistics use the T-1 denominator; the convention cancels in the
    correlation ratio but is fixed here so intermediate dumps reproduce.
    Only the upper triangle is computed and then mirrored, which makes the
    output exactly symmetric.  Correlations that stray outside [-1, 1] by
    more than ``CLAMP_TOL`` raise instead of being silently clamped.
    """
    x = ts.data
    n = x.shape[0]
    centered = x - x.mean(axis=1, keepdims=True)
    # One Gram product gives numerator and denominator the same float paths,
    # so identical rows correlate to exactly 1 and negated rows to exactly -1.
    g = centered @ centered.T
    sumsq = np.diag(g)

    w = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        row = g[i, i + 1 :] / np.sqrt(sumsq[i] * sumsq[i + 1 :])
        excess = np.abs(row) - 1.0
        if (excess > CLAMP_TOL).any():
            j = i + 1 + int(np.argmax(excess))
            raise InvariantViolation(
                f"correlation({i},{j}) = {row[j - i - 1]} leaves [-1,1] by more than {CLAMP_TOL}"
            )
        np.clip(row, -1.0, 1.0, out=row)
        w[i, i + 1 :] = 1.0 - row
        w[i + 1 :, i] = w[i, i + 1 :]
    return DistanceMatrix(ts.subject_id, w)


def _read_csv_matrix(path: Path) -> np.ndarray:
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise ParseError(lineno, len(cells) + 1, "ragged row")
            parsed = []
            for col, cell in enumerate(cells, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ParseError(lineno, col, f"not a number: {cell!r}") from None
            rows.append(parsed)
    if not rows:
        raise ParseError(1, 1, "empty file")
    return np.array(rows, dtype=np.float64)


def load_time_series(path: str | Path, subject_id: str) -> TimeSeriesMatrix:
    """Read a headerless CSV of N region rows by T sample columns."""
    data = _read_csv_matrix(Path(path))
    try:
        return TimeSeriesMatrix(subject_id, data)
    except ZeroVarianceRow as exc:
        raise InvariantViolation(f"constant row in {path}: {exc}") from exc


def load_distance_matrix(path: str | Path, subject_id: str) -> DistanceMatrix:
    """Read a headerless N x N CSV; tiny asymmetry is averaged away.

    Asymmetry up to 1e-9 (absolute) is symmetrized by averaging opposing
    entries; anything larger is rejected as corrupt data rather than noise.
    """
    w = _read_csv_matrix(Path(path))
    if w.shape[0] != w.shape[1]:
        raise InvariantViolation(f"distance matrix must be square, got {w.shape}")
    gap = np.abs(w - w.T)
    if gap.max() > SYMMETRY_TOL:
        i, j = map(int, np.argwhere(gap == gap.max())[0])
        raise NotSymmetric(
            f"entries ({i},{j}) and ({j},{i}) differ by {gap[i, j]:.3e} (> {SYMMETRY_TOL})"
        )
    w = (w + w.T) / 2.0  # preserves the diagonal; range checks happen in the constructor
    return DistanceMatrix(subject_id, w)


def _base_points(shape: str, n_points: int, rng: np.random.Generator) -> np.ndarray:
    # Circle and sphere use even coverings (regular angles, Fibonacci
    # lattice) randomized by a seeded phase/rotation: the manifold topology
    # then shows up at any sample size instead of hiding in sampling gaps.
    if shape == "circle":
        theta = 2.0 * np.pi * (np.arange(n_points) / n_points + rng.uniform())
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if shape == "sphere":
        i = np.arange(n_points) + 0.5
        phi = np.arccos(1.0 - 2.0 * i / n_points)
        theta = np.pi * (1.0 + np.sqrt(5.0)) * i
        pts = np.column_stack(
            [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)]
        )
        q, r = np.linalg.qr(rng.normal(size=(3, 3)))
        return pts @ (q * np.sign(np.diag(r)))
    if shape == "two_clusters":
        half = n_points // 2
        centers = np.zeros((n_points, 3))
        centers[half:, 0] = 2.0  # two blobs two units apart on the x axis
        return centers
    if shape == "uniform_noise":
        return rng.uniform(0.0, 1.0, size=(n_points, 3))
    raise InvariantViolation(f"unknown shape {shape!r}")


def synth_point_cloud(
    shape: str, n_points: int, noise_sigma: float, seed: int
) -> DistanceMatrix:
    """Sample a deterministic point cloud and return its rescaled distances.

    Gaussian jitter of scale ``noise_sigma`` is added to every coordinate,
    then pairwise Euclidean distances are rescaled linearly so the maximum
    is exactly 2.0.
    """
    if n_points < 4:
        raise TooFewPoints(f"need at least 4 points, got {n_points}")
    if noise_sigma < 0:
        raise InvariantViolation("noise_sigma must be >= 0")
    rng = np.random.default_rng(seed)
    pts = _base_points(shape, n_points, rng)
    if noise_sigma > 0:
        pts = pts + rng.normal(scale=noise_sigma, size=pts.shape)
    diff = pts[:, None, :] - pts[None, :, :]
    w = np.sqrt((diff * diff).sum(axis=2))
    top = w.max()
    if top == 0.0:
        raise InvariantViolation("all sampled points coincide; cannot rescale")
    w *= 2.0 / top
    np.fill_diagonal(w, 0.0)
    w = np.minimum(w, 2.0)
    w = (w + w.T) / 2.0
    return DistanceMatrix(f"{shape}-{seed}", w)


def subject_seed(seed: int, index: int) -> int:
    """Stable per-subject seed derived from the cohort seed and index."""
    return int(np.random.SeedSequence((seed, index)).generate_state(1)[0])


def synth_cohort(
    n_per_class: int, class_a: ShapeSpec, class_b: ShapeSpec, seed: int
) -> list[CohortRecord]:
    """Deterministic two-class cohort; label 0 for class_a, 1 for class_b."""
    if n_per_class < 2:
        raise InvariantViolation("need at least 2 subjects per class")
    records = []
    for idx in range(2 * n_per_class):
        spec = class_a if idx < n_per_class else class_b
        label = 0 if idx < n_per_class else 1
        dm = synth_point_cloud(spec.shape, spec.n_points, spec.noise_sigma, subject_seed(seed, idx))
        dm.subject_id = f"s{idx:03d}_{spec.shape}"
        records.append(CohortRecord(dm.subject_id, label, dm))
    return records


@dataclass(frozen=True)
class ManifestEntry:
    subject_id: str
    label: int
    path: Path
    kind: str  # "timeseries" | "distance"


def read_manifest_entries(path: str | Path) -> list[ManifestEntry]:
    """Parse a cohort manifest: JSON array of subject entries.

    Each entry is an object {"subject_id", "label", "path", "kind"} where
    kind is "timeseries" or "distance"; paths resolve relative to the
    manifest's directory.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.lineno, exc.colno, "manifest is not valid JSON") from exc
    if not isinstance(raw, list):
        raise InvariantViolation("manifest must be a JSON array")
    entries = []
    for item in raw:
        missing = {"subject_id", "label", "path", "kind"} - set(item)
        if missing:
            raise InvariantViolation(f"manifest entry missing keys: {sorted(missing)}")
        if item["kind"] not in ("timeseries", "distance"):
            raise InvariantViolation(
                f"unknown kind {item['kind']!r} for subject {item['subject_id']}"
            )
        entries.append(
            ManifestEntry(
                subject_id=str(item["subject_id"]),
                label=int(item["label"]),
                path=path.parent / item["path"],
                kind=item["kind"],
            )
        )
    return entries


def load_record(entry: ManifestEntry) -> CohortRecord:
    """Load one manifest entry into a CohortRecord."""
    if entry.kind == "timeseries":
        dm = distance_matrix(load_time_series(entry.path, entry.subject_id))
    else:
        dm = load_distance_matrix(entry.path, entry.subject_id)
    return CohortRecord(entry.subject_id, entry.label, dm)


def load_manifest(path: str | Path) -> list[CohortRecord]:
    """Load a whole cohort, failing on the first bad subject."""
    return [load_record(e) for e in read_manifest_entries(path)]
