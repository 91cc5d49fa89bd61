"""Fixed-length feature vectors from persistence diagrams.

Four quantifications (landscapes, Betti curves, heat kernels, persistent
entropy) plus the lower-order connectivity upper-triangle, concatenated in
a fixed segment order.  All samplers evaluate at the centers of ``n_bins``
equal subdivisions of the value range; essential bars are truncated to the
diagram's max filtration value before any quantification.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation, LayoutMismatch
from .ingest import DistanceMatrix
from .persistence import PersistenceDiagram


@dataclass
class VectorizationConfig:
    n_bins: int = 100
    n_layers: tuple[int, ...] = (1, 2)
    heat_sigmas: tuple[float, ...] = (1.2, 1.4)
    heat_grid: int = 10
    value_range: tuple[float, float] = (0.0, 2.0)
    max_hom_dim: int = 2

    def __post_init__(self):
        self.n_layers = tuple(int(x) for x in self.n_layers)
        self.heat_sigmas = tuple(float(s) for s in self.heat_sigmas)
        self.value_range = (float(self.value_range[0]), float(self.value_range[1]))
        if self.n_bins < 2:
            raise InvariantViolation("n_bins must be >= 2")
        if self.heat_grid < 2:
            raise InvariantViolation("heat_grid must be >= 2")
        if not self.value_range[0] < self.value_range[1]:
            raise InvariantViolation("range.lo must be < range.hi")
        if any(s <= 0 for s in self.heat_sigmas):
            raise InvariantViolation("heat sigmas must be > 0")
        if any(l < 1 for l in self.n_layers):
            raise InvariantViolation("landscape depths must be >= 1")
        if not 0 <= self.max_hom_dim <= 2:
            raise InvariantViolation("max_hom_dim must be in [0, 2]")

    @property
    def n_dims(self) -> int:
        return self.max_hom_dim + 1


@dataclass(frozen=True)
class Segment:
    name: str
    offset: int
    length: int


@dataclass
class FeatureVector:
    """Fused per-subject features with a named segment layout."""

    subject_id: str
    values: np.ndarray = field(repr=False)
    layout: tuple[Segment, ...]

    def __post_init__(self):
        if sum(s.length for s in self.layout) != self.values.shape[0]:
            raise LayoutMismatch("segment lengths do not cover the value vector")

    def segment(self, name: str) -> np.ndarray:
        for s in self.layout:
            if s.name == name:
                return self.values[s.offset : s.offset + s.length]
        raise KeyError(name)


def bin_centers(n_bins: int, lo: float, hi: float) -> np.ndarray:
    """Centers of n_bins equal subdivisions of [lo, hi]."""
    step = (hi - lo) / n_bins
    return lo + (np.arange(n_bins) + 0.5) * step


def tent_values(births: np.ndarray, deaths: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Per-bar tent functions evaluated at ts; shape (n_bars, len(ts))."""
    f = np.minimum(ts[None, :] - births[:, None], deaths[:, None] - ts[None, :])
    return np.maximum(f, 0.0)


def live_counts(births: np.ndarray, deaths: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Half-open interval counts: #{i : b_i <= t < d_i} at each t."""
    return ((births[:, None] <= ts[None, :]) & (ts[None, :] < deaths[:, None])).sum(axis=0)


def landscape(
    diagram: PersistenceDiagram,
    layers: int,
    n_bins: int,
    value_range: tuple[float, float] = (0.0, 2.0),
    max_hom_dim: int = 2,
) -> np.ndarray:
    """Sampled landscape functions, segments ordered by (dim, layer).

    Layer L at a point t is the L-th largest tent value over the bars of
    that dimension; layers beyond the bar count contribute zeros.
    """
    if layers < 1:
        raise InvariantViolation("layers must be >= 1")
    ts = bin_centers(n_bins, *value_range)
    out = np.zeros(((max_hom_dim + 1), layers, n_bins), dtype=np.float64)
    for k in range(max_hom_dim + 1):
        b, d = diagram.births_deaths(k, essential_to=diagram.max_eps)
        if b.size == 0:
            continue
        f = tent_values(b, d, ts)
        f.sort(axis=0)
        top = min(layers, b.size)
        for layer in range(top):
            out[k, layer] = f[-(layer + 1)]
    return out.reshape(-1)


def betti_curve(
    diagram: PersistenceDiagram,
    n_bins: int,
    value_range: tuple[float, float] = (0.0, 2.0),
    max_hom_dim: int = 2,
) -> np.ndarray:
    """Sampled Betti curves, one n_bins block per dimension."""
    ts = bin_centers(n_bins, *value_range)
    out = np.zeros((max_hom_dim + 1, n_bins), dtype=np.float64)
    for k in range(max_hom_dim + 1):
        b, d = diagram.births_deaths(k, essential_to=diagram.max_eps)
        if b.size:
            out[k] = live_counts(b, d, ts)
    return out.reshape(-1)


def heat_kernel(
    diagram: PersistenceDiagram,
    sigma: float,
    grid: int,
    value_range: tuple[float, float] = (0.0, 2.0),
    max_hom_dim: int = 2,
) -> np.ndarray:
    """Gaussian superposition over diagram points, sampled on a grid.

    For each dimension, K(x, y) = sum_i exp(-((x-b_i)^2 + (y-d_i)^2) /
    (2 sigma^2)) / (2 pi sigma^2) at the centers of a grid x grid lattice
    covering range x range; x runs over births (rows), y over deaths, and
    each dimension's block is flattened row-major.
    """
    if sigma <= 0:
        raise InvariantViolation("sigma must be > 0")
    xs = bin_centers(grid, *value_range)
    out = np.zeros((max_hom_dim + 1, grid, grid), dtype=np.float64)
    norm = 1.0 / (2.0 * np.pi * sigma * sigma)
    for k in range(max_hom_dim + 1):
        b, d = diagram.births_deaths(k, essential_to=diagram.max_eps)
        if b.size == 0:
            continue
        dx2 = (xs[None, :] - b[:, None]) ** 2  # (bars, grid)
        dy2 = (xs[None, :] - d[:, None]) ** 2
        expo = np.exp(-(dx2[:, :, None] + dy2[:, None, :]) / (2.0 * sigma * sigma))
        out[k] = norm * expo.sum(axis=0)
    return out.reshape(-1)


def persistent_entropy(diagram: PersistenceDiagram, max_hom_dim: int = 2) -> np.ndarray:
    """Shannon entropy (natural log) of each dimension's lifetime distribution.

    Empty dimensions yield 0 by convention; a single bar also gives 0.
    """
    out = np.zeros(max_hom_dim + 1, dtype=np.float64)
    for k in range(max_hom_dim + 1):
        b, d = diagram.births_deaths(k, essential_to=diagram.max_eps)
        life = d - b
        if life.size == 0:
            continue
        p = life / life.sum()
        out[k] = float(-(p * np.log(p)).sum())
    return out


def lower_order(d: DistanceMatrix) -> np.ndarray:
    """Connectivity (1 - w) upper triangle in row-major order."""
    i, j = np.triu_indices(d.n, k=1)
    return 1.0 - d.w[i, j]


def _expected_lengths(config: VectorizationConfig) -> list[tuple[str, int]]:
    segs = []
    for depth in config.n_layers:
        segs.append((f"landscape_l{depth}", config.n_dims * depth * config.n_bins))
    segs.append(("betti_curve", config.n_dims * config.n_bins))
    for s in config.heat_sigmas:
        segs.append((f"heat_s{s:g}", config.n_dims * config.heat_grid**2))
    segs.append(("entropy", config.n_dims))
    return segs


def fuse(
    subject_id: str,
    landscapes: list[np.ndarray],
    betti: np.ndarray,
    heats: list[np.ndarray],
    entropy: np.ndarray,
    lower: np.ndarray,
    config: VectorizationConfig,
) -> FeatureVector:
    """Concatenate the parts in the fixed order and record the layout.

    Order: one landscape block per configured depth, Betti curves, one heat
    block per configured sigma, entropy, lower-order connectivity.
    """
    expected = _expected_lengths(config)
    parts = list(landscapes) + [betti] + list(heats) + [entropy]
    if len(parts) != len(expected):
        raise LayoutMismatch(
            f"got {len(landscapes)} landscape and {len(heats)} heat blocks; "
            f"config wants {len(config.n_layers)} and {len(config.heat_sigmas)}"
        )
    for part, (name, want) in zip(parts, expected):
        if part.shape != (want,):
            raise LayoutMismatch(f"segment {name}: expected length {want}, got {part.shape}")

    parts.append(np.asarray(lower, dtype=np.float64))
    names = [name for name, _ in expected] + ["lower_order"]
    layout = []
    offset = 0
    for name, part in zip(names, parts):
        layout.append(Segment(name, offset, part.shape[0]))
        offset += part.shape[0]
    return FeatureVector(subject_id, np.concatenate(parts), tuple(layout))


def extract_features(
    diagram: PersistenceDiagram, dist: DistanceMatrix, config: VectorizationConfig
) -> FeatureVector:
    """Compute all parts for one subject and fuse them."""
    kw = dict(value_range=config.value_range, max_hom_dim=config.max_hom_dim)
    lands = [landscape(diagram, depth, config.n_bins, **kw) for depth in config.n_layers]
    bc = betti_curve(diagram, config.n_bins, **kw)
    heats = [heat_kernel(diagram, s, config.heat_grid, **kw) for s in config.heat_sigmas]
    pe = persistent_entropy(diagram, config.max_hom_dim)
    return fuse(diagram.subject_id, lands, bc, heats, pe, lower_order(dist), config)
