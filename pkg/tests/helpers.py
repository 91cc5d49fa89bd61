"""Shared test fixtures and independent oracles.

Everything here is deliberately separate from the library code paths it
checks: the union-find component counter, the hand Pearson computation and
the planted-cycle cohort builder only use numpy and plain Python.
"""

import math

import numpy as np

from topofc.ingest import CohortRecord, DistanceMatrix


class UnionFind:
    """Minimal union-find with path compression, for H0 cross-checks."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.n_components = n

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
            self.n_components -= 1


def components_at(w: np.ndarray, eps: float) -> int:
    """Connected components of the graph with edges w <= eps."""
    n = w.shape[0]
    uf = UnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            if w[i, j] <= eps:
                uf.union(i, j)
    return uf.n_components


def hand_pearson(a, b) -> float:
    """Pearson correlation straight from the definition, plain Python."""
    n = len(a)
    ma = sum(a) / n
    mb = sum(b) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(a, b)) / (n - 1)
    sa = math.sqrt(sum((x - ma) ** 2 for x in a) / (n - 1))
    sb = math.sqrt(sum((y - mb) ** 2 for y in b) / (n - 1))
    return cov / (sa * sb)


def square_distance_matrix(side: float = 1.0) -> DistanceMatrix:
    """4 points on a square: sides ``side``, diagonals side*sqrt(2)."""
    s, d = side, side * math.sqrt(2.0)
    w = np.array(
        [[0, s, d, s], [s, 0, s, d], [d, s, 0, s], [s, d, s, 0]], dtype=np.float64
    )
    return DistanceMatrix("square", w)


def octahedron_distance_matrix() -> DistanceMatrix:
    """Unit octahedron: 12 edges of length sqrt(2), 3 antipodal pairs at 2."""
    pts = np.array(
        [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]],
        dtype=np.float64,
    )
    w = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    return DistanceMatrix("octahedron", w)


def two_squares_distance_matrix(gap: float = 1.9) -> DistanceMatrix:
    """Two disjoint unit squares, all cross distances = gap."""
    base = square_distance_matrix().w
    w = np.full((8, 8), gap, dtype=np.float64)
    w[:4, :4] = base
    w[4:, 4:] = base
    np.fill_diagonal(w, 0.0)
    return DistanceMatrix("two-squares", w)


def planted_cycle_cohort(
    n_subjects_per_class: int = 8,
    n_nodes: int = 12,
    seed: int = 5,
) -> list[CohortRecord]:
    """Cohort where class 0 carries a planted 4-cycle through nodes 0-3.

    Base distances sit above the working threshold (0.7); every subject
    additionally gets a few short noise edges so participation counts vary
    within groups.  Class 0 subjects get square edges ~0.4 among nodes
    {0,1,2,3} with diagonals ~1.0, so one cycle through those nodes is
    alive at eps = 0.7.
    """
    rng = np.random.default_rng(seed)
    records = []
    for idx in range(2 * n_subjects_per_class):
        label = 0 if idx < n_subjects_per_class else 1
        w = rng.uniform(0.8, 1.9, size=(n_nodes, n_nodes))
        w = np.triu(w, 1)
        w = w + w.T
        # noise edges below the threshold, in both classes
        for _ in range(3):
            i, j = rng.choice(n_nodes, size=2, replace=False)
            w[i, j] = w[j, i] = rng.uniform(0.3, 0.65)
        if label == 0:
            for a, b in ((0, 1), (1, 2), (2, 3), (3, 0)):
                w[a, b] = w[b, a] = rng.uniform(0.35, 0.45)
            for a, b in ((0, 2), (1, 3)):
                w[a, b] = w[b, a] = rng.uniform(0.95, 1.05)
        np.fill_diagonal(w, 0.0)
        dm = DistanceMatrix(f"p{idx:02d}", w)
        records.append(CohortRecord(dm.subject_id, label, dm))
    return records


def perturbed(dm: DistanceMatrix, delta: float, seed: int) -> DistanceMatrix:
    """Symmetric uniform perturbation of at most delta per entry, kept in [0, 2]."""
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-delta, delta, size=dm.w.shape)
    noise = np.triu(noise, 1)
    w = np.clip(dm.w + noise + noise.T, 0.0, 2.0)
    np.fill_diagonal(w, 0.0)
    return DistanceMatrix(dm.subject_id + "-perturbed", w)
