"""Vietoris-Rips filtration of a distance matrix, up to 3-simplices.

A simplex enters the filtration at the length of its longest edge (its
diameter); vertices enter at 0.  The filtration order is ascending by
(value, dim, lexicographic vertex tuple), which guarantees every face
precedes its cofaces and makes the ordering bit-for-bit reproducible.

Simplices are stored columnar (values / dims / padded vertex rows) because
a full-range complex on 90 regions holds ~2.7M simplices; building Python
objects per simplex would dominate both time and memory.  Cliques are
enumerated output-sensitively by extending each simplex with higher-indexed
common neighbors instead of testing every vertex subset.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .errors import ComplexTooLarge, InvariantViolation
from .ingest import DistanceMatrix

DEFAULT_SIMPLEX_CAP = 1 << 26


@dataclass(frozen=True)
class FilteredSimplex:
    """One simplex: strictly increasing vertices and its filtration value."""

    vertices: tuple[int, ...]
    value: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


@dataclass
class FilteredComplex:
    """All simplices of a Rips filtration, already in filtration order.

    ``verts`` is (m, max_dim+1) with -1 padding beyond each simplex's arity.
    """

    n_vertices: int
    max_dim: int
    max_eps: float
    values: np.ndarray = field(repr=False)
    dims: np.ndarray = field(repr=False)
    verts: np.ndarray = field(repr=False)
    subject_id: str = ""

    def __len__(self) -> int:
        return self.values.shape[0]

    def positions_of_dim(self, d: int) -> np.ndarray:
        """Global positions of all d-simplices, in filtration order."""
        return np.flatnonzero(self.dims == d)

    def simplices(self):
        """Iterate FilteredSimplex views in filtration order (small inputs)."""
        for i in range(len(self)):
            vs = self.verts[i]
            yield FilteredSimplex(tuple(int(v) for v in vs[vs >= 0]), float(self.values[i]))

    def dump(self, path: str | Path) -> None:
        """Debug dump: one simplex per line, "value dim v0 v1 ...", ascending."""
        with open(path, "w", encoding="utf-8") as fh:
            for s in self.simplices():
                fh.write(f"{s.value!r} {s.dim} {' '.join(map(str, s.vertices))}\n")


@njit(cache=True)
def _count_cliques(w, adj, max_dim):
    """Count edges, triangles and tetrahedra below the threshold."""
    n = w.shape[0]
    n_edges = 0
    n_tris = 0
    n_tets = 0
    for i in range(n):
        for j in range(i + 1, n):
            if not adj[i, j]:
                continue
            n_edges += 1
            if max_dim < 2:
                continue
            for k in range(j + 1, n):
                if not (adj[i, k] and adj[j, k]):
                    continue
                n_tris += 1
                if max_dim < 3:
                    continue
                for l in range(k + 1, n):
                    if adj[i, l] and adj[j, l] and adj[k, l]:
                        n_tets += 1
    return n_edges, n_tris, n_tets


@njit(cache=True)
def _fill_cliques(w, adj, max_dim, e_v, e_x, t_v, t_x, q_v, q_x):
    """Second pass: write vertex rows and diameters into preallocated arrays."""
    n = w.shape[0]
    ei = 0
    ti = 0
    qi = 0
    for i in range(n):
        for j in range(i + 1, n):
            if not adj[i, j]:
                continue
            wij = w[i, j]
            e_v[ei, 0] = i
            e_v[ei, 1] = j
            e_x[ei] = wij
            ei += 1
            if max_dim < 2:
                continue
            for k in range(j + 1, n):
                if not (adj[i, k] and adj[j, k]):
                    continue
                wik = w[i, k]
                wjk = w[j, k]
                tri = max(wij, max(wik, wjk))
                t_v[ti, 0] = i
                t_v[ti, 1] = j
                t_v[ti, 2] = k
                t_x[ti] = tri
                ti += 1
                if max_dim < 3:
                    continue
                for l in range(k + 1, n):
                    if adj[i, l] and adj[j, l] and adj[k, l]:
                        q_v[qi, 0] = i
                        q_v[qi, 1] = j
                        q_v[qi, 2] = k
                        q_v[qi, 3] = l
                        q_x[qi] = max(tri, max(w[i, l], max(w[j, l], w[k, l])))
                        qi += 1


def build_rips(
    d: DistanceMatrix,
    max_dim: int = 3,
    max_eps: float = 2.0,
    simplex_cap: int = DEFAULT_SIMPLEX_CAP,
) -> FilteredComplex:
    """Build the Rips filtration of ``d`` with simplices of dim <= max_dim.

    A subset of vertices forms a simplex iff its diameter is <= max_eps
    (non-strict).  max_dim defaults to 3 because 2-dimensional classes only
    die when tetrahedra appear.  Raises ComplexTooLarge when the simplex
    count would exceed ``simplex_cap``.
    """
    if not 1 <= max_dim <= 3:
        raise InvariantViolation(f"max_dim must be in [1, 3], got {max_dim}")
    if not 0 < max_eps <= 2.0:
        raise InvariantViolation(f"max_eps must be in (0, 2], got {max_eps}")
    w = d.w
    n = d.n
    adj = (w <= max_eps).copy()
    np.fill_diagonal(adj, False)

    n_edges, n_tris, n_tets = _count_cliques(w, adj, max_dim)
    total = n + n_edges + n_tris + n_tets
    if total > simplex_cap:
        raise ComplexTooLarge(total, simplex_cap)

    e_v = np.empty((n_edges, 2), dtype=np.int32)
    e_x = np.empty(n_edges, dtype=np.float64)
    t_v = np.empty((n_tris, 3), dtype=np.int32)
    t_x = np.empty(n_tris, dtype=np.float64)
    q_v = np.empty((n_tets, 4), dtype=np.int32)
    q_x = np.empty(n_tets, dtype=np.float64)
    _fill_cliques(w, adj, max_dim, e_v, e_x, t_v, t_x, q_v, q_x)

    width = max_dim + 1
    verts = np.full((total, width), -1, dtype=np.int32)
    values = np.empty(total, dtype=np.float64)
    dims = np.empty(total, dtype=np.int8)

    pos = 0
    for d_k, (vv, xx) in enumerate(
        [
            (np.arange(n, dtype=np.int32)[:, None], np.zeros(n)),
            (e_v, e_x),
            (t_v, t_x),
            (q_v, q_x),
        ]
    ):
        if d_k > max_dim:
            break
        m = vv.shape[0]
        verts[pos : pos + m, : d_k + 1] = vv
        values[pos : pos + m] = xx
        dims[pos : pos + m] = d_k
        pos += m

    keys = [verts[:, c] for c in range(width - 1, -1, -1)] + [dims, values]
    order = np.lexsort(keys)
    return FilteredComplex(
        n_vertices=n,
        max_dim=max_dim,
        max_eps=max_eps,
        values=values[order],
        dims=dims[order],
        verts=verts[order],
        subject_id=d.subject_id,
    )
