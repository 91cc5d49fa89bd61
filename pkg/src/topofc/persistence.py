"""Persistence diagrams of a Rips filtration over GF(2).

The pairing is computed by column reduction of the boundary matrix with the
clearing (twist) optimization: dimensions are processed top-down, and every
face paired by a higher-dimensional column is skipped in its own dimension.
Zero-persistence pairs (birth == death) are discarded.  Classes alive at the
end of the filtration are reported with death = +infinity.

``betti_oracle`` is a deliberately independent check: it re-enumerates the
complex at one threshold with itertools and computes Betti numbers from
dense GF(2) ranks using Python integer bitsets, sharing no code with the
reduction kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from ._reduction import _reduce_boundary
from .errors import InvariantViolation, OracleTooLarge
from .filtration import FilteredComplex, build_rips
from .ingest import DistanceMatrix

ORACLE_GUARD = 20_000


@dataclass(frozen=True)
class PersistencePair:
    """One bar: homology dimension, birth and death filtration values."""

    dim: int
    birth: float
    death: float  # math.inf marks an essential class

    def __post_init__(self):
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "birth", float(self.birth))
        object.__setattr__(self, "death", float(self.death))
        if not self.birth < self.death:
            raise InvariantViolation(f"need birth < death, got ({self.birth}, {self.death})")
        if self.birth < 0:
            raise InvariantViolation("birth must be >= 0")

    @property
    def persistence(self) -> float:
        return self.death - self.birth


@dataclass
class PersistenceDiagram:
    """All bars of one subject, sorted by (dim, birth, death)."""

    subject_id: str
    pairs: list[PersistencePair]
    max_eps: float

    def in_dim(self, dim: int) -> list[PersistencePair]:
        return [p for p in self.pairs if p.dim == dim]

    def births_deaths(self, dim: int, essential_to: float | None = None):
        """(births, deaths) arrays for one dimension.

        ``essential_to`` replaces infinite deaths (pass the filtration max to
        truncate essential bars for vectorization); None keeps them infinite.
        """
        ps = self.in_dim(dim)
        b = np.array([p.birth for p in ps], dtype=np.float64)
        d = np.array([p.death for p in ps], dtype=np.float64)
        if essential_to is not None:
            d = np.where(np.isinf(d), essential_to, d)
        return b, d


@dataclass(frozen=True)
class CycleFootprint:
    """Vertex set touched by one deterministic cycle representative."""

    dim: int
    pair: PersistencePair
    vertices: frozenset[int]

    def __post_init__(self):
        if len(self.vertices) < self.dim + 2:
            raise InvariantViolation(
                f"a {self.dim}-cycle must touch >= {self.dim + 2} vertices"
            )


@dataclass
class _Reduction:
    """Raw pairing in global simplex positions, plus optional representatives."""

    pairs: list[tuple[int, int]]
    essential: list[int]
    rep_finite: dict[int, np.ndarray] = field(default_factory=dict)
    rep_essential: dict[int, np.ndarray] = field(default_factory=dict)


def _simplex_keys(verts: np.ndarray, arity: int, n: int) -> np.ndarray:
    """Encode sorted vertex tuples as base-n integers for rank lookup."""
    key = verts[:, 0].astype(np.int64)
    for c in range(1, arity):
        key = key * n + verts[:, c]
    return key


def _boundary_rows(c: FilteredComplex, d: int, pos_prev: np.ndarray, pos_d: np.ndarray):
    """Face row indices (ranks within dim d-1) for every d-simplex column."""
    n = c.n_vertices
    verts_d = c.verts[pos_d, : d + 1].astype(np.int64)
    keys_prev = _simplex_keys(c.verts[pos_prev, :d].astype(np.int64), d, n)
    order = np.argsort(keys_prev, kind="stable")
    sorted_keys = keys_prev[order]

    m = pos_d.shape[0]
    bnd = np.empty((m, d + 1), dtype=np.int64)
    cols = np.arange(d + 1)
    for t in range(d + 1):
        face = verts_d[:, cols != t]
        fkeys = _simplex_keys(face, d, n)
        bnd[:, t] = order[np.searchsorted(sorted_keys, fkeys)]
    bnd.sort(axis=1)
    return bnd


def _reduce_complex(c: FilteredComplex, track_reps: bool = False) -> _Reduction:
    pos = [c.positions_of_dim(d) for d in range(c.max_dim + 1)]
    out = _Reduction(pairs=[], essential=[])

    cleared = np.zeros(pos[c.max_dim].shape[0], dtype=np.bool_)
    for d in range(c.max_dim, 0, -1):
        pos_d, pos_prev = pos[d], pos[d - 1]
        if pos_d.shape[0] == 0:
            cleared = np.zeros(pos_prev.shape[0], dtype=np.bool_)
            continue
        bnd = _boundary_rows(c, d, pos_prev, pos_d)
        track_v = bool(track_reps and d < c.max_dim)
        pivot_col, positive, r_start, r_len, r_pool, v_start, v_len, v_pool = _reduce_boundary(
            bnd, cleared, pos_prev.shape[0], track_v
        )

        for r in np.flatnonzero(pivot_col >= 0):
            j = int(pivot_col[r])
            out.pairs.append((int(pos_prev[r]), int(pos_d[j])))
            if track_reps and d >= 2:
                s, length = int(r_start[j]), int(r_len[j])
                out.rep_finite[int(pos_d[j])] = pos_prev[r_pool[s : s + length]]

        if d < c.max_dim:
            for j in np.flatnonzero(positive):
                bpos = int(pos_d[j])
                out.essential.append(bpos)
                if track_v:
                    s, length = int(v_start[j]), int(v_len[j])
                    out.rep_essential[bpos] = pos_d[v_pool[s : s + length]]

        cleared = pivot_col >= 0

    # Dim 0: every unpaired vertex is an essential component.
    for r in np.flatnonzero(~cleared):
        out.essential.append(int(pos[0][r]))
    return out


def compute_persistence(c: FilteredComplex, subject_id: str | None = None) -> PersistenceDiagram:
    """Persistence pairing of the filtration; H_k reported for k < max_dim."""
    red = _reduce_complex(c, track_reps=False)
    pairs = []
    for bpos, dpos in red.pairs:
        birth, death = float(c.values[bpos]), float(c.values[dpos])
        if birth == death:
            continue
        pairs.append(PersistencePair(int(c.dims[bpos]), birth, death))
    for bpos in red.essential:
        pairs.append(PersistencePair(int(c.dims[bpos]), float(c.values[bpos]), math.inf))
    pairs.sort(key=lambda p: (p.dim, p.birth, p.death))
    sid = c.subject_id if subject_id is None else subject_id
    return PersistenceDiagram(sid, pairs, c.max_eps)


def _footprint_vertices(c: FilteredComplex, positions: np.ndarray) -> frozenset[int]:
    vs = c.verts[positions]
    return frozenset(int(v) for v in vs[vs >= 0])


def cycle_footprints(c: FilteredComplex, diagram: PersistenceDiagram) -> list[CycleFootprint]:
    """Deterministic representative footprints for every finite H1/H2 bar.

    The representative of a bar killed by column j is the fully reduced
    column R_j, a cycle in the class that dies there.  Representatives are
    not unique; this choice is fixed by the reduction order, so identical
    inputs always yield identical footprints.
    """
    red = _reduce_complex(c, track_reps=True)
    by_key: dict[tuple[int, float, float], list[frozenset[int]]] = {}
    for bpos, dpos in red.pairs:
        dim = int(c.dims[bpos])
        birth, death = float(c.values[bpos]), float(c.values[dpos])
        if dim not in (1, 2) or birth == death:
            continue
        verts = _footprint_vertices(c, red.rep_finite[dpos])
        by_key.setdefault((dim, birth, death), []).append(verts)

    out = []
    for pair in diagram.pairs:
        if pair.dim not in (1, 2) or math.isinf(pair.death):
            continue
        bucket = by_key.get((pair.dim, pair.birth, pair.death))
        if not bucket:
            raise InvariantViolation(
                f"diagram pair {pair} not found in complex reduction; "
                "was the diagram computed from this complex?"
            )
        out.append(CycleFootprint(pair.dim, pair, bucket.pop(0)))
    return out


def node_participation(d: DistanceMatrix, eps: float, simplex_cap: int | None = None) -> np.ndarray:
    """Per-node count of cycles/cavities alive at the single threshold eps.

    Builds the Rips complex truncated at eps (max_dim 3) and counts, for
    each node, the representative footprints of H1/H2 classes still alive
    there (born <= eps, not yet dead).  Counts inherit the representative
    choice of ``cycle_footprints``.
    """
    if not 0 < eps <= 2.0:
        raise InvariantViolation(f"eps must be in (0, 2], got {eps}")
    kwargs = {} if simplex_cap is None else {"simplex_cap": simplex_cap}
    c = build_rips(d, max_dim=3, max_eps=eps, **kwargs)
    red = _reduce_complex(c, track_reps=True)
    counts = np.zeros(d.n, dtype=np.int64)
    for bpos in red.essential:
        if int(c.dims[bpos]) not in (1, 2):
            continue
        for v in _footprint_vertices(c, red.rep_essential[bpos]):
            counts[v] += 1
    return counts


def _oracle_rank(columns: list[int]) -> int:
    """GF(2) rank of bitset columns by plain elimination."""
    pivots: dict[int, int] = {}
    rank = 0
    for col in columns:
        while col:
            low = col.bit_length() - 1
            if low in pivots:
                col ^= pivots[low]
            else:
                pivots[low] = col
                rank += 1
                break
    return rank


def betti_oracle(
    d: DistanceMatrix, eps: float, max_dim: int = 3, guard: int = ORACLE_GUARD
) -> tuple[int, int, int]:
    """Betti numbers (b0, b1, b2) at threshold eps from dense GF(2) ranks.

    b_k = n_k - rank(boundary_k) - rank(boundary_{k+1}).  Enumeration and
    rank computation are independent of the reduction pipeline on purpose:
    this is the verification oracle.  b2 needs max_dim >= 3 to see the
    tetrahedra that fill cavities.
    """
    n = d.n
    w = d.w
    simplices: list[list[tuple[int, ...]]] = [[(v,) for v in range(n)]]
    total = n
    for k in range(1, max_dim + 1):
        level = []
        for vs in combinations(range(n), k + 1):
            diam = max(w[a, b] for a, b in combinations(vs, 2))
            if diam <= eps:
                level.append(vs)
        simplices.append(level)
        total += len(level)
        if total > guard:
            raise OracleTooLarge(f"{total} simplices at eps={eps} exceeds the {guard} guard")

    ranks = [0] * (max_dim + 2)  # ranks[k] = rank of boundary_k
    for k in range(1, max_dim + 1):
        if not simplices[k]:
            continue
        index_prev = {vs: i for i, vs in enumerate(simplices[k - 1])}
        cols = []
        for vs in simplices[k]:
            col = 0
            for t in range(k + 1):
                col ^= 1 << index_prev[vs[:t] + vs[t + 1 :]]
            cols.append(col)
        ranks[k] = _oracle_rank(cols)

    betti = [len(simplices[k]) - ranks[k] - ranks[k + 1] if k <= max_dim else 0 for k in range(3)]
    return betti[0], betti[1], betti[2]


def write_diagram_csv(diagram: PersistenceDiagram, path: str | Path) -> None:
    """Export as "dim,birth,death" rows; essential deaths spelled "inf"."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("dim,birth,death\n")
        for p in diagram.pairs:
            death = "inf" if math.isinf(p.death) else repr(p.death)
            fh.write(f"{p.dim},{p.birth!r},{death}\n")


def read_diagram_csv(path: str | Path, subject_id: str, max_eps: float) -> PersistenceDiagram:
    """Load a diagram exported by ``write_diagram_csv``."""
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "dim,birth,death":
            raise InvariantViolation(f"unexpected diagram header {header!r} in {path}")
        for line in fh:
            dim_s, birth_s, death_s = line.strip().split(",")
            death = math.inf if death_s == "inf" else float(death_s)
            pairs.append(PersistencePair(int(dim_s), float(birth_s), death))
    return PersistenceDiagram(subject_id, pairs, max_eps)
