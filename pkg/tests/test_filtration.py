from math import comb

import numpy as np
import pytest

from helpers import square_distance_matrix
from topofc.errors import ComplexTooLarge, InvariantViolation
from topofc.filtration import build_rips
from topofc.ingest import DistanceMatrix, synth_point_cloud


def equilateral(n, dist=1.0):
    w = np.full((n, n), dist, dtype=float)
    np.fill_diagonal(w, 0.0)
    return DistanceMatrix(f"eq{n}", w)


class TestCounts:
    def test_three_points_full(self):
        c = build_rips(equilateral(3), max_dim=2, max_eps=2.0)
        assert len(c) == 7
        assert [int(x) for x in np.bincount(c.dims, minlength=3)] == [3, 3, 1]
        # vertices at 0, everything else at 1.0
        assert np.all(c.values[:3] == 0.0)
        assert np.all(c.values[3:] == 1.0)

    def test_four_points_full_simplex(self):
        c = build_rips(equilateral(4), max_dim=3, max_eps=2.0)
        assert len(c) == 15  # 4 + 6 + 4 + 1

    def test_complete_counts_are_binomials(self):
        # same combinatorics as the N=90 full-range case, at a size unit
        # tests can afford; the 90-region case runs in the acceptance suite
        n = 20
        c = build_rips(equilateral(n), max_dim=3, max_eps=2.0)
        expected = [comb(n, k + 1) for k in range(4)]
        assert [int((c.dims == d).sum()) for d in range(4)] == expected

    def test_max_eps_filters(self):
        sq = square_distance_matrix()  # sides 1, diagonals sqrt(2)
        c = build_rips(sq, max_dim=2, max_eps=1.2)
        # 4 vertices + 4 sides only: diagonals exceed 1.2, so no triangles
        assert [int((c.dims == d).sum()) for d in range(3)] == [4, 4, 0]

    def test_cap_raises(self):
        with pytest.raises(ComplexTooLarge):
            build_rips(equilateral(10), max_dim=3, max_eps=2.0, simplex_cap=100)

    def test_parameter_validation(self):
        with pytest.raises(InvariantViolation):
            build_rips(equilateral(4), max_dim=0)
        with pytest.raises(InvariantViolation):
            build_rips(equilateral(4), max_dim=4)
        with pytest.raises(InvariantViolation):
            build_rips(equilateral(4), max_eps=0.0)


class TestOrderingInvariants:
    def assert_valid_filtration_order(self, c):
        seen = set()
        prev_key = None
        for s in c.simplices():
            key = (s.value, s.dim, s.vertices)
            if prev_key is not None:
                assert prev_key <= key, "not ascending by (value, dim, lex)"
            prev_key = key
            assert list(s.vertices) == sorted(set(s.vertices)), "vertices not strict ascending"
            if s.dim > 0:
                for t in range(s.dim + 1):
                    face = s.vertices[:t] + s.vertices[t + 1 :]
                    assert face in seen, f"face {face} of {s.vertices} appears later"
            seen.add(s.vertices)

    def test_order_and_face_closure(self):
        dm = synth_point_cloud("uniform_noise", 10, 0.0, 2)
        c = build_rips(dm, max_dim=3, max_eps=2.0)
        self.assert_valid_filtration_order(c)

    def test_simplex_value_is_diameter(self):
        dm = synth_point_cloud("circle", 8, 0.05, 4)
        c = build_rips(dm, max_dim=3, max_eps=2.0)
        for s in c.simplices():
            if s.dim == 0:
                assert s.value == 0.0
            else:
                diam = max(
                    dm.w[a, b] for i, a in enumerate(s.vertices) for b in s.vertices[i + 1 :]
                )
                assert s.value == diam

    def test_monotonicity_prefix(self):
        dm = synth_point_cloud("uniform_noise", 9, 0.0, 7)
        small = build_rips(dm, max_dim=3, max_eps=0.9)
        big = build_rips(dm, max_dim=3, max_eps=1.7)
        m = len(small)
        assert m <= len(big)
        np.testing.assert_array_equal(small.values, big.values[:m])
        np.testing.assert_array_equal(small.verts, big.verts[:m])

    def test_deterministic_ordering(self):
        dm = synth_point_cloud("sphere", 12, 0.01, 3)
        a = build_rips(dm, max_dim=3, max_eps=2.0)
        b = build_rips(dm, max_dim=3, max_eps=2.0)
        np.testing.assert_array_equal(a.verts, b.verts)
        np.testing.assert_array_equal(a.values, b.values)

    def test_debug_dump_format(self, tmp_path):
        c = build_rips(equilateral(3), max_dim=2, max_eps=2.0)
        p = tmp_path / "dump.txt"
        c.dump(p)
        lines = p.read_text().strip().split("\n")
        assert len(lines) == 7
        assert lines[0].split() == ["0.0", "0", "0"]
        assert lines[-1].split() == ["1.0", "2", "0", "1", "2"]
