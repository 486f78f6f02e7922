import math
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from topomin.exact import (ONE, ZERO, bisect_root, cell_box, cells_touched,
                           clip_segment_box, iv_complement, iv_intersect,
                           iv_length, iv_normalize, iv_subtract_open,
                           point_seg_dist2, seg_box_dist2, segs_intersect)


fr = st.fractions(min_value=-2, max_value=2, max_denominator=64)
iv = st.tuples(fr, fr).map(lambda t: (min(t), max(t)))


class TestIntervals:
    def test_normalize_merges_overlaps(self):
        assert iv_normalize([(ZERO, Fraction(1, 2)),
                             (Fraction(1, 4), ONE)]) == [(ZERO, ONE)]

    def test_subtract_open_keeps_endpoints(self):
        out = iv_subtract_open([(ZERO, ONE)],
                               [(Fraction(1, 4), Fraction(1, 2))])
        assert out == [(ZERO, Fraction(1, 4)), (Fraction(1, 2), ONE)]

    def test_subtract_open_degenerate_leftover(self):
        out = iv_subtract_open([(Fraction(1, 4), Fraction(1, 2))],
                               [(ZERO, ONE)])
        # the subtracted set is open, so nothing interior survives but
        # no endpoint of the closed interval is an endpoint of the gap
        assert iv_length(out) == 0

    @given(st.lists(iv, max_size=6), st.lists(iv, max_size=6))
    @settings(max_examples=200, deadline=None)
    def test_intersect_length_bounded(self, A, B):
        A, B = iv_normalize(A), iv_normalize(B)
        got = iv_length(iv_intersect(A, B))
        assert got <= min(iv_length(A), iv_length(B))

    @given(st.lists(iv, max_size=6))
    @settings(max_examples=200, deadline=None)
    def test_complement_partitions(self, A):
        A = iv_normalize(iv_intersect(iv_normalize(A), [(ZERO, ONE)]))
        comp = iv_complement(A)
        assert iv_length(A) + iv_length(comp) == 1


class TestClipping:
    def test_clip_inside(self):
        p, q = (Fraction(1, 4), Fraction(1, 4)), (Fraction(3, 4), Fraction(3, 4))
        assert clip_segment_box(p, q, (ZERO, ZERO), (ONE, ONE)) == (ZERO, ONE)

    def test_clip_crossing(self):
        p, q = (Fraction(-1), Fraction(1, 2)), (Fraction(2), Fraction(1, 2))
        a, b = clip_segment_box(p, q, (ZERO, ZERO), (ONE, ONE))
        assert (a, b) == (Fraction(1, 3), Fraction(2, 3))

    def test_strict_drops_tangent(self):
        # segment along the box edge: closed hit, strictly empty
        p, q = (ZERO, ZERO), (ONE, ZERO)
        assert clip_segment_box(p, q, (ZERO, ZERO), (ONE, ONE)) == (ZERO, ONE)
        assert clip_segment_box(p, q, (ZERO, ZERO), (ONE, ONE),
                                strict=True) is None


class TestDistances:
    def test_point_seg(self):
        d2 = point_seg_dist2((ZERO, ONE), (Fraction(-1), ZERO),
                             (Fraction(1), ZERO))
        assert d2 == 1

    @given(st.tuples(fr, fr), st.tuples(fr, fr), st.tuples(fr, fr),
           st.tuples(fr, fr))
    @settings(max_examples=150, deadline=None)
    def test_seg_box_matches_sampling(self, p, q, a, b):
        lo = tuple(min(x, y) for x, y in zip(a, b))
        hi = tuple(max(x, y) for x, y in zip(a, b))
        exact = seg_box_dist2(p, q, lo, hi)
        best = None
        for i in range(17):
            s = Fraction(i, 16)
            x = tuple(pp + s * (qq - pp) for pp, qq in zip(p, q))
            cl = tuple(max(l, min(h, c)) for c, l, h in zip(x, lo, hi))
            d2 = sum((u - v) ** 2 for u, v in zip(x, cl))
            best = d2 if best is None else min(best, d2)
        assert exact <= best


class TestSegIntersect:
    def test_crossing(self):
        assert segs_intersect((ZERO, ZERO), (ONE, ONE), (ZERO, ONE),
                              (ONE, ZERO))

    def test_touching_endpoint(self):
        assert segs_intersect((ZERO, ZERO), (ONE, ZERO), (ONE, ZERO),
                              (ONE, ONE))

    def test_parallel_disjoint(self):
        assert not segs_intersect((ZERO, ZERO), (ONE, ZERO), (ZERO, ONE),
                                  (ONE, ONE))


class TestCells:
    def test_interior_segment(self):
        cells = cells_touched((Fraction(1, 8), Fraction(1, 8)),
                              (Fraction(3, 8), Fraction(1, 8)), 2)
        assert (0, 0) in cells and (1, 0) in cells

    def test_gridline_touches_both_sides(self):
        cells = cells_touched((Fraction(1, 8), Fraction(1, 4)),
                              (Fraction(3, 8), Fraction(1, 4)), 2)
        assert (0, 0) in cells and (0, 1) in cells

    def test_point_segment(self):
        cells = cells_touched((Fraction(1, 4), Fraction(1, 4)),
                              (Fraction(1, 4), Fraction(1, 4)), 2)
        assert len(cells) == 4  # lattice vertex touches all four cells

    def test_cell_box(self):
        lo, hi = cell_box((1, -1), 1)
        assert lo == (Fraction(1, 2), Fraction(-1, 2))
        assert hi == (Fraction(1), Fraction(0))


def test_bisect_root_certified_width():
    root = bisect_root(lambda s: s * s - 2, Fraction(0), Fraction(2))
    assert abs(float(root) - math.sqrt(2)) < 2 ** -70
