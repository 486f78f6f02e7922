import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from topomin.geomset import (Ball, Box, Complement, Intersection, PolySet,
                             WholeSpace, ahlfors_ratios, check_convergence,
                             load_scene, local_hausdorff_distance, measure,
                             reduce_set, rescale, save_scene, sets_equal)
from topomin.scenarios import circle_polyset, inscribed_square, random_soup


def seg_set(*segs):
    return PolySet.from_segments(
        [tuple(tuple(Fraction(c) for c in p) for p in s) for s in segs])


def F(*args):
    return tuple(Fraction(a) for a in args)


class TestMeasure:
    def test_collinear_overlap_merged(self):
        E = seg_set(((0, 0), (2, 0)), ((1, 0), (3, 0)))
        assert measure(E) == pytest.approx(3.0)

    def test_degenerate_ignored(self):
        E = seg_set(((0, 0), (0, 0)), ((0, 0), (1, 0)))
        assert measure(E) == pytest.approx(1.0)

    def test_box_window(self):
        E = seg_set(((-1, "1/2"), (2, "1/2")))
        w = Box(F(0, 0), F(1, 1))
        assert measure(E, window=w) == pytest.approx(1.0)

    def test_ball_window_certified(self):
        E = seg_set(((-1, 0), (1, 0)))
        w = Ball(F(0, 0), Fraction(1, 2))
        assert measure(E, window=w) == pytest.approx(1.0)
        w2 = Ball(F(0, Fraction(1, 4)), Fraction(1, 2))
        # chord at height 1/4 in a radius-1/2 ball: 2*sqrt(3)/4
        assert measure(E, window=w2) == pytest.approx(math.sqrt(3) / 2,
                                                      abs=1e-12)

    def test_complement_and_intersection(self):
        E = seg_set(((0, 0), (4, 0)))
        inner = Box(F(1, -1), F(2, 1))
        assert measure(E, window=Complement(inner)) == pytest.approx(3.0)
        both = Intersection((Box(F(0, -1), F(3, 1)), Complement(inner)))
        assert measure(E, window=both) == pytest.approx(2.0)

    def test_triangle_soup(self):
        tri = (F(0, 0, 0), F(1, 0, 0), F(0, 1, 0))
        E = PolySet(3, 2, (tri, tri))
        assert measure(E) == pytest.approx(0.5)

    def test_overlapping_triangles_rejected(self):
        t1 = (F(0, 0, 0), F(2, 0, 0), F(0, 2, 0))
        t2 = (F(1, 0, 0), F(3, 0, 0), F(1, 2, 0))
        with pytest.raises(NotImplementedError):
            measure(PolySet(3, 2, (t1, t2)))


def test_rational_ball_crossing_is_exact():
    # crossing at y = 3/5 has a rational root; splitting the segment must
    # not change the clipped point set
    whole = seg_set(((0, -1), (0, 1)))
    split = seg_set(((0, -1), (0, "-1/2")), ((0, "-1/2"), (0, "1/2")),
                    ((0, "1/2"), (0, 1)))
    w = Complement(Ball(F(0, 0), Fraction(3, 5)))
    assert sets_equal(whole, split, window=w)
    assert measure(whole, window=w) == pytest.approx(0.8, abs=1e-12)


class TestSetsEqual:
    def test_equal_despite_splitting(self):
        E = seg_set(((0, 0), (2, 0)))
        Fs = seg_set(((0, 0), (1, 0)), ((1, 0), (2, 0)))
        assert sets_equal(E, Fs)

    def test_unequal(self):
        assert not sets_equal(seg_set(((0, 0), (2, 0))),
                              seg_set(((0, 0), (1, 0))))

    def test_windowed(self):
        E = seg_set(((0, 0), (2, 0)))
        Fs = seg_set(((0, 0), (1, 0)), ((1, 0), (3, 0)))
        w = Box(F(0, -1), F(2, 1))
        assert sets_equal(E, Fs, window=w)
        assert not sets_equal(E, Fs)


class TestHausdorff:
    def test_parallel_lines(self):
        E = seg_set(((0, 0), (1, 0)))
        G = seg_set(((0, "1/4"), (1, "1/4")))
        K = Box(F(0, -1), F(1, 1))
        # the two-sided distance adds both one-sided sup terms
        d = local_hausdorff_distance(E, G, K)
        assert d == pytest.approx(0.5, abs=1e-6)

    def test_empty_intersection_is_zero(self):
        E = seg_set(((0, 0), (1, 0)))
        G = seg_set(((0, 5), (1, 5)))
        K = Box(F(10, 10), F(11, 11))
        assert local_hausdorff_distance(E, G, K) == 0.0

    def test_convergence_report(self):
        E = seg_set(((0, 0), (1, 0)))
        seq = [seg_set(((0, Fraction(1, 2 ** i)), (1, Fraction(1, 2 ** i))))
               for i in range(1, 6)]
        K = Box(F(0, -1), F(1, 1))
        rep = check_convergence(seq, E, [K], tol=0.2)
        assert rep.passed
        rep2 = check_convergence(seq, E, [K], tol=0.01)
        assert not rep2.passed


class TestTransforms:
    def test_reduce_drops_debris(self):
        E = seg_set(((0, 0), (0, 0)), ((0, 0), (1, 0)))
        assert reduce_set(E).simplices == seg_set(((0, 0), (1, 0))).simplices

    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 8),
           st.fractions(min_value=Fraction(1, 4), max_value=4,
                        max_denominator=16))
    @settings(max_examples=40, deadline=None)
    def test_rescale_measure_law(self, seed, count, r):
        import random
        E = random_soup(random.Random(seed), count=count)
        G = rescale(E, F(0, 0), r)
        assert measure(G) == pytest.approx(measure(E) / float(r), rel=1e-9)

    def test_rescale_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            rescale(seg_set(((0, 0), (1, 0))), F(0, 0), 0)

    def test_ahlfors_line(self):
        E = seg_set(((-2, 0), (2, 0)))
        table = ahlfors_ratios(E, [(F(0, 0), Fraction(1)),
                                   (F(0, 0), Fraction(1, 2))])
        assert table["min"] == pytest.approx(2.0, abs=1e-9)
        assert table["max"] == pytest.approx(2.0, abs=1e-9)

    def test_ahlfors_center_must_be_on_set(self):
        E = seg_set(((-2, 0), (2, 0)))
        with pytest.raises(ValueError, match="center"):
            ahlfors_ratios(E, [(F(0, 1), Fraction(1))])


class TestSceneIO:
    def test_roundtrip(self, tmp_path):
        E = circle_polyset()
        p = tmp_path / "scene.txt"
        save_scene(E, p)
        G = load_scene(p)
        assert G.n == E.n and G.d == E.d
        assert G.simplices == E.simplices

    def test_bad_header_names_line(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("2 1 7\n")
        with pytest.raises(ValueError, match=r"bad\.txt:1"):
            load_scene(p)

    def test_bad_vertex_count_names_line(self, tmp_path):
        p = tmp_path / "bad2.txt"
        p.write_text("2 1\n0 0 1\n")
        with pytest.raises(ValueError, match=r"bad2\.txt:2"):
            load_scene(p)


def test_shipped_scene_measures():
    B1 = Ball(F(0, 0), Fraction(13, 25))
    assert measure(circle_polyset(), window=B1) == pytest.approx(
        math.pi, abs=5e-3)
    assert measure(inscribed_square(), window=B1) == pytest.approx(
        2 * math.sqrt(2), abs=5e-3)
