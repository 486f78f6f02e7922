import random
from fractions import Fraction

import pytest

from topomin.competitor import (GlueLedger, GlueParams, _ArcSystem,
                                _assemble_theta, _bfs_path, _box_corners,
                                _cell_center, _chain_avoids, _chain_boundary,
                                _inward_cell, _label_components, _min_delta,
                                _polyline_chain, attach_certificates,
                                competitor_certificate, glue_competitor,
                                grid_vanishing_probe, measure_audit,
                                select_slice, verify_topological_competitor)
from topomin.dyadic import (Domain, build_domain, neighborhood_complexes,
                            skeleton_polyset)
from topomin.geomset import Ball, Box, PolySet
from topomin.homology import near_cells


def F(*args):
    return tuple(Fraction(a) for a in args)


def seg_set(*segs):
    return PolySet.from_segments(
        [tuple(tuple(Fraction(c) for c in p) for p in s) for s in segs])


BOX_DOMAIN = Domain(1, [(-1, -1), (-1, 0), (0, -1), (0, 0)])

# two chords along the axis with a central gap; they reach the edge of
# the unit test box, so the only way around them leads through the gap
CHORDS = seg_set((("-1/2", 0), ("-1/10", 0)), (("1/10", 0), ("1/2", 0)))
U_SMALL = Box(F("-1/2", "-1/2"), F("1/2", "1/2"))


def chord_domain():
    return build_domain(Fraction(1, 20), Fraction(9, 20), 8)


def chord_params(**over):
    kw = dict(r1=Fraction(1, 20), r2=Fraction(9, 20), m0=8, m2=5, m3=20,
              eps1=Fraction(1, 32), eps2=Fraction(1, 32),
              t1=Fraction(1, 2048), tau=Fraction(1, 65536), ks=(1,),
              budget=8)
    kw.update(over)
    return GlueParams(**kw)


class TestGlueParams:
    def test_valid(self):
        chord_params()

    @pytest.mark.parametrize("over,msg", [
        ({"m0": 5}, "2\\^-m0"),
        ({"eps2": Fraction(1, 48)}, "multiple"),
        ({"eps1": Fraction(3, 2)}, "eps1"),
        ({"t1": Fraction(0)}, "t1"),
        ({"tau": Fraction(1, 64)}, "tau"),
        ({"m3": 13}, "m3 > m0"),
        ({"m3": 14}, "weld grid too coarse"),
    ])
    def test_rejects(self, over, msg):
        with pytest.raises(ValueError, match=msg):
            chord_params(**over)


class TestSelectSlice:
    def test_transversal_keeps_unit_radius(self):
        r0 = select_slice(CHORDS, chord_domain(), Fraction(1, 32))
        assert r0 == 1

    def test_degenerate_slice_rejected(self):
        wall = seg_set((("1/2", "-1/4"), ("1/2", "1/4")))
        with pytest.raises(ValueError, match="positive length"):
            select_slice(wall, BOX_DOMAIN, Fraction(1, 32), samples=1)

    def test_degenerate_radius_avoided(self):
        # a piece of the unit level set forces r0 off 1, not an error
        wall = seg_set((("1/2", "-1/4"), ("1/2", "1/4")))
        r0 = select_slice(wall, BOX_DOMAIN, Fraction(1, 32), samples=9,
                          rng=random.Random(0))
        assert r0 != 1


def glue_chords(seed=0):
    B1 = Ball(F(0, 0), Fraction(1, 5))
    return glue_competitor([CHORDS], CHORDS, CHORDS, B1, chord_params(),
                           random.Random(seed))


class TestGluePipeline:
    def test_zero_gap_run(self):
        Fks, led = glue_chords()
        assert led.A == pytest.approx(0.0, abs=1e-12)
        assert led.r0 == 1
        assert led.k1 == 1
        assert set(Fks) == {1}
        entry = led.entries[0]
        assert entry["outside_equal"]
        assert led.m_weld > 0

    def test_outside_agreement_required(self):
        other = seg_set((("-1/2", "1/4"), ("1/2", "1/4")))
        with pytest.raises(ValueError, match="outside B1"):
            glue_competitor([CHORDS], CHORDS, other,
                            Ball(F(0, 0), Fraction(1, 5)), chord_params())

    def test_ball_containment_required(self):
        big = Ball(F(0, 0), Fraction(2, 5))
        with pytest.raises(ValueError, match="B1"):
            glue_competitor([CHORDS], CHORDS, CHORDS, big, chord_params())

    def test_sequence_length_checked(self):
        with pytest.raises(ValueError, match="sequence"):
            glue_competitor([], CHORDS, CHORDS,
                            Ball(F(0, 0), Fraction(1, 5)), chord_params())


class TestMeasureAudit:
    def make_ledger(self, A):
        led = GlueLedger()
        led.A = A
        led.m_E_B1, led.m_F_B1 = A, 0.0
        led.m_weld = 0.01
        led.limit_projection = 0.005
        led.entries = [
            {"k": 3, "skipped": "not yet inside"},
            {"k": 4, "seq_projection": 0.004, "outside_equal": True,
             "m_Ek_D2": 1.0, "m_Fk_D2": 0.5, "semicontinuity": 0.0,
             "final": -0.5},
        ]
        return led

    def test_budgets_enforced(self):
        rep = measure_audit(self.make_ledger(0.2))
        assert rep["passed"] and not rep["informational"]
        checks = {r["check"] for r in rep["rows"]}
        assert {"exchange-identity", "weld-skeleton-measure",
                "limit-projection-measure", "containment",
                "sequence-projection-measure", "outside-equality",
                "semicontinuity-margin", "final-margin"} <= checks

    def test_overbudget_fails(self):
        led = self.make_ledger(0.02)  # A/4 = 0.005 < weld 0.01
        rep = measure_audit(led)
        assert not rep["passed"]
        bad = [r for r in rep["rows"] if not r["pass"]]
        assert any(r["check"] == "weld-skeleton-measure" for r in bad)

    def test_nonpositive_gap_is_informational(self):
        led = self.make_ledger(0.0)
        led.entries[1]["final"] = 0.25  # would fail any strict budget
        rep = measure_audit(led)
        assert rep["passed"] and rep["informational"]
        assert "no strict gain" in rep["note"]


PLUS = seg_set(((-1, 0), (1, 0)), ((0, -1), (0, 1)))
U_BIG = Box(F(-1, -1), F(1, 1))
B_SMALL = Ball(F(0, 0), Fraction(3, 5))


class TestVerifier:
    def test_identity_passes(self):
        rep = verify_topological_competitor(PLUS, PLUS, B_SMALL, U_BIG, 1)
        assert rep["passed"]
        assert rep["components_E"] == rep["components_F"] == 4
        assert len(rep["cycles"]) == 6
        assert all(c["preserved"] for c in rep["cycles"])

    def test_merged_components_fail(self):
        # removing the chord piece inside B merges the two upper quadrants
        broken = seg_set(((-1, 0), (1, 0)), ((0, -1), (0, "-1/2")),
                         ((0, "1/2"), (0, 1)))
        rep = verify_topological_competitor(PLUS, broken, B_SMALL, U_BIG, 1)
        assert not rep["passed"]
        assert rep["components_F"] < rep["components_E"]
        assert any(not c["preserved"] for c in rep["cycles"])

    def test_outside_agreement_required(self):
        shifted = seg_set(((-1, "1/100"), (1, "1/100")), ((0, -1), (0, 1)))
        with pytest.raises(ValueError, match="outside B"):
            verify_topological_competitor(PLUS, shifted, B_SMALL, U_BIG, 1)

    def test_degree_guard(self):
        with pytest.raises(NotImplementedError):
            verify_topological_competitor(PLUS, PLUS, B_SMALL, U_BIG, 0)


@pytest.fixture(scope="module")
def chord_certificate_setup():
    D = chord_domain()
    nb = neighborhood_complexes(D, CHORDS, 12, Fraction(1, 128))
    Fk = PolySet(2, 1, CHORDS.simplices
                 + skeleton_polyset(nb.S_prime_d).simplices)
    return D, nb, Fk


class TestCertificate:
    def test_chord_fixture_passes(self, chord_certificate_setup):
        D, nb, Fk = chord_certificate_setup
        cert = competitor_certificate(CHORDS, Fk, D, nb, Fraction(1, 32),
                                      U_SMALL)
        assert cert.passed
        by_name = {s["name"]: s for s in cert.steps}
        assert by_name["boundary-trace"]["passed"]
        assert "kernel rank 1" in by_name["boundary-cycle-kernel"]["detail"]
        assert by_name["kernel-witness"]["passed"]
        assert by_name["sequence-avoids-witness"]["passed"]

    def test_serialization_is_stable(self, chord_certificate_setup):
        D, nb, Fk = chord_certificate_setup
        c1 = competitor_certificate(CHORDS, Fk, D, nb, Fraction(1, 32),
                                    U_SMALL)
        c2 = competitor_certificate(CHORDS, Fk, D, nb, Fraction(1, 32),
                                    U_SMALL)
        text = c1.serialize()
        assert text == c2.serialize()
        assert text.startswith("competitor-certificate")
        assert text.rstrip().endswith("result pass")

    def test_attach_sets_first_clear_index(self, chord_certificate_setup):
        D, nb, Fk = chord_certificate_setup
        cert = competitor_certificate(CHORDS, Fk, D, nb, Fraction(1, 32),
                                      U_SMALL)
        led = GlueLedger()
        attach_certificates(led, {7: cert})
        assert led.k3 == 7

    def test_theta_crossing_chain(self, chord_certificate_setup):
        # a point pair straddling the chords is connected only through
        # the central gap, which runs through the domain: the bounding
        # chain must decompose across the domain boundary and come back
        # out with exact endpoint bookkeeping
        D, nb, Fk = chord_certificate_setup
        n, m0 = 2, D.m0
        delta = _min_delta(n, m0)
        chamber_cells = set(D.corners) - near_cells(Fk, m0, delta, n)
        labels, n_chambers = _label_components(chamber_cells, n)
        arcs = _ArcSystem(D, chamber_cells, labels, n)
        assert n_chambers == 1 and len(arcs.arcs) == 2
        assert len(arcs.generators) == 1

        compE_D = set(D.corners) - near_cells(CHORDS, m0, delta, n)
        gamma = {}
        for aid, base in arcs.generators:
            path = _bfs_path(compE_D, _inward_cell(D, arcs.rep_face(base)),
                             _inward_cell(D, arcs.rep_face(aid)), n)
            pts = ([arcs.rep_point(base)]
                   + [_cell_center(c, m0) for c in path]
                   + [arcs.rep_point(aid)])
            gamma[aid] = _polyline_chain(pts)

        compFk = _box_corners(U_SMALL, m0) - near_cells(Fk, m0, delta, n)
        qc, pc = (0, -100), (0, 100)
        assert qc in compFk and pc in compFk
        theta = _assemble_theta(qc, pc, compFk, D, arcs, gamma, CHORDS, m0)
        assert theta is not None
        assert _chain_boundary(theta) == {_cell_center(pc, m0): 1,
                                          _cell_center(qc, m0): -1}
        assert _chain_avoids(theta, CHORDS)
        assert _chain_avoids(theta, Fk)


class TestProbe:
    def test_columns_decrease(self):
        D = chord_domain()
        res = grid_vanishing_probe(CHORDS, D,
                                   [Fraction(1, 256), Fraction(1, 1024)],
                                   [10, 12])
        assert res["columns_decreasing"]
        for t in res["t_list"]:
            col = [res["table"][(t, m)] for m in res["m_list"]]
            assert col == sorted(col, reverse=True)
        assert res["corner_ratio"] < 1
