"""Shipped example geometries: the circle/square gluing scenario, its
sequence of rotated circles, and small boundary-sphere complexes used by
the duality checks."""

from __future__ import annotations

import math
from fractions import Fraction

from .competitor import GlueParams
from .dyadic import DyadicCube, build_complex, build_domain
from .geomset import Ball, Box, PolySet


def dyadic_round(x: float, m: int = 20) -> Fraction:
    return Fraction(round(x * 2 ** m), 2 ** m)


def circle_polyset(r=Fraction(1, 2), sides: int = 64, m: int = 20) -> PolySet:
    """Regular polygon approximating the circle of radius r, vertices
    rounded to the scale-m dyadic lattice (axis points exact)."""
    verts = []
    for j in range(sides):
        a = 2 * math.pi * j / sides
        verts.append((dyadic_round(float(r) * math.cos(a), m),
                      dyadic_round(float(r) * math.sin(a), m)))
    segs = [(verts[j], verts[(j + 1) % sides]) for j in range(sides)]
    return PolySet.from_segments(segs)


def arc_deleted_circle(r=Fraction(1, 2), sides: int = 64, drop: int = 8) -> PolySet:
    full = circle_polyset(r, sides)
    return PolySet(2, 1, full.simplices[drop:])


def inscribed_square(r=Fraction(1, 2)) -> PolySet:
    v = [(r, Fraction(0)), (Fraction(0), r), (-r, Fraction(0)),
         (Fraction(0), -r)]
    v = [tuple(Fraction(c) for c in p) for p in v]
    return PolySet.from_segments([(v[j], v[(j + 1) % 4]) for j in range(4)])


def spokes(r_in=Fraction(1, 2), r_out=Fraction(1)) -> PolySet:
    segs = []
    for sx, sy in ((1, 0), (0, 1), (-1, 0), (0, -1)):
        segs.append(((sx * r_in, sy * r_in), (sx * r_out, sy * r_out)))
    return PolySet.from_segments(segs)


def rotate_exact(E: PolySet, k: int) -> PolySet:
    """Rotation by the exact rational angle with tan(theta/2) = 2^-k."""
    s = Fraction(1, 2 ** k)
    den = 1 + s * s
    c, sn = (1 - s * s) / den, 2 * s / den
    simp = tuple(tuple((c * x - sn * y, sn * x + c * y) for x, y in seg)
                 for seg in E.simplices)
    return PolySet(E.n, E.d, simp)


def glue_scenario():
    """Circle vs inscribed square with four welding spokes.

    The two sets agree outside B1 and differ inside it by the measured
    gap A close to pi - 2*sqrt(2)."""
    circle = circle_polyset()
    sp = spokes()
    E = circle.union(sp)
    F = inscribed_square().union(sp)
    params = GlueParams(
        r1=Fraction(11, 20), r2=Fraction(19, 20),
        m0=8, m2=5, m3=20,
        eps1=Fraction(1, 32), eps2=Fraction(1, 32),
        t1=Fraction(1, 2 ** 11), tau=Fraction(1, 2 ** 16),
        ks=(22, 23))
    seq = [rotate_exact(circle, k).union(sp) for k in params.ks]
    return {
        "E": E, "F": F, "seq": seq,
        "B1": Ball((Fraction(0), Fraction(0)), Fraction(13, 25)),
        "U": Box((Fraction(-1), Fraction(-1)), (Fraction(1), Fraction(1))),
        "params": params,
    }


def glue_domain(params: GlueParams = None):
    params = params or glue_scenario()["params"]
    return build_domain(params.r1, params.r2, params.m0)


# ---------------------------------------------------------------------------
# Boundary-sphere complexes on the unit cube
# ---------------------------------------------------------------------------

def sphere_complex(m: int = 1):
    """The 2-dimensional boundary complex of [0,1]^3 at scale m."""
    top = 2 ** m
    cells = []
    for flat in range(3):
        others = [a for a in range(3) if a != flat]
        for v in (0, top):
            for i in range(top):
                for j in range(top):
                    corner = [0, 0, 0]
                    corner[flat] = v
                    corner[others[0]] = i
                    corner[others[1]] = j
                    cells.append(DyadicCube(m, tuple(corner), tuple(others)))
    return build_complex(cells)


def equatorial_circle_complex(m: int = 1):
    """Ring of edges around the side faces at height 1/2."""
    top = 2 ** m
    z = top // 2
    edges = []
    for v in range(top):
        edges.append(DyadicCube(m, (v, 0, z), (0,)))
        edges.append(DyadicCube(m, (v, top, z), (0,)))
        edges.append(DyadicCube(m, (0, v, z), (1,)))
        edges.append(DyadicCube(m, (top, v, z), (1,)))
    return build_complex(edges)


def equatorial_band_complex(m: int = 1):
    """Band of side squares with height in [1/2, 1]: a 2-dimensional
    trace-style complex whose 1-skeleton is compared against it by the
    duality rank check."""
    top = 2 ** m
    squares = []
    for z in range(top // 2, top):
        for v in range(top):
            squares.append(DyadicCube(m, (v, 0, z), (0, 2)))
            squares.append(DyadicCube(m, (v, top, z), (0, 2)))
            squares.append(DyadicCube(m, (0, v, z), (1, 2)))
            squares.append(DyadicCube(m, (top, v, z), (1, 2)))
    return build_complex(squares)


def annulus_complex():
    """3x3 block of unit squares with the center removed."""
    corners = [(i, j) for i in range(3) for j in range(3) if (i, j) != (1, 1)]
    return build_complex(DyadicCube(0, c) for c in corners)


def grid_4x4():
    """Unit square split into a 4x4 dyadic grid."""
    return build_complex(DyadicCube(2, (i, j))
                         for i in range(4) for j in range(4))


def random_soup(rng, count: int = 3, denom_bits: int = 8) -> PolySet:
    """Random segment soup with dyadic endpoints in the unit square."""
    segs = []
    for _ in range(count):
        pts = []
        while len(pts) < 2:
            p = (Fraction(rng.randrange(0, 2 ** denom_bits + 1), 2 ** denom_bits),
                 Fraction(rng.randrange(0, 2 ** denom_bits + 1), 2 ** denom_bits))
            if not pts or p != pts[0]:
                pts.append(p)
        segs.append(tuple(pts))
    return PolySet.from_segments(segs)
