"""Radial projections inside dyadic cells and the grid projection cascade.

The cascade pushes a d-set down the skeleta of a complex one dimension at
a time (each stage projects per-cell content radially from a sampled good
center), then erodes every partially covered d-face so the result is a
union of whole d-faces plus lower-dimensional debris.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .dyadic import DyadicComplex, DyadicCube
from .exact import (ONE, ZERO, clip_segment_box, dist2, frac, iv_complement,
                    iv_normalize, lerp, point_seg_dist2, vadd, vscale, vsub)
from .geomset import PolySet, measure


@dataclass
class ProjectionRecord:
    """Per-stage log of the cascade: centers, measures, achieved ratios."""

    stages: list = field(default_factory=list)
    erosions: list = field(default_factory=list)
    measure_before: float = 0.0
    measure_after: float = 0.0
    inner_before: float = 0.0
    inner_after: float = 0.0

    @property
    def final_ratio(self) -> float:
        if self.measure_before == 0:
            return 1.0
        return self.measure_after / self.measure_before

    def add_stage(self, k, cube, center, before, after):
        self.stages.append({"stage": k, "cube": cube.to_line(),
                            "center": center, "before": before,
                            "after": after})

    def csv_rows(self):
        yield "stage,cube,center,before,after"
        for s in self.stages:
            c = ";".join(str(v) for v in s["center"])
            yield "%d,%s,%s,%.12g,%.12g" % (s["stage"], s["cube"].replace(" ", ";"),
                                            c, s["before"], s["after"])
        for e in self.erosions:
            yield "erosion,%s,,%0.12g,%0.12g" % (e["cube"].replace(" ", ";"),
                                                 e["before"], e["after"])


def _box_of(sigma):
    if isinstance(sigma, DyadicCube):
        return sigma.support()
    return sigma


def radial_project_point(sigma, x, y):
    """Exit point on the cell boundary of the ray from x through y.

    x must be interior to the cell, y a point of the cell; boundary
    points are fixed.
    """
    lo, hi = _box_of(sigma)
    x = tuple(frac(c) for c in x)
    y = tuple(frac(c) for c in y)
    if x == y:
        raise ValueError("radial projection undefined at the center")
    for i in range(len(x)):
        if lo[i] == hi[i]:
            if x[i] != lo[i] or y[i] != lo[i]:
                raise ValueError("points must lie in the cell")
        elif not (lo[i] < x[i] < hi[i]):
            raise ValueError("center must be interior to the cell")
        if not (lo[i] <= y[i] <= hi[i]):
            raise ValueError("point must lie in the cell")
    t = None
    for i in range(len(x)):
        d = y[i] - x[i]
        if d == 0:
            continue
        ti = (hi[i] - x[i]) / d if d > 0 else (lo[i] - x[i]) / d
        if t is None or ti < t:
            t = ti
    return tuple(a + t * (b - a) for a, b in zip(x, y))


def _on_boundary(box, p) -> bool:
    lo, hi = box
    inside = all(l <= c <= h for c, l, h in zip(p, lo, hi))
    return inside and any(c == l or c == h
                          for c, l, h in zip(p, lo, hi) if l != h)


def _project_segment(box, x, p, q):
    """Image of segment pq under the radial projection: an exact polyline.

    The exit face is piecewise constant in the segment parameter and the
    projection onto a fixed face is projective, so the image is a chain
    of straight segments with rational endpoints.
    """
    lo, hi = box
    n = len(x)
    d = vsub(q, p)
    w0 = vsub(p, x)

    # candidate faces: (axis, bound, sign); the hit parameter along the
    # ray is t_i(s) = (bound - x_i) / (w_i(s)), w_i(s) = w0_i + s d_i
    breaks = {ZERO, ONE}
    for i in range(n):
        if d[i] != 0:
            s = -w0[i] / d[i]
            if 0 < s < 1:
                breaks.add(s)  # ray direction flips sign on axis i

    def w(i, s):
        return w0[i] + s * d[i]

    # pairwise exit ties: (b_i - x_i) w_j(s) = (b_j - x_j) w_i(s), linear
    faces = []
    for i in range(n):
        if lo[i] != hi[i]:
            faces.append((i, lo[i]))
            faces.append((i, hi[i]))
    for a in range(len(faces)):
        for b in range(a + 1, len(faces)):
            i, bi = faces[a]
            j, bj = faces[b]
            # (bi - x_i)(w0_j + s d_j) = (bj - x_j)(w0_i + s d_i)
            ci, cj = bi - x[i], bj - x[j]
            A = ci * d[j] - cj * d[i]
            B = ci * w0[j] - cj * w0[i]
            if A != 0:
                s = -B / A
                if 0 < s < 1:
                    breaks.add(s)

    def exit_point(s):
        y = lerp(p, q, s)
        if y == x:
            raise ValueError("projection center meets the set")
        return radial_project_point(box, x, y)

    pts = sorted(breaks)
    segs = []
    for s0, s1 in zip(pts, pts[1:]):
        a, b = exit_point(s0), exit_point(s1)
        if a != b:
            segs.append((a, b))
    return segs


def project_set_in_cube(sigma, x, E: PolySet, h=None):
    """Setwise radial projection of the content of one cell onto its
    boundary.  Exact for d = 1; triangle soups are subdivided to
    diameter <= h and projected by vertices."""
    box = _box_of(sigma)
    x = tuple(frac(c) for c in x)
    if not E.simplices:
        return PolySet(E.n, E.d, ())
    clearance = min(point_seg_dist2(x, s[0], s[-1]) if E.d == 1
                    else min(point_seg_dist2(x, a, b)
                             for a, b in ((s[0], s[1]), (s[1], s[2]), (s[0], s[2])))
                    for s in E.simplices)
    if clearance == 0:
        raise ValueError("projection center lies on the set")
    if E.d == 1:
        segs = []
        for p, q in E.simplices:
            if p == q:
                continue
            segs.extend(_project_segment(box, x, p, q))
        return PolySet(E.n, 1, tuple(segs))
    if E.d == 2:
        if h is None:
            lo, hi = box
            h = max(b - a for a, b in zip(lo, hi)) / 16
        tris = []
        for tri in E.simplices:
            tris.extend(_subdivided(tri, frac(h) ** 2))
        out = tuple(tuple(radial_project_point(box, x, v) for v in t)
                    for t in tris)
        return PolySet(E.n, 2, out)
    raise NotImplementedError


def _subdivided(tri, h2):
    a, b, c = tri
    if max(dist2(a, b), dist2(b, c), dist2(a, c)) <= h2:
        return [tri]
    ab = lerp(a, b, Fraction(1, 2))
    bc = lerp(b, c, Fraction(1, 2))
    ca = lerp(c, a, Fraction(1, 2))
    out = []
    for t in ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)):
        out.extend(_subdivided(t, h2))
    return out


def find_good_center(sigma, E: PolySet, budget: int = 256, rng=None,
                     clearance=None):
    """Sampled search for a projection center with small image measure.

    The cell barycenter is tried first when admissible, so the winner is
    never worse than the barycenter.  Returns (center, achieved ratio).
    """
    rng = rng or random.Random(0)
    box = _box_of(sigma)
    lo, hi = box
    if clearance is None:
        side = max(h - l for l, h in zip(lo, hi))
        clearance = side / 100
    clearance = frac(clearance)
    bary = tuple((l + h) / 2 for l, h in zip(lo, hi))

    def dist2_to_set(pt):
        if not E.simplices:
            return None
        return min(point_seg_dist2(pt, s[0], s[-1]) for s in E.simplices)

    if not E.simplices:
        return bary, 0.0

    base = measure(E)
    if base == 0:
        return bary, 0.0

    best = None
    candidates = 0
    cand = bary
    for trial in range(budget):
        d2 = dist2_to_set(cand)
        if d2 is not None and d2 > clearance * clearance:
            candidates += 1
            img = measure(project_set_in_cube(sigma, cand, E))
            ratio = img / base
            if best is None or ratio < best[1]:
                best = (cand, ratio)
        cand = tuple(l + (h - l) * Fraction(1 + rng.getrandbits(24), 2 ** 24 + 2)
                     if l != h else l for l, h in zip(lo, hi))
    if best is None:
        raise ValueError("no admissible projection center within budget")
    return best


# ---------------------------------------------------------------------------
# Cascade
# ---------------------------------------------------------------------------

def split_to_carriers(segments, m: int):
    """Split segments at scale-m lattice hyperplanes and attach to each
    piece the minimal dyadic cell containing its interior."""
    scale = 2 ** m
    out = []
    for p, q in segments:
        if p == q:
            continue
        breaks = {ZERO, ONE}
        for i in range(len(p)):
            d = q[i] - p[i]
            if d == 0:
                continue
            a, b = sorted((p[i] * scale, q[i] * scale))
            for v in range(math.ceil(a), math.floor(b) + 1):
                s = (Fraction(v, scale) - p[i]) / d
                if 0 < s < 1:
                    breaks.add(s)
        pts = sorted(breaks)
        for s0, s1 in zip(pts, pts[1:]):
            a, b = lerp(p, q, s0), lerp(p, q, s1)
            mid = lerp(p, q, (s0 + s1) / 2)
            corner, axes = [], []
            for i, c in enumerate(mid):
                v = c * scale
                if v.denominator == 1:
                    corner.append(int(v))
                else:
                    corner.append(math.floor(v))
                    axes.append(i)
            out.append((a, b, DyadicCube(m, tuple(corner), tuple(axes))))
    return out


def _coverage(pieces, edge: DyadicCube):
    """Merged parameter intervals of the pieces along a 1-cell."""
    lo, hi = edge.support()
    axis = edge.axes[0]
    span = hi[axis] - lo[axis]
    ivs = []
    for a, b, _ in pieces:
        s0 = (a[axis] - lo[axis]) / span
        s1 = (b[axis] - lo[axis]) / span
        ivs.append(tuple(sorted((s0, s1))))
    return iv_normalize(ivs)


def _seg_in_support(K: DyadicComplex, p, q) -> bool:
    ivs = []
    for c in K.cubes:
        lo, hi = c.support()
        r = clip_segment_box(p, q, lo, hi)
        if r:
            ivs.append(r)
    return not iv_complement(iv_normalize(ivs))


def ff_project(K: DyadicComplex, E: PolySet, d: int, rng=None,
               budget: int = 256, interior_only: bool = False):
    """Cascade K.dim -> d+1 of per-cell radial projections followed by
    one erosion pass on the d-faces.

    Output lies in the d-skeleton (plus, in interior_only mode, on the
    frozen boundary faces); every d-face meeting the output's interior
    is fully covered.
    """
    if E.d != 1 or d != 1:
        raise NotImplementedError("cascade is implemented for d = 1 soups")
    rng = rng or random.Random(0)
    rec = ProjectionRecord()
    rec.measure_before = measure(E)
    if not interior_only:
        for p, q in E.simplices:
            if p != q and not _seg_in_support(K, p, q):
                raise ValueError("set is not contained in the complex support")

    cur = [s for s in E.simplices if s[0] != s[1]]
    for k in range(K.dim, d, -1):
        pieces = split_to_carriers(cur, K.m)
        if interior_only:
            allowed = set(K.interior_cells(k)) if k < K.dim else set(K.cells(k))
        else:
            allowed = set(K.cells(k))
        groups = {}
        kept = []
        for a, b, carrier in pieces:
            if carrier.k == k and carrier in allowed:
                groups.setdefault(carrier, []).append((a, b))
            else:
                kept.append((a, b))
        for sigma in sorted(groups, key=lambda c: (c.corner, c.axes)):
            Es = PolySet(E.n, 1, tuple(groups[sigma]))
            before = measure(Es)
            center, _ratio = find_good_center(sigma, Es, budget=budget, rng=rng)
            img = project_set_in_cube(sigma, center, Es)
            after = measure(img)
            rec.add_stage(k, sigma, center, before, after)
            kept.extend(img.simplices)
        cur = kept

    # erosion: drop the content of every partially covered d-face (its
    # radial image inside the face is a measure-null subset of the face
    # boundary), leaving only whole d-faces and lower-dim debris
    pieces = split_to_carriers(cur, K.m)
    if interior_only:
        erodible = set(K.interior_cells(d))
    else:
        erodible = set(K.cells(d))
    by_edge = {}
    passthrough = []
    for a, b, carrier in pieces:
        if carrier.k == d and carrier in erodible:
            by_edge.setdefault(carrier, []).append((a, b, carrier))
        else:
            passthrough.append((a, b))
    final = list(passthrough)
    for edge in sorted(by_edge, key=lambda c: (c.corner, c.axes)):
        plist = by_edge[edge]
        cov = _coverage(plist, edge)
        if cov == [(ZERO, ONE)]:
            lo, hi = edge.support()
            final.append((lo, hi))
        else:
            before = measure(PolySet(E.n, 1,
                                     tuple((a, b) for a, b, _ in plist)))
            rec.erosions.append({"cube": edge.to_line(),
                                 "before": before, "after": 0.0})
    out = PolySet(E.n, 1, tuple(final))
    rec.measure_after = measure(out)
    return out, rec


def ff_project_local(K: DyadicComplex, E: PolySet, d: int, rng=None,
                     budget: int = 256):
    """Boundary-fixing variant: identity outside the interior of |K| and
    on the frozen boundary faces; the cascade and erosion only touch
    interior cells."""
    if K.dim != E.n:
        raise ValueError("local projection needs a full-dimensional complex")
    rng = rng or random.Random(0)
    outside = []
    inside = []
    for seg in E.simplices:
        p, q = seg
        if p == q:
            outside.append(seg)
            continue
        ivs = []
        for c in K.top_cells():
            lo, hi = c.support()
            r = clip_segment_box(p, q, lo, hi)
            if r:
                ivs.append(r)
        ivs = iv_normalize(ivs)
        if not ivs:
            outside.append(seg)  # untouched, original object
            continue
        comp = iv_complement(ivs)
        if not comp and ivs == [(ZERO, ONE)]:
            inside.append(seg)
            continue
        for a, b in comp:
            if a < b:
                outside.append((lerp(p, q, a), lerp(p, q, b)))
        for a, b in ivs:
            if a < b:
                inside.append((lerp(p, q, a), lerp(p, q, b)))
    inner_set = PolySet(E.n, E.d, tuple(inside))
    projected, rec = ff_project(K, inner_set, d, rng=rng, budget=budget,
                                interior_only=True)
    out = PolySet(E.n, E.d, tuple(outside) + projected.simplices)
    rec.inner_before = rec.measure_before
    rec.inner_after = rec.measure_after
    rec.measure_before = measure(E)
    rec.measure_after = measure(out)
    return out, rec


def face_fully_covered(E: PolySet, edge: DyadicCube) -> bool:
    """Whether a 1-cell is entirely contained in the segment soup."""
    pieces = [(a, b, c) for a, b, c in split_to_carriers(E.simplices, edge.m)
              if c == edge]
    return _coverage(pieces, edge) == [(ZERO, ONE)]
