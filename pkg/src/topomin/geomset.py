"""Exact polyhedral d-sets: measure, local Hausdorff distance, convergence,
reduction, rescaling and Ahlfors-ratio diagnostics.

A PolySet is a soup of d-simplices with rational vertices.  For d=1 every
operation is exact: collinear segments are merged on their common line, so
the measure is the measure of the union, not of the multiset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce as _reduce

from .exact import (ONE, ZERO, bisect_root, clip_segment_box, dist2, frac,
                    iv_complement, iv_intersect, iv_length, iv_normalize,
                    iv_subtract_open, lerp, norm, point_seg_dist2, pt, vadd,
                    vdot, vscale, vsub)


def _gcd_all(values):
    g = 0
    for v in values:
        g = math.gcd(g, v)
    return g


def primitive_direction(d):
    """Scale a rational vector to a canonical primitive integer vector."""
    den = _reduce(math.lcm, (c.denominator for c in d), 1)
    ints = [int(c * den) for c in d]
    g = _gcd_all(ints)
    if g == 0:
        return None
    ints = [v // g for v in ints]
    for v in ints:
        if v != 0:
            if v < 0:
                ints = [-w for w in ints]
            break
    return tuple(Fraction(v) for v in ints)


def line_key(p, q):
    """Canonical (direction, foot point) key of the line through p, q."""
    d = primitive_direction(vsub(q, p))
    if d is None:
        return None
    dd = vdot(d, d)
    foot = vsub(p, vscale(d, vdot(p, d) / dd))
    return (d, foot)


@dataclass(frozen=True)
class PolySet:
    """A d-dimensional polyhedral set in R^n as a simplex soup."""

    n: int
    d: int
    simplices: tuple

    @classmethod
    def from_segments(cls, segments, n=2):
        simp = tuple((tuple(pt(*p) for p in s)) for s in segments)
        return cls(n=n, d=1, simplices=simp)

    @classmethod
    def empty(cls, n=2, d=1):
        return cls(n=n, d=d, simplices=())

    def is_empty(self):
        return not self.simplices

    def union(self, other: "PolySet") -> "PolySet":
        assert (self.n, self.d) == (other.n, other.d)
        return PolySet(self.n, self.d, self.simplices + other.simplices)

    # -- canonical per-line interval form (d=1 only) -----------------------

    def line_intervals(self, window=None):
        """dict line_key -> merged closed param intervals along the line."""
        assert self.d == 1, "interval form is for segment soups"
        acc = {}
        for p, q in self.simplices:
            key = line_key(p, q)
            if key is None:
                continue
            d, _foot = key
            dd = vdot(d, d)
            spans = [(ZERO, ONE)]
            if window is not None:
                spans = window.clip_params(p, q)
            for a, b in spans:
                if a >= b:
                    continue
                t0 = vdot(lerp(p, q, a), d) / dd
                t1 = vdot(lerp(p, q, b), d) / dd
                if t0 > t1:
                    t0, t1 = t1, t0
                acc.setdefault(key, []).append((t0, t1))
        return {k: iv_normalize(v) for k, v in acc.items() if iv_normalize(v)}

    def canonical(self):
        """Equivalent soup with collinear overlaps merged; drops degenerate
        simplices and isolated points (they are H^d-null for d=1)."""
        if self.d != 1:
            return self
        segs = []
        for key, ivs in sorted(self.line_intervals().items()):
            d, foot = key
            for a, b in ivs:
                segs.append((vadd(foot, vscale(d, a)), vadd(foot, vscale(d, b))))
        return PolySet(self.n, 1, tuple(segs))


# ---------------------------------------------------------------------------
# Windows: objects able to clip a segment to a region, exactly where the
# region is polyhedral and by certified dyadic bisection for round balls.
# ---------------------------------------------------------------------------

class WholeSpace:
    def clip_params(self, p, q):
        return [(ZERO, ONE)]

    def contains(self, x):
        return True


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def clip_params(self, p, q):
        r = clip_segment_box(p, q, self.lo, self.hi)
        return [r] if r else []

    def contains(self, x):
        return all(l <= c <= h for c, l, h in zip(x, self.lo, self.hi))


def _exact_sqrt(x: Fraction):
    """The rational square root of x, or None when it is irrational."""
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: Fraction
    closed: bool = True

    def contains(self, x):
        d2 = dist2(x, self.center)
        return d2 <= self.radius ** 2 if self.closed else d2 < self.radius ** 2

    def clip_params(self, p, q):
        c, r2 = self.center, frac(self.radius) ** 2
        d = vsub(q, p)
        w = vsub(p, c)
        A = vdot(d, d)
        B = 2 * vdot(w, d)
        C = vdot(w, w) - r2
        if A == 0:
            return [(ZERO, ONE)] if C <= 0 else []
        disc = B * B - 4 * A * C
        if disc < 0:
            return []

        def g(s):
            return A * s * s + B * s + C

        sq = _exact_sqrt(disc)

        def root(a, b):
            # exact rational crossing when the discriminant is a perfect
            # square; certified bisection otherwise
            if sq is not None:
                for r in ((-B - sq) / (2 * A), (-B + sq) / (2 * A)):
                    if a <= r <= b:
                        return r
            return bisect_root(g, a, b)

        smin = -B / (2 * A)
        lo, hi = None, None
        if g(ZERO) <= 0:
            lo = ZERO
        if g(ONE) <= 0:
            hi = ONE
        if lo is None and hi is None:
            if 0 < smin < 1 and g(smin) <= 0:
                lo = root(ZERO, smin)
                hi = root(smin, ONE)
            else:
                return []
        elif lo is None:
            lo = root(ZERO, min(smin, ONE))
        elif hi is None:
            hi = root(max(smin, ZERO), ONE)
        if lo > hi:
            return []
        return [(lo, hi)]


@dataclass(frozen=True)
class Complement:
    """Complement of a window with polyhedral clip support."""
    inner: object

    def clip_params(self, p, q):
        inside = iv_normalize(self.inner.clip_params(p, q))
        return iv_complement(inside)

    def contains(self, x):
        return not self.inner.contains(x)


@dataclass(frozen=True)
class Intersection:
    parts: tuple

    def clip_params(self, p, q):
        acc = [(ZERO, ONE)]
        for w in self.parts:
            acc = iv_intersect(acc, iv_normalize(w.clip_params(p, q)))
            if not acc:
                return []
        return acc

    def contains(self, x):
        return all(w.contains(x) for w in self.parts)


# ---------------------------------------------------------------------------
# Measure and distances
# ---------------------------------------------------------------------------

def measure(E: PolySet, window=None) -> float:
    """H^d of the union of simplices, clipped to the window.

    d=1: exact merge of collinear overlaps, floating point only in the
    final square roots.  d=2: coplanar triangles must overlap in at most
    faces (checked); the sum of areas is then the exact union area.
    """
    if E.d == 1:
        total = 0.0
        for (d, _foot), ivs in E.line_intervals(window).items():
            total += float(iv_length(ivs)) * norm(d)
        return total
    if E.d == 2:
        return _triangle_soup_measure(E, window)
    raise NotImplementedError("only d in {1, 2} supported")


def _tri_area2(a, b, c):
    """Squared area * 4 (exact) of a triangle in R^n."""
    u, v = vsub(b, a), vsub(c, a)
    return vdot(u, u) * vdot(v, v) - vdot(u, v) ** 2


def _triangle_soup_measure(E: PolySet, window) -> float:
    if window is not None:
        raise NotImplementedError("windowed measure is d=1 only")
    seen = set()
    tris = []
    for tri in E.simplices:
        key = tuple(sorted(tri))
        if key in seen:
            continue
        seen.add(key)
        if _tri_area2(*tri) > 0:
            tris.append(tri)
    for i in range(len(tris)):
        for j in range(i + 1, len(tris)):
            if _coplanar_overlap(tris[i], tris[j]):
                raise NotImplementedError(
                    "overlapping coplanar triangles need an overlay pass")
    return sum(0.5 * math.sqrt(float(_tri_area2(*t))) for t in tris)


def _coplanar_overlap(t1, t2) -> bool:
    """True when two triangles share a plane and overlap with interior."""
    a, b, c = t1
    u, v = vsub(b, a), vsub(c, a)
    for p in t2:
        w = vsub(p, a)
        # p must lie in span(u, v): Gram determinant of (u, v, w) == 0
        g = [[vdot(x, y) for y in (u, v, w)] for x in (u, v, w)]
        det = (g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
               - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
               + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]))
        if det != 0:
            return False
    # exact 2D clip in the (u, v) chart
    gram = [[vdot(u, u), vdot(u, v)], [vdot(u, v), vdot(v, v)]]
    det = gram[0][0] * gram[1][1] - gram[0][1] ** 2

    def chart(p):
        w = vsub(p, a)
        x = (vdot(w, u) * gram[1][1] - vdot(w, v) * gram[0][1]) / det
        y = (vdot(w, v) * gram[0][0] - vdot(w, u) * gram[0][1]) / det
        return (x, y)

    poly = [chart(p) for p in t1]
    subject = [chart(p) for p in t2]
    clipped = _clip_poly(subject, poly)
    return _poly_area2(clipped) != 0


def _poly_area2(poly):
    s = ZERO
    for i in range(len(poly)):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % len(poly)]
        s += x0 * y1 - x1 * y0
    return s


def _clip_poly(subject, clip):
    if _poly_area2(clip) < 0:
        clip = clip[::-1]
    out = subject
    for i in range(len(clip)):
        a, b = clip[i], clip[(i + 1) % len(clip)]
        inp, out = out, []
        if not inp:
            break

        def side(p):
            return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])

        for j in range(len(inp)):
            cur, nxt = inp[j], inp[(j + 1) % len(inp)]
            sc, sn = side(cur), side(nxt)
            if sc >= 0:
                out.append(cur)
            if (sc > 0 and sn < 0) or (sc < 0 and sn > 0):
                t = sc / (sc - sn)
                out.append((cur[0] + t * (nxt[0] - cur[0]),
                            cur[1] + t * (nxt[1] - cur[1])))
    return out


def sets_equal(E: PolySet, F: PolySet, window=None) -> bool:
    """Exact equality of the underlying point sets (d=1)."""
    return E.line_intervals(window) == F.line_intervals(window)


def local_hausdorff_distance(E: PolySet, F: PolySet, K, tol=1e-9) -> float:
    """Two-sided sup-distance restricted to the compact window K.

    The sup over an empty intersection is 0, which keeps the quantity
    total.  Computed by branch-and-bound: dist(., soup) is 1-Lipschitz.
    """
    return _one_sided(E, F, K, tol) + _one_sided(F, E, K, tol)


def _one_sided(E, F, K, tol):
    pieces = []
    for p, q in E.simplices:
        for a, b in K.clip_params(p, q):
            pieces.append((lerp(p, q, a), lerp(p, q, b)))
    if not pieces or not F.simplices:
        return 0.0

    def dist_to_F(x):
        return math.sqrt(float(min(point_seg_dist2(x, p, q)
                                   for p, q in F.simplices)))

    def upper(p, q):
        # distance to a fixed segment is convex along pq, so its max sits
        # at an endpoint; the min of those maxima over the soup bounds
        # sup_x dist(x, F) on the piece from above
        return math.sqrt(float(min(max(point_seg_dist2(p, a, b),
                                       point_seg_dist2(q, a, b))
                                   for a, b in F.simplices)))

    best = 0.0
    stack = pieces
    while stack:
        p, q = stack.pop()
        best = max(best, dist_to_F(p), dist_to_F(q))
        if p != q and upper(p, q) > best + tol:
            mid = lerp(p, q, Fraction(1, 2))
            stack.append((p, mid))
            stack.append((mid, q))
    return best


@dataclass
class ConvergenceReport:
    per_compact: list  # (window, tail distances, passed)
    passed: bool


def check_convergence(seq, E: PolySet, compacts, tol, tail=None) -> ConvergenceReport:
    """d_K tail check for a list of sets against a claimed limit."""
    if not seq:
        raise ValueError("empty sequence")
    if tol <= 0:
        raise ValueError("tol must be positive")
    tail = tail if tail is not None else max(1, len(seq) // 2)
    rows = []
    ok = True
    for K in compacts:
        dists = [local_hausdorff_distance(E, Ek, K) for Ek in seq]
        passed = max(dists[-tail:]) <= tol
        ok = ok and passed
        rows.append((K, dists, passed))
    return ConvergenceReport(per_compact=rows, passed=ok)


def reduce_set(E: PolySet) -> PolySet:
    """Drop H^d-null debris: degenerate simplices and lower-dim pieces."""
    if E.d == 1:
        keep = tuple(s for s in E.simplices if s[0] != s[1])
        return PolySet(E.n, 1, keep)
    keep = tuple(t for t in E.simplices if _tri_area2(*t) > 0)
    return PolySet(E.n, E.d, keep)


def rescale(E: PolySet, x, r) -> PolySet:
    """Blow-up map v -> (v - x) / r applied to every vertex."""
    r = frac(r)
    if r <= 0:
        raise ValueError("rescale radius must be positive")
    x = pt(*x)
    simp = tuple(tuple(vscale(vsub(v, x), 1 / r) for v in s)
                 for s in E.simplices)
    return PolySet(E.n, E.d, simp)


def ahlfors_ratios(E: PolySet, balls, tol=Fraction(1, 10 ** 9)):
    """Table of H^d(E cap B(x,r)) / r^d for the given centers and radii."""
    rows = []
    for x, r in balls:
        x = pt(*x)
        r = frac(r)
        d2min = min(point_seg_dist2(x, p, q) for p, q in E.simplices)
        if d2min > tol * tol:
            raise ValueError("ball center is not on the set")
        m = measure(E, window=Ball(x, r))
        rows.append({"x": x, "r": r, "measure": m,
                     "ratio": m / float(r) ** E.d})
    ratios = [row["ratio"] for row in rows]
    return {"rows": rows, "min": min(ratios), "max": max(ratios)}


# ---------------------------------------------------------------------------
# Scene text format: header "n d", one simplex per line as d+1 vertices.
# ---------------------------------------------------------------------------

def save_scene(E: PolySet, path):
    with open(path, "w") as fh:
        fh.write(f"{E.n} {E.d}\n")
        for s in E.simplices:
            coords = [str(c) for v in s for c in v]
            fh.write(" ".join(coords) + "\n")


def load_scene(path) -> PolySet:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}:1: malformed scene header")
        n, d = int(header[0]), int(header[1])
        simplices = []
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != n * (d + 1):
                raise ValueError(f"{path}:{lineno}: expected {n * (d + 1)} "
                                 f"coordinates, got {len(parts)}")
            coords = [Fraction(p) for p in parts]
            verts = tuple(tuple(coords[i * n:(i + 1) * n]) for i in range(d + 1))
            simplices.append(verts)
    return PolySet(n=n, d=d, simplices=tuple(simplices))
