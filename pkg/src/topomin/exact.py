"""Exact rational geometry primitives shared by the whole package.

Points are tuples of Fraction.  All predicates here are exact; no
floating point enters until a caller takes a square root for a length.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

Point = tuple
Segment = tuple  # (Point, Point)

ZERO = Fraction(0)
ONE = Fraction(1)


def frac(x) -> Fraction:
    """Convert int/str/float/Fraction to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)  # binary floats are exact rationals
    return Fraction(x)


def pt(*coords) -> Point:
    return tuple(frac(c) for c in coords)


def vadd(p, q):
    return tuple(a + b for a, b in zip(p, q))


def vsub(p, q):
    return tuple(a - b for a, b in zip(p, q))


def vscale(p, s):
    s = frac(s)
    return tuple(a * s for a in p)


def vdot(p, q):
    return sum(a * b for a, b in zip(p, q))


def dist2(p, q) -> Fraction:
    return sum((a - b) ** 2 for a, b in zip(p, q))


def norm(p) -> float:
    return math.sqrt(float(vdot(p, p)))


def lerp(p, q, s):
    s = frac(s)
    return tuple(a + s * (b - a) for a, b in zip(p, q))


def cross2(u, v) -> Fraction:
    return u[0] * v[1] - u[1] * v[0]


def seg_length(p, q) -> float:
    return norm(vsub(q, p))


# ---------------------------------------------------------------------------
# Closed-interval algebra on the segment parameter s in [0, 1].
#
# Interval sets are lists of (a, b) Fractions with a <= b, sorted and
# disjoint.  Degenerate intervals [x, x] are allowed: they carry the
# isolated touch points that slice selection counts.
# ---------------------------------------------------------------------------

def iv_normalize(pairs):
    """Merge a list of closed intervals into sorted disjoint form."""
    pairs = sorted((a, b) for a, b in pairs if a <= b)
    out = []
    for a, b in pairs:
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return [(a, b) for a, b in out]


def iv_intersect(A, B):
    out = []
    i = j = 0
    while i < len(A) and j < len(B):
        a = max(A[i][0], B[j][0])
        b = min(A[i][1], B[j][1])
        if a <= b:
            out.append((a, b))
        if A[i][1] < B[j][1]:
            i += 1
        else:
            j += 1
    return out


def iv_subtract_open(A, O):
    """Subtract a union of *open* intervals from a closed interval set.

    Endpoints of the removed intervals stay in the result, which is why
    the output may contain degenerate [x, x] components.
    """
    O = sorted((a, b) for a, b in O if a < b)
    out = []
    for a, b in A:
        cur = a
        for c, d in O:
            if d <= cur:
                # open interval entirely left of cur, but its right
                # endpoint equal to cur keeps cur (endpoint stays).
                continue
            if c > b:
                break
            if c >= cur:
                out.append((cur, min(c, b)))
            cur = max(cur, min(d, b))
            if cur > b:
                break
        if cur <= b:
            out.append((cur, b))
    return iv_merge_touching(out)


def iv_merge_touching(pairs):
    """Normalize but keep degenerate components distinct from overlaps."""
    pairs = sorted(pairs)
    out = []
    for a, b in pairs:
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return [(a, b) for a, b in out]


def iv_complement(A, lo=ZERO, hi=ONE):
    out = []
    cur = lo
    for a, b in A:
        if a > cur:
            out.append((cur, a))
        cur = max(cur, b)
    if cur < hi:
        out.append((cur, hi))
    return out


def iv_length(A) -> Fraction:
    return sum((b - a for a, b in A), ZERO)


# ---------------------------------------------------------------------------
# Segment / box predicates
# ---------------------------------------------------------------------------

def slab_params(p, q, axis, lo, hi, strict=False):
    """Parameter interval where lo <= x_axis(s) <= hi along segment pq.

    Returns a closed (a, b) pair, None when empty.  With strict=True the
    inequalities are strict and a degenerate or boundary-only solution
    is dropped (callers treat the result as an open interval).
    """
    x0, dx = p[axis], q[axis] - p[axis]
    if dx == 0:
        if strict:
            return (ZERO, ONE) if lo < x0 < hi else None
        return (ZERO, ONE) if lo <= x0 <= hi else None
    a = (lo - x0) / dx
    b = (hi - x0) / dx
    if a > b:
        a, b = b, a
    a = max(a, ZERO)
    b = min(b, ONE)
    if strict:
        # shrink away exact-boundary endpoints by openness
        if a >= b:
            return None
        return (a, b)
    if a > b:
        return None
    return (a, b)


def clip_segment_box(p, q, lo, hi, strict=False):
    """Parameter interval of segment pq inside the box [lo, hi]^n."""
    a, b = ZERO, ONE
    for axis in range(len(p)):
        r = slab_params(p, q, axis, lo[axis], hi[axis], strict=strict)
        if r is None:
            return None
        a = max(a, r[0])
        b = min(b, r[1])
        if strict and a >= b:
            return None
        if a > b:
            return None
    return (a, b)


def point_in_box(x, lo, hi) -> bool:
    return all(l <= c <= h for c, l, h in zip(x, lo, hi))


def point_seg_dist2(x, p, q) -> Fraction:
    d = vsub(q, p)
    dd = vdot(d, d)
    if dd == 0:
        return dist2(x, p)
    t = vdot(vsub(x, p), d) / dd
    if t < 0:
        t = ZERO
    elif t > 1:
        t = ONE
    return dist2(x, vadd(p, vscale(d, t)))


def seg_box_dist2(p, q, lo, hi) -> Fraction:
    """Exact squared distance between a segment and an axis box.

    The per-axis violation is piecewise linear in s, so the squared
    distance is piecewise quadratic; we minimize on each piece.
    """
    if clip_segment_box(p, q, lo, hi) is not None:
        return ZERO
    breaks = {ZERO, ONE}
    for axis in range(len(p)):
        for bound in (lo[axis], hi[axis]):
            dx = q[axis] - p[axis]
            if dx != 0:
                s = (bound - p[axis]) / dx
                if 0 < s < 1:
                    breaks.add(s)
    breaks = sorted(breaks)
    best = None
    for s0, s1 in zip(breaks, breaks[1:]):
        # on (s0, s1) each axis sticks to one regime; d2(s) = sum of
        # squares of linear terms -> quadratic As^2 + Bs + C
        mid = (s0 + s1) / 2
        A = B = C = ZERO
        for axis in range(len(p)):
            x = p[axis] + mid * (q[axis] - p[axis])
            if x < lo[axis]:
                c0, c1 = lo[axis] - p[axis], -(q[axis] - p[axis])
            elif x > hi[axis]:
                c0, c1 = p[axis] - hi[axis], q[axis] - p[axis]
            else:
                continue
            # violation = c0 + c1 * s
            A += c1 * c1
            B += 2 * c0 * c1
            C += c0 * c0
        cands = [s0, s1]
        if A > 0:
            v = -B / (2 * A)
            if s0 < v < s1:
                cands.append(v)
        for s in cands:
            val = A * s * s + B * s + C
            if best is None or val < best:
                best = val
    return best


def segs_intersect(p1, q1, p2, q2) -> bool:
    """Exact closed-segment intersection test in the plane."""
    d1 = vsub(q1, p1)
    d2 = vsub(q2, p2)
    o1 = cross2(d1, vsub(p2, p1))
    o2 = cross2(d1, vsub(q2, p1))
    o3 = cross2(d2, vsub(p1, p2))
    o4 = cross2(d2, vsub(q1, p2))
    if ((o1 > 0) != (o2 > 0) and o1 != 0 and o2 != 0
            and (o3 > 0) != (o4 > 0) and o3 != 0 and o4 != 0):
        return True

    def on_seg(a, b, x):
        return (min(a[0], b[0]) <= x[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= x[1] <= max(a[1], b[1]))

    if o1 == 0 and on_seg(p1, q1, p2):
        return True
    if o2 == 0 and on_seg(p1, q1, q2):
        return True
    if o3 == 0 and on_seg(p2, q2, p1):
        return True
    if o4 == 0 and on_seg(p2, q2, q1):
        return True
    return False


# ---------------------------------------------------------------------------
# Lattice walks
# ---------------------------------------------------------------------------

def cells_touched(p, q, m: int) -> set:
    """All closed lattice cells of side 2^-m meeting the closed segment pq.

    Touching a grid hyperplane counts for the cells on both sides, which
    matches the closed-intersection convention used for cube adjacency.
    """
    n = len(p)
    scale = Fraction(2 ** m)
    breaks = {ZERO, ONE}
    for axis in range(n):
        dx = q[axis] - p[axis]
        if dx == 0:
            continue
        xs = sorted((p[axis] * scale, q[axis] * scale))
        v0 = math.ceil(xs[0])
        v1 = math.floor(xs[1])
        for v in range(v0, v1 + 1):
            s = (Fraction(v) / scale - p[axis]) / dx
            if 0 < s < 1:
                breaks.add(s)
    breaks = sorted(breaks)
    cells = set()

    def cells_at_point(x):
        axes_opts = []
        for axis in range(n):
            c = x[axis] * scale
            if c.denominator == 1:
                axes_opts.append((int(c) - 1, int(c)))
            else:
                axes_opts.append((math.floor(c),))
        out = [()]
        for opts in axes_opts:
            out = [cell + (o,) for cell in out for o in opts]
        return out

    for s in breaks:
        cells.update(cells_at_point(lerp(p, q, s)))
    for s0, s1 in zip(breaks, breaks[1:]):
        cells.update(cells_at_point(lerp(p, q, (s0 + s1) / 2)))
    return cells


def cell_box(corner: Sequence[int], m: int):
    h = Fraction(1, 2 ** m)
    lo = tuple(Fraction(c) * h for c in corner)
    hi = tuple(Fraction(c + 1) * h for c in corner)
    return lo, hi


def bisect_root(f, lo: Fraction, hi: Fraction, bits: int = 80) -> Fraction:
    """Root of a sign-changing function by dyadic bisection, 2^-bits wide."""
    flo = f(lo)
    if flo == 0:
        return lo
    fhi = f(hi)
    if fhi == 0:
        return hi
    assert (flo < 0) != (fhi < 0), "no sign change"
    for _ in range(bits):
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2
