"""Dyadic cubes, face-closed complexes, star-shaped cube-union domains with
an exact shape function, and the grid neighborhoods of a set near a domain
boundary.

All cube predicates are integer arithmetic on (corner, scale); geometry
enters only through exact rational supports.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections import namedtuple
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .exact import (ONE, ZERO, cells_touched, clip_segment_box, frac,
                    iv_intersect, iv_normalize, iv_subtract_open, lerp)


@dataclass(frozen=True)
class DyadicCube:
    """A closed dyadic cell: side 2^-m, integer min-corner, k free axes."""

    m: int
    corner: tuple
    axes: tuple = None

    def __post_init__(self):
        if self.axes is None:
            object.__setattr__(self, "axes", tuple(range(len(self.corner))))
        assert len(set(self.axes)) == len(self.axes)
        assert all(0 <= a < len(self.corner) for a in self.axes)
        object.__setattr__(self, "axes", tuple(sorted(self.axes)))

    @property
    def n(self):
        return len(self.corner)

    @property
    def k(self):
        return len(self.axes)

    def support(self):
        """(lo, hi) of the cell as exact rational boxes (flat on fixed axes)."""
        h = Fraction(1, 2 ** self.m)
        lo = tuple(Fraction(c) * h for c in self.corner)
        hi = tuple(lo[i] + (h if i in self.axes else 0) for i in range(self.n))
        return lo, hi

    def faces(self):
        """The 2k codimension-one faces."""
        out = []
        for a in self.axes:
            sub = tuple(x for x in self.axes if x != a)
            out.append(DyadicCube(self.m, self.corner, sub))
            up = tuple(c + (1 if i == a else 0)
                       for i, c in enumerate(self.corner))
            out.append(DyadicCube(self.m, up, sub))
        return out

    def closure(self):
        """This cube and all its faces, of every dimension."""
        seen = {self}
        frontier = [self]
        while frontier:
            nxt = []
            for cube in frontier:
                for f in cube.faces():
                    if f not in seen:
                        seen.add(f)
                        nxt.append(f)
            frontier = nxt
        return seen

    def vertices(self):
        verts = []
        for bits in itertools.product((0, 1), repeat=self.k):
            c = list(self.corner)
            for b, a in zip(bits, self.axes):
                c[a] += b
            verts.append(tuple(c))
        return verts

    def contains_point(self, x) -> bool:
        lo, hi = self.support()
        return all(l <= c <= h for c, l, h in zip(x, lo, hi))

    def contains_cube(self, other: "DyadicCube") -> bool:
        """Support containment, allowing different scales."""
        lo, hi = self.support()
        olo, ohi = other.support()
        return all(a <= b and c <= d
                   for a, b, c, d in zip(lo, olo, ohi, hi))

    def to_line(self) -> str:
        parts = [self.m, self.k, *self.corner, *self.axes]
        return " ".join(str(p) for p in parts)

    @classmethod
    def from_line(cls, line: str) -> "DyadicCube":
        vals = [int(v) for v in line.split()]
        m, k = vals[0], vals[1]
        rest = vals[2:]
        if k > len(rest):
            raise ValueError("truncated cube line")
        corner = tuple(rest[:len(rest) - k]) if k else tuple(rest)
        axes = tuple(rest[len(rest) - k:]) if k else ()
        return cls(m, corner, axes)


class DyadicComplex:
    """A finite face-closed family of dyadic cells at one scale."""

    def __init__(self, m: int, cubes):
        self.m = m
        self.cubes = frozenset(cubes)
        for c in self.cubes:
            if c.m != m:
                raise ValueError("mixed scales in complex")
        self._by_dim = {}
        for c in self.cubes:
            self._by_dim.setdefault(c.k, set()).add(c)

    @classmethod
    def empty(cls, m=0):
        return cls(m, ())

    @property
    def dim(self):
        return max(self._by_dim) if self._by_dim else -1

    def cells(self, k):
        return sorted(self._by_dim.get(k, ()),
                      key=lambda c: (c.corner, c.axes))

    def skeleton(self, i) -> "DyadicComplex":
        return DyadicComplex(self.m, (c for c in self.cubes if c.k <= i))

    def __contains__(self, cube):
        return cube in self.cubes

    def __len__(self):
        return len(self.cubes)

    def is_subcomplex_of(self, other: "DyadicComplex") -> bool:
        return self.m == other.m and self.cubes <= other.cubes

    def contains_point(self, x) -> bool:
        return any(c.contains_point(x) for c in self.cubes)

    def top_cells(self):
        return self.cells(self.dim)

    def boundary_cells(self):
        """(dim-1)-cells belonging to exactly one top cell."""
        count = {}
        for c in self.top_cells():
            for f in c.faces():
                count[f] = count.get(f, 0) + 1
        return sorted((f for f, k in count.items() if k == 1),
                      key=lambda c: (c.corner, c.axes))

    def interior_cells(self, k):
        """K*_k: k-cells not contained in the boundary of |K|."""
        boundary = self.boundary_cells()
        out = []
        for c in self.cells(k):
            if not any(b.contains_cube(c) for b in boundary):
                out.append(c)
        return out

    def serialize(self) -> str:
        lines = sorted(c.to_line() for c in self.cubes)
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def deserialize(cls, text: str) -> "DyadicComplex":
        cubes = [DyadicCube.from_line(l) for l in text.splitlines() if l.strip()]
        if not cubes:
            return cls.empty()
        return build_complex(cubes)


def build_complex(cubes) -> DyadicComplex:
    """Face closure of the given cells; rejects mixed scales."""
    cubes = list(cubes)
    if not cubes:
        return DyadicComplex.empty()
    m = cubes[0].m
    closed = set()
    for c in cubes:
        if c.m != m:
            raise ValueError("mixed scales: %d and %d" % (m, c.m))
        if c not in closed:
            closed |= c.closure()
    return DyadicComplex(m, closed)


def _neighbor_block(corner):
    n = len(corner)
    for delta in itertools.product((-1, 0, 1), repeat=n):
        yield tuple(c + d for c, d in zip(corner, delta))


# ---------------------------------------------------------------------------
# Star-shaped domain D = union of top cubes at scale m0 and its shape
# function f(x) = inf{r : x in rD}.
#
# Each cube with min-corner l contributes the box prod [-a_i, a_i] * 2^-m0,
# a_i = max(|l_i|, |l_i+1|), which has the same circumradius and so lies in
# D whenever D collects every cube inside a fixed ball.  D is the union of
# these boxes, which gives the exact closed form
#     f(x) = min over boxes of max_i |x_i| * 2^m0 / a_i .
# ---------------------------------------------------------------------------

class Domain:
    def __init__(self, m0: int, corners, r1=None, r2=None):
        self.m0 = m0
        self.corners = frozenset(tuple(c) for c in corners)
        if not self.corners:
            raise ValueError("empty domain")
        self.r1 = frac(r1) if r1 is not None else None
        self.r2 = frac(r2) if r2 is not None else None
        self.n = len(next(iter(self.corners)))
        self._frontier = None
        self._boundary_index = None

    @property
    def frontier(self):
        """Pareto-maximal box radius vectors (in lattice units)."""
        if self._frontier is None:
            cand = {tuple(max(abs(l), abs(l + 1)) for l in c)
                    for c in self.corners}
            cand = sorted(cand, key=sum, reverse=True)
            kept = []
            for a in cand:
                if not any(all(k >= x for k, x in zip(b, a)) for b in kept):
                    kept.append(a)
            self._frontier = tuple(kept)
        return self._frontier

    def shape(self, x) -> Fraction:
        """f(x); exact, homogeneous, 2^m0-Lipschitz.  f(0) = 0."""
        scale = 2 ** self.m0
        best = None
        ax = [abs(frac(c)) * scale for c in x]
        for a in self.frontier:
            v = max(xi / ai for xi, ai in zip(ax, a)) if any(ax) else ZERO
            if best is None or v < best:
                best = v
        return best

    def contains(self, x) -> bool:
        return self.shape(x) <= 1

    def contains_interior(self, x) -> bool:
        return self.shape(x) < 1

    def shape_max_on_box(self, lo, hi) -> Fraction:
        far = tuple(l if abs(l) >= abs(h) else h for l, h in zip(lo, hi))
        return self.shape(far)

    def shape_min_on_box(self, lo, hi) -> Fraction:
        near = tuple(max(l, min(h, ZERO)) for l, h in zip(lo, hi))
        return self.shape(near)

    # -- segment clipping against scaled copies rD -------------------------

    def seg_leq(self, p, q, r):
        """Closed parameter intervals of segment pq inside rD = {f <= r}."""
        r = frac(r)
        h = Fraction(1, 2 ** self.m0)
        out = []
        for a in self.frontier:
            lo = tuple(-r * ai * h for ai in a)
            hi = tuple(r * ai * h for ai in a)
            iv = clip_segment_box(p, q, lo, hi)
            if iv:
                out.append(iv)
        return iv_normalize(out)

    def seg_lt(self, p, q, r):
        """Open parameter intervals inside the interior {f < r}."""
        r = frac(r)
        h = Fraction(1, 2 ** self.m0)
        out = []
        for a in self.frontier:
            lo = tuple(-r * ai * h for ai in a)
            hi = tuple(r * ai * h for ai in a)
            iv = clip_segment_box(p, q, lo, hi, strict=True)
            if iv:
                out.append(iv)
        return iv_normalize(out)

    def seg_geq(self, p, q, r):
        """Closed intervals (possibly degenerate) where f >= r."""
        return iv_subtract_open([(ZERO, ONE)], self.seg_lt(p, q, r))

    def seg_shell(self, p, q, rlo=None, rhi=None):
        ivs = [(ZERO, ONE)]
        if rhi is not None:
            ivs = iv_intersect(ivs, self.seg_leq(p, q, rhi))
        if rlo is not None:
            lt = self.seg_lt(p, q, rlo)
            out = []
            for a, b in ivs:
                out.extend(iv_subtract_open([(a, b)], lt))
            # subtracting open intervals keeps their endpoints; drop the
            # degenerate leftovers that are strictly below the shell
            ivs = [(a, b) for a, b in out
                   if a < b or self.shape(lerp(p, q, a)) >= frac(rlo)]
        return ivs

    # -- complexes and boundary ---------------------------------------------

    def complex(self) -> DyadicComplex:
        return build_complex(DyadicCube(self.m0, c) for c in self.corners)

    def top_cubes(self):
        return [DyadicCube(self.m0, c) for c in sorted(self.corners)]

    def boundary_faces(self):
        """(n-1)-cells of the domain boundary at scale m0."""
        count = {}
        for c in sorted(self.corners):
            for f in DyadicCube(self.m0, c).faces():
                count[f] = count.get(f, 0) + 1
        return sorted((f for f, k in count.items() if k == 1),
                      key=lambda c: (c.corner, c.axes))

    def _boundary_by_plane(self):
        if self._boundary_index is None:
            idx = {}
            for f in self.boundary_faces():
                flat = next(a for a in range(self.n) if a not in f.axes)
                idx.setdefault((flat, f.corner[flat]), []).append(f)
            self._boundary_index = idx
        return self._boundary_index

    def cell_in_boundary(self, cube: DyadicCube) -> bool:
        """Whether a finer cell lies inside the boundary of D (scale >= m0)."""
        if cube.m < self.m0 or cube.k >= self.n:
            return False
        shift = cube.m - self.m0
        for flat in range(cube.n):
            if flat in cube.axes:
                continue
            v = cube.corner[flat]
            if v % (2 ** shift):
                continue
            for f in self._boundary_by_plane().get((flat, v >> shift), []):
                if f.contains_cube(cube):
                    return True
        return False

    def area(self) -> Fraction:
        return Fraction(len(self.corners), 2 ** (self.n * self.m0))

    def serialize(self) -> str:
        head = "%s %s %d\n" % (self.r1, self.r2, self.m0)
        return head + "".join(" ".join(str(v) for v in c) + "\n"
                              for c in sorted(self.corners))

    @classmethod
    def deserialize(cls, text: str) -> "Domain":
        lines = [l for l in text.splitlines() if l.strip()]
        r1, r2, m0 = lines[0].split()
        corners = [tuple(int(v) for v in l.split()) for l in lines[1:]]
        return cls(int(m0), corners,
                   None if r1 == "None" else Fraction(r1),
                   None if r2 == "None" else Fraction(r2))


def build_domain(r1, r2, m0: int, n: int = 2) -> Domain:
    """Union of all scale-m0 cubes inside B(0, r1 + (r2-r1)/2).

    Checks the containment chain closure(B(0,r1)) in D interior and
    D in B(0,r2) exactly, and fails naming the violated inclusion.
    """
    r1, r2 = frac(r1), frac(r2)
    if r1 >= r2:
        raise ValueError("need r1 < r2")
    if Fraction(1, 2 ** m0) >= (r2 - r1) / 100:
        raise ValueError("scale too coarse: need 2^-m0 < (r2-r1)/100")
    rmid = r1 + (r2 - r1) / 2
    R2 = (rmid * 2 ** m0) ** 2
    bound = math.isqrt(int(R2)) + 2
    corners = []
    for c in itertools.product(range(-bound, bound), repeat=n):
        if sum(max(l * l, (l + 1) * (l + 1)) for l in c) <= R2:
            corners.append(c)
    D = Domain(m0, corners, r1, r2)
    # D subset of B(0, r2): far corner of every cube inside the open ball
    Rout = (r2 * 2 ** m0) ** 2
    for c in corners:
        if sum(max(l * l, (l + 1) * (l + 1)) for l in c) >= Rout:
            raise ValueError("containment violated: D is not inside B(0,r2)")
    # closed B(0,r1) inside the interior: every cube meeting the closed
    # ball must be a member (then each ball point has all incident cubes
    # present, hence lies in the interior of the union)
    Rin = (r1 * 2 ** m0) ** 2
    corner_set = D.corners
    for c in itertools.product(range(-bound, bound), repeat=n):
        near = 0
        for l in c:
            if l + 1 < 0:
                near += (l + 1) * (l + 1)
            elif l > 0:
                near += l * l
        if near <= Rin and c not in corner_set:
            raise ValueError(
                "containment violated: closed B(0,r1) not inside D interior")
    return D


def shape_value(D: Domain, x) -> Fraction:
    """f(x) = inf{r : x in rD}; errors at the origin (undefined there)."""
    x = tuple(frac(c) for c in x)
    if all(c == 0 for c in x):
        raise ValueError("shape function undefined at the origin")
    return D.shape(x)


# ---------------------------------------------------------------------------
# Windows backed by a domain shell {rlo <= f <= rhi}, usable with
# geomset.measure and the other interval-clipping consumers.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DomainShell:
    D: Domain
    rlo: object = None
    rhi: object = None

    def clip_params(self, p, q):
        return self.D.seg_shell(p, q, self.rlo, self.rhi)

    def contains(self, x):
        f = self.D.shape(x)
        if self.rlo is not None and f < frac(self.rlo):
            return False
        if self.rhi is not None and f > frac(self.rhi):
            return False
        return True


# ---------------------------------------------------------------------------
# Grid neighborhoods of E around the boundary of a domain.
# ---------------------------------------------------------------------------

Neighborhood = namedtuple(
    "Neighborhood", "S S_prime S_prime_d T T_prime T_prime_d Q Q_prime")


def _annulus_pieces(D0: Domain, E, t):
    t = frac(t)
    pieces = []
    for p, q in E.simplices:
        for a, b in D0.seg_shell(p, q, 1 - t, 1 + t):
            pieces.append((lerp(p, q, a), lerp(p, q, b)))
    return pieces


def neighborhood_complexes(D0: Domain, E, m: int, t, eps1=None) -> Neighborhood:
    """Cube neighborhoods S, S', their d-skeleton weld S'^d and the
    boundary traces T, T' of E near the boundary shell of D0.

    Q collects every scale-m cube touching a cube that meets
    E within the shell {1-t <= f <= 1+t}; Q' adds one more layer.
    """
    if E.d >= E.n:
        raise ValueError("need intrinsic dimension d < n")
    if m < D0.m0:
        raise ValueError("neighborhood scale must refine the domain scale")
    t = frac(t)
    if eps1 is not None and not (0 < t < frac(eps1) / 100):
        warnings.warn("t outside the regime (0, eps1/100)")

    q0 = set()
    for p, q in _annulus_pieces(D0, E, t):
        q0 |= cells_touched(p, q, m)
    Q = set(q0)
    for c in q0:
        Q.update(_neighbor_block(c))
    Qp = set(Q)
    for c in Q:
        Qp.update(_neighbor_block(c))

    S = build_complex(DyadicCube(m, c) for c in sorted(Q))
    Sp = build_complex(DyadicCube(m, c) for c in sorted(Qp))
    Spd = Sp.skeleton(E.d)
    T = DyadicComplex(m, (c for c in S.cubes if D0.cell_in_boundary(c)))
    Tp = DyadicComplex(m, (c for c in Sp.cubes if D0.cell_in_boundary(c)))
    Tpd = Tp.skeleton(E.d)
    return Neighborhood(S, Sp, Spd, T, Tp, Tpd,
                        frozenset(Q), frozenset(Qp))


def covered_by_cells(p, q, m: int, cells) -> bool:
    """Whether the closed segment lies in the interior of the union of the
    given scale-m cells (every touched cell, including by-contact ones,
    is a member)."""
    return cells_touched(p, q, m) <= set(cells)


def skeleton_polyset(K: DyadicComplex, d: int = 1):
    """|K^d| as a PolySet (d = 1: the edges as exact segments)."""
    from .geomset import PolySet
    if d != 1:
        raise NotImplementedError("only 1-skeleton extraction is supported")
    segs = []
    for c in K.cells(1):
        lo, hi = c.support()
        segs.append((lo, hi))
    n = K.cells(1)[0].n if K.cells(1) else 2
    return PolySet(n=n, d=1, simplices=tuple(segs))
