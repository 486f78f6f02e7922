"""Integer homology of cubical complexes over finitely generated
coefficient groups.

Everything reduces to Smith normal form over Z: homology over Z via the
cycle-lattice/boundary-lattice quotient, homology over Z/q via the mod-q
cycle lattice with augmented relations.  Witness chains are produced by
integer solves and verified by the callers with exact boundary checks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .dyadic import DyadicComplex, DyadicCube, build_complex
from .exact import cells_touched, frac, seg_box_dist2


# ---------------------------------------------------------------------------
# Smith normal form with tracked transforms
# ---------------------------------------------------------------------------

@dataclass
class SNF:
    U: list        # rows x rows, unimodular
    D: list        # rows x cols, diagonal with d1 | d2 | ...
    V: list        # cols x cols, unimodular
    Uinv: list
    Vinv: list

    def diagonal(self):
        r = len(self.D)
        c = len(self.D[0]) if r else 0
        return [self.D[i][i] for i in range(min(r, c))]

    def invariant_factors(self):
        return [d for d in self.diagonal() if d != 0]

    @property
    def rank(self):
        return len(self.invariant_factors())


def _eye(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def smith_normal_form(M) -> SNF:
    """U M V = D with U, V unimodular and d1 | d2 | ... on the diagonal."""
    r = len(M)
    c = len(M[0]) if r else 0
    A = [list(row) for row in M]
    U, Ui = _eye(r), _eye(r)
    V, Vi = _eye(c), _eye(c)

    def row_add(i, j, f):  # row_i += f * row_j
        Ai, Aj = A[i], A[j]
        for x in range(c):
            Ai[x] += f * Aj[x]
        Uirow, Ujrow = U[i], U[j]
        for x in range(r):
            Uirow[x] += f * Ujrow[x]
        for x in range(r):
            Ui[x][j] -= f * Ui[x][i]

    def col_add(i, j, f):  # col_i += f * col_j
        for x in range(r):
            A[x][i] += f * A[x][j]
        for x in range(c):
            V[x][i] += f * V[x][j]
        row_i, row_j = Vi[i], Vi[j]
        for x in range(c):
            row_j[x] -= f * row_i[x]

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]
        for x in range(r):
            Ui[x][i], Ui[x][j] = Ui[x][j], Ui[x][i]

    def col_swap(i, j):
        for x in range(r):
            A[x][i], A[x][j] = A[x][j], A[x][i]
        for x in range(c):
            V[x][i], V[x][j] = V[x][j], V[x][i]
        Vi[i], Vi[j] = Vi[j], Vi[i]

    def row_neg(i):
        A[i] = [-v for v in A[i]]
        U[i] = [-v for v in U[i]]
        for x in range(r):
            Ui[x][i] = -Ui[x][i]

    t = 0
    while t < min(r, c):
        # pick the smallest nonzero entry in the remaining block as pivot
        piv = None
        for i in range(t, r):
            for j in range(t, c):
                v = abs(A[i][j])
                if v and (piv is None or v < piv[0]):
                    piv = (v, i, j)
        if piv is None:
            break
        _, pi, pj = piv
        if pi != t:
            row_swap(t, pi)
        if pj != t:
            col_swap(t, pj)
        while True:
            for i in range(t + 1, r):
                if A[i][t]:
                    row_add(i, t, -(A[i][t] // A[t][t]))
            rem = [i for i in range(t + 1, r) if A[i][t]]
            if rem:
                i = min(rem, key=lambda i: abs(A[i][t]))
                row_swap(t, i)
                continue
            for j in range(t + 1, c):
                if A[t][j]:
                    col_add(j, t, -(A[t][j] // A[t][t]))
            rem = [j for j in range(t + 1, c) if A[t][j]]
            if rem:
                j = min(rem, key=lambda j: abs(A[t][j]))
                col_swap(t, j)
                continue
            # ensure the pivot divides the rest of the block
            bad = None
            for i in range(t + 1, r):
                for j in range(t + 1, c):
                    if A[i][j] % A[t][t]:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is not None:
                row_add(t, bad, 1)
                continue
            break
        if A[t][t] < 0:
            row_neg(t)
        t += 1
    return SNF(U=U, D=A, V=V, Uinv=Ui, Vinv=Vi)


def _mat_vec(M, v):
    return [sum(M[i][j] * v[j] for j in range(len(v))) for i in range(len(M))]


def solve_int(M, b, snf: SNF = None):
    """An integer solution x of M x = b, or None."""
    r = len(M)
    c = len(M[0]) if r else 0
    if snf is None:
        snf = smith_normal_form(M)
    y = _mat_vec(snf.U, list(b))
    x = [0] * c
    for i in range(min(r, c)):
        d = snf.D[i][i]
        if d == 0:
            if y[i] != 0:
                return None
        else:
            if y[i] % d:
                return None
            x[i] = y[i] // d
    for i in range(min(r, c), r):
        if y[i] != 0:
            return None
    return _mat_vec(snf.V, x)


def _sparse_rank(cols):
    """Rank over Z of a matrix given as column dicts {row: value}.

    Unit pivots are eliminated sparsely; any leftover core goes through
    dense Smith normal form.  Exact for integer matrices since the rank
    over Z equals the rank over Q.
    """
    cols = {j: dict(col) for j, col in enumerate(cols) if col}
    row_use = {}
    for j, col in cols.items():
        for i in col:
            row_use.setdefault(i, set()).add(j)
    rank = 0
    while True:
        pivot = None
        for j, col in cols.items():
            for i, v in col.items():
                if v == 1 or v == -1:
                    pivot = (i, j, v)
                    break
            if pivot:
                break
        if not pivot:
            break
        i0, j0, v0 = pivot
        pcol = cols.pop(j0)
        for i in pcol:
            row_use[i].discard(j0)
        rank += 1
        targets = list(row_use.get(i0, ()))
        for j in targets:
            col = cols[j]
            f = col[i0]
            if v0 == -1:
                f = -f
            for i, v in pcol.items():
                nv = col.get(i, 0) - f * v
                if nv:
                    col[i] = nv
                    row_use.setdefault(i, set()).add(j)
                else:
                    col.pop(i, None)
                    row_use[i].discard(j)
        row_use.pop(i0, None)
        # pcol entries for rows other than i0 are gone from this column only
    if cols:
        rows = sorted({i for col in cols.values() for i in col})
        rmap = {i: k for k, i in enumerate(rows)}
        dense = [[0] * len(cols) for _ in rows]
        for jj, col in enumerate(cols.values()):
            for i, v in col.items():
                dense[rmap[i]][jj] = v
        rank += smith_normal_form(dense).rank
    return rank


# ---------------------------------------------------------------------------
# Coefficient groups and chain complexes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FgAbelianGroup:
    """Z^rank + sum of Z/q_i with q_1 | q_2 | ... (invariant factors)."""

    rank: int
    torsion: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion", tuple(self.torsion))
        if self.rank < 0:
            raise ValueError("rank must be nonnegative")
        prev = None
        for q in self.torsion:
            if q < 2:
                raise ValueError("torsion orders must be at least 2")
            if prev is not None and q % prev:
                raise ValueError("torsion orders must divide successively")
            prev = q

    def factors(self):
        """Cyclic factors: 0 stands for Z, q for Z/q."""
        return [0] * self.rank + list(self.torsion)

    @classmethod
    def parse(cls, text: str) -> "FgAbelianGroup":
        rank, torsion = 0, ()
        for part in text.split(";"):
            part = part.strip()
            if part.startswith("rank"):
                rank = int(part.split()[1])
            elif part.startswith("torsion"):
                rest = part[len("torsion"):].strip()
                if rest:
                    torsion = tuple(int(v) for v in rest.split(","))
        return cls(rank, torsion)


Z = FgAbelianGroup(1)


def _cube_key(c: DyadicCube):
    return (c.corner, c.axes)


class ChainComplexZ:
    """Cells per dimension with integer boundary maps (d*d = 0 checked)."""

    def __init__(self, cells, boundary):
        self.cells = {k: list(v) for k, v in cells.items()}
        self.index = {k: {c: i for i, c in enumerate(v)}
                      for k, v in self.cells.items()}
        self.boundary = boundary  # k -> {cell: {face: sign}}
        self._solvers = {}
        self._verify()

    @property
    def dim(self):
        return max((k for k, v in self.cells.items() if v), default=-1)

    def _verify(self):
        for k in self.boundary:
            if k - 1 not in self.boundary:
                continue
            for cell, faces in self.boundary[k].items():
                acc = {}
                for f, s in faces.items():
                    for g, s2 in self.boundary[k - 1].get(f, {}).items():
                        acc[g] = acc.get(g, 0) + s * s2
                if any(acc.values()):
                    raise ValueError("boundary of boundary is nonzero")

    @classmethod
    def from_complex(cls, K: DyadicComplex) -> "ChainComplexZ":
        cells = {k: K.cells(k) for k in range(K.dim + 1)}
        boundary = {}
        for k in range(1, K.dim + 1):
            bmap = {}
            for c in cells.get(k, ()):
                faces = {}
                for j, a in enumerate(c.axes):
                    sign = (-1) ** j
                    sub = tuple(x for x in c.axes if x != a)
                    low = DyadicCube(c.m, c.corner, sub)
                    upc = tuple(v + (1 if i == a else 0)
                                for i, v in enumerate(c.corner))
                    up = DyadicCube(c.m, upc, sub)
                    faces[up] = faces.get(up, 0) + sign
                    faces[low] = faces.get(low, 0) - sign
                bmap[c] = {f: s for f, s in faces.items() if s}
            boundary[k] = bmap
        return cls(cells, boundary)

    def boundary_matrix(self, k):
        """Dense matrix of d_k: rows = (k-1)-cells, cols = k-cells."""
        rows = self.cells.get(k - 1, [])
        cols = self.cells.get(k, [])
        ridx = self.index.get(k - 1, {})
        M = [[0] * len(cols) for _ in rows]
        for j, c in enumerate(cols):
            for f, s in self.boundary.get(k, {}).get(c, {}).items():
                M[ridx[f]][j] = s
        return M

    def boundary_columns(self, k):
        """Sparse columns of d_k keyed by (k-1)-cell index."""
        ridx = self.index.get(k - 1, {})
        out = []
        for c in self.cells.get(k, []):
            col = {ridx[f]: s
                   for f, s in self.boundary.get(k, {}).get(c, {}).items()}
            out.append(col)
        return out

    def chain_boundary(self, k, z: dict) -> dict:
        acc = {}
        for cell, coef in z.items():
            for f, s in self.boundary.get(k, {}).get(cell, {}).items():
                acc[f] = acc.get(f, 0) + coef * s
        return {f: v for f, v in acc.items() if v}

    def betti(self, k) -> int:
        nk = len(self.cells.get(k, []))
        if nk == 0:
            return 0
        return nk - _sparse_rank(self.boundary_columns(k)) \
            - _sparse_rank(self.boundary_columns(k + 1))

    def solver(self, k, coeff):
        key = (k, coeff)
        if key not in self._solvers:
            self._solvers[key] = _FactorSolver(self, k, coeff)
        return self._solvers[key]


class _FactorSolver:
    """Homology of one degree over one cyclic factor (0 = Z, q = Z/q)."""

    def __init__(self, X: ChainComplexZ, k: int, coeff: int):
        self.X, self.k, self.coeff = X, k, coeff
        nk = len(X.cells.get(k, []))
        dk = X.boundary_matrix(k)
        if not dk:
            # no (k-1)-cells: every chain is a cycle
            dk = [[0] * nk] if nk else []
        self.snf_dk = smith_normal_form(dk) if dk else None
        diag = self.snf_dk.diagonal() if self.snf_dk else []
        mults = []
        for j in range(nk):
            d = diag[j] if j < len(diag) else 0
            if coeff == 0:
                mults.append(1 if d == 0 else None)  # None: not a cycle dir
            else:
                g = math.gcd(d, coeff)
                mults.append(coeff // g)
        self.mults = mults
        self.kernel_cols = [j for j, m in enumerate(mults) if m is not None]
        V = self.snf_dk.V if self.snf_dk else _eye(nk)
        self.Vinv = self.snf_dk.Vinv if self.snf_dk else _eye(nk)
        # lattice basis W: columns m_j * V_j for the cycle directions
        self.W = [[V[i][j] * mults[j] for j in self.kernel_cols]
                  for i in range(nk)]
        # relation matrix: boundaries from above, plus q * e_i for Z/q
        rel_cols = []
        for col in X.boundary_columns(k + 1):
            vec = [0] * nk
            for i, v in col.items():
                vec[i] = v
            rel_cols.append(self._coords(vec))
        if coeff:
            for i in range(nk):
                vec = [0] * nk
                vec[i] = coeff
                rel_cols.append(self._coords(vec))
        z = len(self.kernel_cols)
        Y = [[rel_cols[j][i] for j in range(len(rel_cols))] for i in range(z)]
        if z and not rel_cols:
            Y = [[] for _ in range(z)]
        self.snf_Y = smith_normal_form(Y) if z else None
        diagY = self.snf_Y.diagonal() if self.snf_Y else []
        self.orders = []
        for i in range(z):
            d = diagY[i] if i < len(diagY) else 0
            self.orders.append(d)

    def _coords(self, vec):
        """Coordinates in the lattice basis W; None when not in the lattice."""
        y = _mat_vec(self.Vinv, vec)
        out = []
        for j, m in enumerate(self.mults):
            if m is None:
                if y[j] != 0:
                    return None
            else:
                if y[j] % m:
                    return None
                out.append(y[j] // m)
        return out

    def chain_vector(self, z: dict):
        nk = len(self.X.cells.get(self.k, []))
        idx = self.X.index.get(self.k, {})
        vec = [0] * nk
        for cell, coef in z.items():
            if cell not in idx:
                raise KeyError("chain uses a cell outside the complex")
            vec[idx[cell]] = coef
        return vec

    def is_cycle(self, z: dict) -> bool:
        b = self.X.chain_boundary(self.k, z)
        if self.coeff:
            return all(v % self.coeff == 0 for v in b.values())
        return not b

    def class_coords(self, z: dict):
        """Reduced coordinates of [z] against the invariant factors."""
        y = self._coords(self.chain_vector(z))
        if y is None:
            raise ValueError("not a cycle in this coefficient factor")
        u = _mat_vec(self.snf_Y.U, y) if self.snf_Y else []
        out = []
        for i, o in enumerate(self.orders):
            v = u[i] if i < len(u) else 0
            out.append(v % o if o else v)
        return out

    def bounding_chain(self, z: dict):
        """w with boundary(w) = z (mod q for torsion factors), or None."""
        X, k = self.X, self.k
        vec = self.chain_vector(z)
        cols = X.boundary_columns(k + 1)
        nk = len(vec)
        M = [[0] * (len(cols) + (nk if self.coeff else 0)) for _ in range(nk)]
        for j, col in enumerate(cols):
            for i, v in col.items():
                M[i][j] = v
        if self.coeff:
            for i in range(nk):
                M[i][len(cols) + i] = self.coeff
        x = solve_int(M, vec) if M and M[0] else (None if any(vec) else [])
        if x is None:
            return None
        cells = X.cells.get(k + 1, [])
        return {cells[j]: x[j] for j in range(len(cols)) if x[j]}

    def generators(self):
        """(order, chain) per factor with order != 1; order 0 means Z."""
        cells = self.X.cells.get(self.k, [])
        Ui = self.snf_Y.Uinv if self.snf_Y else None
        out = []
        for i, o in enumerate(self.orders):
            if o == 1:
                continue
            if Ui is None:
                col = [1 if j == i else 0 for j in range(len(self.orders))]
            else:
                col = [Ui[r][i] for r in range(len(self.orders))]
            vec = _mat_vec(self.W, col)
            chain = {cells[j]: vec[j] for j in range(len(vec)) if vec[j]}
            out.append((o, chain))
        return out


@dataclass
class FactorHomology:
    coeff: int          # 0 for Z, q for Z/q
    orders: list        # 0 = free summand, o >= 2 torsion
    generators: list    # chains, aligned with orders

    @property
    def rank(self):
        return self.orders.count(0)

    @property
    def torsion(self):
        return [o for o in self.orders if o > 1]


@dataclass
class HomologyGroup:
    degree: int
    factors: list

    @property
    def rank(self):
        return sum(f.rank for f in self.factors if f.coeff == 0)


def homology_group(X: ChainComplexZ, k: int, G: FgAbelianGroup) -> HomologyGroup:
    factors = []
    for coeff in G.factors():
        s = X.solver(k, coeff)
        gens = s.generators()
        factors.append(FactorHomology(coeff=coeff,
                                      orders=[o for o, _ in gens],
                                      generators=[g for _, g in gens]))
    return HomologyGroup(degree=k, factors=factors)


@dataclass
class CycleClass:
    is_zero: bool
    per_factor: list    # dicts: coeff, coords or witness


def cycle_class(X: ChainComplexZ, z: dict, k: int,
                G: FgAbelianGroup = Z) -> CycleClass:
    """Class of a cycle, with an explicit bounding chain when trivial."""
    per = []
    zero = True
    for coeff in G.factors():
        s = X.solver(k, coeff)
        if not s.is_cycle(z):
            raise ValueError("not a cycle")
        coords = s.class_coords(z)
        if any(coords):
            zero = False
            per.append({"coeff": coeff, "zero": False, "coords": coords})
        else:
            w = s.bounding_chain(z)
            if w is None:
                raise AssertionError("trivial class without bounding chain")
            check = X.chain_boundary(k + 1, w)
            diff = dict(check)
            for cell, v in z.items():
                diff[cell] = diff.get(cell, 0) - v
            bad = {c: v for c, v in diff.items()
                   if (v % coeff if coeff else v)}
            if bad:
                raise AssertionError("bounding chain failed verification")
            per.append({"coeff": coeff, "zero": True, "witness": w})
    return CycleClass(is_zero=zero, per_factor=per)


def _kernel_lattice(M):
    """Basis (as columns) of the integer kernel of M."""
    r = len(M)
    c = len(M[0]) if r else 0
    if c == 0:
        return []
    if r == 0:
        return [[1 if i == j else 0 for i in range(c)] for j in range(c)]
    snf = smith_normal_form(M)
    diag = snf.diagonal()
    cols = []
    for j in range(c):
        d = diag[j] if j < len(diag) else 0
        if d == 0:
            cols.append([snf.V[i][j] for i in range(c)])
    return cols


def induced_map_kernel(A: ChainComplexZ, X: ChainComplexZ, k: int,
                       G: FgAbelianGroup):
    """Generators of ker(H_k(A;G) -> H_k(X;G)) as explicit cycles in A.

    Requires every cell of A to be a cell of X (inclusion of complexes).
    """
    for kk, cells in A.cells.items():
        missing = [c for c in cells if c not in X.index.get(kk, {})]
        if missing:
            raise ValueError("not a subcomplex: %d cells missing" % len(missing))
    out = []
    for coeff in G.factors():
        sa = A.solver(k, coeff)
        sx = X.solver(k, coeff)
        gens = sa.generators()
        if not gens:
            continue
        orders_a = [o for o, _ in gens]
        # matrix of classes of the A-generators inside H_k(X)
        vmat = [sx.class_coords(g) for _, g in gens]   # s x tX
        tX = len(sx.orders)
        M = [[vmat[i][j] for i in range(len(gens))] for j in range(tX)]
        extra = []
        for j, p in enumerate(sx.orders):
            if p:
                col = [0] * tX
                col[j] = p
                extra.append(col)
        for col in extra:
            for j in range(tX):
                M[j].append(col[j])
        L = _kernel_lattice(M) if tX else \
            [[1 if i == j else 0 for i in range(len(gens))]
             for j in range(len(gens))]
        L = [col[:len(gens)] for col in L]
        if not L:
            continue
        # quotient by the trivial combinations diag(orders_a)
        Lmat = [[L[j][i] for j in range(len(L))] for i in range(len(gens))]
        snf_L = smith_normal_form(Lmat)
        rel = []
        for i, o in enumerate(orders_a):
            if o:
                vec = [0] * len(gens)
                vec[i] = o
                y = solve_int(Lmat, vec, snf_L)
                if y is not None:
                    rel.append(y)
        if rel:
            R = [[rel[j][i] for j in range(len(rel))] for i in range(len(L))]
            snf_R = smith_normal_form(R)
            diag = snf_R.diagonal()
            for i in range(len(L)):
                o = diag[i] if i < len(diag) else 0
                if o == 1:
                    continue
                comb = [snf_R.Uinv[r][i] for r in range(len(L))]
                coefs = _mat_vec(Lmat, comb)
                out.append(_combine(gens, coefs, coeff, o))
        else:
            for col in L:
                out.append(_combine(gens, col, coeff, 0))
    # keep only combinations that are genuinely nonzero in H_k(A)
    kept = []
    for entry in out:
        sa = A.solver(k, entry["coeff"])
        if any(sa.class_coords(entry["cycle"])):
            kept.append(entry)
    return kept


def _combine(gens, coefs, coeff, order):
    chain = {}
    for (o, g), c in zip(gens, coefs):
        for cell, v in g.items():
            chain[cell] = chain.get(cell, 0) + c * v
    chain = {c: v for c, v in chain.items() if v}
    return {"coeff": coeff, "order": order, "cycle": chain}


# ---------------------------------------------------------------------------
# Complement complexes (the computable face of "U minus E")
# ---------------------------------------------------------------------------

def _region_corners(region, mprime):
    if isinstance(region, DyadicComplex):
        m, tops = region.m, [c.corner for c in region.top_cells()]
        n = len(tops[0]) if tops else 2
    else:  # Domain
        m, tops, n = region.m0, sorted(region.corners), region.n
    if mprime < m:
        raise ValueError("refinement scale must be at least the region scale")
    shift = 2 ** (mprime - m)
    out = set()
    for c in tops:
        for off in itertools.product(range(shift), repeat=n):
            out.add(tuple(v * shift + o for v, o in zip(c, off)))
    return out, n


def near_cells(E, m: int, delta, n: int):
    """Scale-m cells whose closed box is within delta of the segment soup."""
    delta = frac(delta)
    d2 = delta * delta
    ring = int(math.ceil(float(delta) * 2 ** m)) + 1
    offsets = list(itertools.product(range(-ring, ring + 1), repeat=n))
    near = set()
    checked = set()
    h = Fraction(1, 2 ** m)
    for p, q in E.simplices:
        base = cells_touched(p, q, m)
        for c in base:
            for off in offsets:
                cell = tuple(a + o for a, o in zip(c, off))
                if cell in near or (cell, p, q) in checked:
                    continue
                checked.add((cell, p, q))
                lo = tuple(Fraction(v) * h for v in cell)
                hi = tuple(l + h for l in lo)
                if seg_box_dist2(p, q, lo, hi) <= d2:
                    near.add(cell)
    return near


def complement_cells(region, E, mprime: int, delta):
    """Top-cell corners of the refined region at distance > delta from E."""
    corners, n = _region_corners(region, mprime)
    if not E.simplices:
        return corners, n
    if frac(delta) ** 2 < Fraction(n, 4 ** mprime):
        raise ValueError("delta must be at least the cell diameter")
    return corners - near_cells(E, mprime, delta, n), n


def complement_complex(region, E, mprime: int, delta) -> DyadicComplex:
    corners, _ = complement_cells(region, E, mprime, delta)
    if not corners:
        return DyadicComplex.empty(mprime)
    return build_complex(DyadicCube(mprime, c) for c in sorted(corners))


def corner_components(corners, n: int):
    """Connected components of top cells under shared-facet adjacency."""
    parent = {}

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for c in corners:
        parent[c] = c
    cset = corners if isinstance(corners, (set, frozenset)) else set(corners)
    for c in cset:
        for a in range(n):
            nb = tuple(v + (1 if i == a else 0) for i, v in enumerate(c))
            if nb in cset:
                union(c, nb)
    comps = {}
    for c in cset:
        comps.setdefault(find(c), set()).add(c)
    return sorted(comps.values(), key=lambda s: min(s))


def refinement_stable(region, E, mprime: int, delta, degrees=(0,)) -> bool:
    """Whether complement ranks agree at scales m' and m'+1."""
    ranks = []
    for m in (mprime, mprime + 1):
        if degrees == (0,):
            corners, n = complement_cells(region, E, m, delta)
            ranks.append((len(corner_components(corners, n)),))
        else:
            K = complement_complex(region, E, m, delta)
            X = ChainComplexZ.from_complex(K) if len(K) else None
            ranks.append(tuple(X.betti(q) if X else 0 for q in degrees))
    return ranks[0] == ranks[1]


# ---------------------------------------------------------------------------
# Duality rank diagnostics on a boundary sphere
# ---------------------------------------------------------------------------

def _boxes_disjoint(a, b):
    (lo1, hi1), (lo2, hi2) = a, b
    return any(h1 < l2 or h2 < l1
               for l1, h1, l2, h2 in zip(lo1, hi1, lo2, hi2))

def complement_in_complex(ambient: DyadicComplex, X: DyadicComplex):
    """Subcomplex of cells whose closed support misses the support of X."""
    boxes = [c.support() for c in X.cubes]
    keep = [c for c in ambient.cubes
            if all(_boxes_disjoint(c.support(), b) for b in boxes)]
    return DyadicComplex(ambient.m, keep)


def refine_complex(K: DyadicComplex, mprime: int) -> DyadicComplex:
    if mprime < K.m:
        raise ValueError("can only refine to a finer scale")
    shift = 2 ** (mprime - K.m)
    tops = []
    for c in K.top_cells():
        for off in itertools.product(range(shift), repeat=c.k):
            corner = list(v * shift for v in c.corner)
            for a, o in zip(c.axes, off):
                corner[a] += o
            tops.append(DyadicCube(mprime, tuple(corner), c.axes))
    return build_complex(tops)


def _support_covered(ambient: DyadicComplex, X: DyadicComplex) -> bool:
    """Whether |X| lies inside |ambient| (checked by exact area accounting)."""
    for c in X.top_cells():
        lo, hi = c.support()
        vol = 1
        for a in c.axes:
            vol *= hi[a] - lo[a]
        covered = 0
        for t in ambient.top_cells():
            tlo, thi = t.support()
            ok = True
            piece = 1
            for i in range(c.n):
                l = max(lo[i], tlo[i])
                h = min(hi[i], thi[i])
                if l > h:
                    ok = False
                    break
                if i in c.axes:
                    piece *= h - l
            if ok:
                covered += piece
        if covered < vol:
            return False
    return True


def alexander_rank_check(sphere: DyadicComplex, X: DyadicComplex, d: int,
                         check_stability: bool = True):
    """Free-rank comparison between the complement of X in a boundary
    sphere and X itself, plus the rank behaviour of the inclusion of the
    complement of X into the complement of its d-skeleton."""
    if not _support_covered(sphere, X):
        raise ValueError("X is not a subcomplex of the sphere")
    n = len(next(iter(sphere.cubes)).corner)
    Xd = X.skeleton(d)
    comp = complement_in_complex(sphere, X)
    comp_d = complement_in_complex(sphere, Xd)

    CX = ChainComplexZ.from_complex(comp) if len(comp) else None
    XX = ChainComplexZ.from_complex(X) if len(X) else None
    rows = []
    match = True
    for q in range(0, n - 1):
        rc = CX.betti(q) if CX else 0
        if q == 0 and CX:
            rc -= 1
        dual = n - 2 - q
        rx = XX.betti(dual) if XX else 0
        if dual == 0 and XX:
            rx -= 1
        rows.append({"q": q, "complement_rank": rc, "set_rank": rx,
                     "match": rc == rx})
        match = match and rc == rx

    deg = n - d - 1
    CXd = ChainComplexZ.from_complex(comp_d) if len(comp_d) else None
    H_small = homology_group(CX, deg, Z) if CX else None
    H_big = homology_group(CXd, deg, Z) if CXd else None
    r_small = H_small.rank if H_small else 0
    r_big = H_big.rank if H_big else 0
    map_rank = 0
    if H_small and H_big and r_small:
        sb = CXd.solver(deg, 0)
        vecs = []
        for f in H_small.factors:
            for o, g in zip(f.orders, f.generators):
                if o == 0:
                    coords = sb.class_coords(g)
                    vecs.append([coords[i] for i, oo in enumerate(sb.orders)
                                 if oo == 0])
        if vecs:
            M = [[vecs[j][i] for j in range(len(vecs))]
                 for i in range(len(vecs[0]))] if vecs[0] else []
            map_rank = smith_normal_form(M).rank if M else 0
    iso = (r_small == r_big == map_rank) or (r_small == r_big == 0)

    stable = True
    if check_stability:
        fine = refine_complex(sphere, sphere.m + 1)
        comp_f = complement_in_complex(fine, X)
        CF = ChainComplexZ.from_complex(comp_f) if len(comp_f) else None
        for row in rows:
            rc = CF.betti(row["q"]) if CF else 0
            if row["q"] == 0 and CF:
                rc -= 1
            if rc != row["complement_rank"]:
                stable = False
    return {"rows": rows, "match": match,
            "inclusion": {"degree": deg, "rank_small": r_small,
                          "rank_big": r_big, "map_rank": map_rank,
                          "iso": iso},
            "stable": stable,
            "passed": match and iso and stable}
