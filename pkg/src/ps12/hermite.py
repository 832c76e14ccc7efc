"""Hermite subdivision engine: jets, midpoint rules and uniform refinement.

Each macro-triangle ``(A, B, C)`` is refined on its own.  Its jets are kept
in the fixed basis ``e1 = B - A``, ``e2 = C - A``: entry ``(a, b)`` of a jet is
the derivative ``a`` times along ``e1`` and ``b`` times along ``e2``.  At level
``k`` the points are ``A + (i e1 + j e2) / M`` with ``M = 2**k`` and
``i + j <= M``, stored in a dense ``(M+1, M+1, 10)`` grid.

Every edge of the level-k grid belongs to exactly one upright sub-triangle
``(i, j), (i+1, j), (i, j+1)``, so each new midpoint is computed exactly once,
from the corner jets of that sub-triangle.  Its frames are the macro frames
scaled by ``1/M``, which turns the midpoint rule into one constant matrix per
edge direction and level.

Points on a macro edge belong to two macro-triangles and carry two jets.
Values, first and second derivatives agree; the pure third cross-boundary
derivative in general does not.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import sqrt
from typing import NamedTuple

import gmpy2
import numpy as np

from . import rules
from .arith import is_exact
from .bb_core import Point
from .macro_solver import JET_NAMES, JET_ORDERS

mpq = gmpy2.mpq
# float grids are carried in extended precision: the third-derivative rules
# difference O(1) values and rescale by M**3, so storage rounding grows like 8**level
WORK_FLOAT = np.longdouble


class Jet3(NamedTuple):
    """Value and derivatives up to order 3 in an edge frame (t, m)."""

    f: object
    t: object
    m: object
    tt: object
    tm: object
    mm: object
    ttt: object
    ttm: object
    tmm: object
    mmm: object


class CornerJet(NamedTuple):
    """Value and Cartesian partials up to order 3."""

    f: object
    fx: object
    fy: object
    fxx: object
    fxy: object
    fyy: object
    fxxx: object
    fxxy: object
    fxyy: object
    fyyy: object


class MissingDataError(ValueError):
    pass


class NonConformingError(ValueError):
    pass


class SingularFrameError(ValueError):
    pass


JET_INDEX = {name or "f": n for n, name in enumerate(JET_NAMES)}


# ---------------------------------------------------------------------------
# frame changes


def _poly_mul(p, q):
    out = {}
    for (a, b), x in p.items():
        for (c, d), y in q.items():
            out[(a + c, b + d)] = out.get((a + c, b + d), 0) + x * y
    return out


def frame_change(p, q) -> list[list]:
    """10x10 matrix taking a jet in the basis (e1, e2) to the jet in the frame (p, q).

    ``p`` and ``q`` are given by their coordinates in (e1, e2).  Row ``(a, b)``
    expands ``(p1 d1 + p2 d2)^a (q1 d1 + q2 d2)^b``.
    """
    lin_p = {(1, 0): p[0], (0, 1): p[1]}
    lin_q = {(1, 0): q[0], (0, 1): q[1]}
    col = {o: n for n, o in enumerate(JET_ORDERS)}
    M = []
    for a, b in JET_ORDERS:
        poly = {(0, 0): 1}
        for _ in range(a):
            poly = _poly_mul(poly, lin_p)
        for _ in range(b):
            poly = _poly_mul(poly, lin_q)
        row = [0] * 10
        for o, x in poly.items():
            row[col[o]] = x
        M.append(row)
    return M


def _matvec(M, v):
    return [sum(x * y for x, y in zip(row, v) if x) for row in M]


def _inverse(M):
    """Exact inverse of a small matrix of rationals (Gauss-Jordan)."""
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(int(i == k)) for k in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c]:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


def cartesian_to_frame(j, frame) -> Jet3:
    """Jet in the frame ``(t, m)`` of a Cartesian corner jet.

    ``frame`` is an :class:`~ps12.splits.EdgeFrame` or a pair of vectors.
    """
    t, m = (frame.t, frame.m) if hasattr(frame, "t") else frame
    return Jet3(*_matvec(frame_change(t, m), list(j)))


def frame_to_cartesian(j, frame) -> CornerJet:
    t, m = (frame.t, frame.m) if hasattr(frame, "t") else frame
    if t[0] * m[1] - t[1] * m[0] == 0:
        raise SingularFrameError("frame vectors are parallel")
    M = frame_change(t, m)
    if all(is_exact(x) for row in M for x in row):
        return CornerJet(*_matvec(_inverse(M), list(j)))
    return CornerJet(*np.linalg.solve(np.array(M, dtype=float), np.array(j, dtype=float)))


def rescale_jet(j, s_t, s_m) -> Jet3:
    """Entry ``f^{t^a m^b}`` multiplied by ``s_t**a * s_m**b``."""
    return Jet3(*(x * s_t**a * s_m**b for x, (a, b) in zip(j, JET_ORDERS)))


# ---------------------------------------------------------------------------
# midpoint rules on jets given in the frame of the edge AB


def _rule_matrix(table: dict, inputs, outputs):
    pos = {name: n for n, name in enumerate(inputs)}
    M = [[Fraction(0)] * len(inputs) for _ in outputs]
    for r, out in enumerate(outputs):
        for name, w in table[out].items():
            M[r][pos[name]] = Fraction(w)
    return M


@lru_cache(maxsize=None)
def init_matrix():
    """10 x 39 matrix of the initialization step; the f^m row passes f^m_AB through."""
    outs = ["f_AB" if not n else f"f^{n}_AB" for n in JET_NAMES]
    table = dict(rules.INIT_RULES)
    table["f^m_AB"] = {"f^m_AB": "1"}
    return _rule_matrix(table, rules.INIT_INPUTS, outs)


@lru_cache(maxsize=None)
def subdiv_matrix():
    outs = ["f_AB" if not n else f"f^{n}_AB" for n in JET_NAMES]
    return _rule_matrix(rules.SUBDIV_RULES, rules.SUBDIV_INPUTS, outs)


def init_midpoint(jetA, jetB, edge_data, others=None) -> Jet3:
    """Jet at the midpoint of AB from the initialization rules.

    ``edge_data`` holds ``(f^m_AB, f^mm_AAB, f^mm_ABB)``.  ``others`` is
    ``(jetC, edge_BC, edge_CA)`` with the edge triples ordered as in
    :data:`ps12.rules.INIT_INPUTS`; the third cross-boundary derivative
    needs them.  All corner jets are in the frame of AB.
    """
    if others is None:
        raise MissingDataError("the f^mmm rule needs corner C and the other two edges")
    jetC, bc, ca = others
    v = list(jetA) + list(jetB) + list(jetC) + list(edge_data) + list(bc) + list(ca)
    if len(v) != 39:
        raise MissingDataError(f"expected 39 inputs, got {len(v)}")
    return Jet3(*_matvec(init_matrix(), v))


def subdivide_midpoint(jetA, jetB, jetC) -> Jet3:
    """Jet at the midpoint of AB from the subdivision rules (all jets in the frame of AB)."""
    return Jet3(*_matvec(subdiv_matrix(), list(jetA) + list(jetB) + list(jetC)))


def surface_normal(j, frame=None) -> tuple:
    """Unit normal of the graph ``(x, y, f(x, y))``.

    ``j`` is a :class:`CornerJet` (``frame=None``) or a :class:`Jet3` in the
    frame ``(t, m)``.
    """
    if frame is None:
        gx, gy = j[1], j[2]
    else:
        t, m = (frame.t, frame.m) if hasattr(frame, "t") else frame
        det = t[0] * m[1] - t[1] * m[0]
        if det == 0:
            raise SingularFrameError("frame vectors are parallel")
        # [t; m] g = (f^t, f^m)
        gx = (j[1] * m[1] - j[2] * t[1]) / det
        gy = (t[0] * j[2] - m[0] * j[1]) / det
    gx, gy = float(gx), float(gy)
    n = sqrt(gx * gx + gy * gy + 1.0)
    return (-gx / n, -gy / n, 1.0 / n)


# ---------------------------------------------------------------------------
# per-edge frames of a macro-triangle in the basis (e1, e2) = (B - A, C - A)

_HALF = Fraction(1, 2)
FRAMES = {
    0: ((-1, 1), (_HALF, _HALF)),  # edge BC
    1: ((0, -1), (-1, _HALF)),  # edge CA
    2: ((1, 0), (_HALF, -1)),  # edge AB
}
# corner order (Y, Z, X) of the rule inputs A, B, C for the edge opposite X
ROLES = {0: (1, 2, 0), 1: (2, 0, 1), 2: (0, 1, 2)}


def _scale_diag(s):
    return [s ** (a + b) for a, b in JET_ORDERS]


@lru_cache(maxsize=None)
def _frame_mats(X):
    t, m = FRAMES[X]
    M = frame_change(t, m)
    return M, _inverse(M)


def _compose(X, s, R, extra=0):
    """Minv . S(1/s) . R . blockdiag(S(s) M, S(s) M, S(s) M, I_extra) as Fractions."""
    M, Minv = _frame_mats(X)
    d = _scale_diag(s)
    SM = [[d[r] * M[r][c] for c in range(10)] for r in range(10)]
    n_in = 30 + extra
    B = [[Fraction(0)] * n_in for _ in range(10)]
    # R . blockdiag
    RB = []
    for row in R:
        out = [Fraction(0)] * n_in
        for blk in range(3):
            for r in range(10):
                w = row[10 * blk + r]
                if w:
                    for c in range(10):
                        if SM[r][c]:
                            out[10 * blk + c] += w * SM[r][c]
        for k in range(extra):
            out[30 + k] = row[30 + k]
        RB.append(out)
    dinv = [1 / x for x in d]
    for r in range(10):
        for k in range(10):
            w = Minv[r][k] * dinv[k]
            if w:
                for c in range(n_in):
                    B[r][c] += w * RB[k][c]
    return B


@lru_cache(maxsize=None)
def composite_subdiv(X: int, s: Fraction):
    """10 x 30 map from the (e1, e2)-jets at (Y, Z, X) to the jet at the midpoint of YZ.

    ``s`` is the scale of the sub-triangle relative to the macro-triangle.
    """
    return _compose(X, s, subdiv_matrix())


@lru_cache(maxsize=None)
def composite_init(X: int):
    return _compose(X, Fraction(1), init_matrix(), extra=9)


@lru_cache(maxsize=None)
def _as_float(key):
    kind, X, s = key
    W = composite_init(X) if kind == "init" else composite_subdiv(X, s)
    return np.array([[_ext(x) for x in row] for row in W], dtype=WORK_FLOAT)


def _ext(x):
    x = Fraction(x)
    return WORK_FLOAT(str(x.numerator)) / WORK_FLOAT(str(x.denominator))


@lru_cache(maxsize=None)
def _as_mpq(key):
    kind, X, s = key
    W = composite_init(X) if kind == "init" else composite_subdiv(X, s)
    return np.array([[mpq(x.numerator, x.denominator) for x in row] for row in W], dtype=object)


def _matrix(kind, X, s, exact):
    key = (kind, X, s)
    return _as_mpq(key) if exact else _as_float(key)


# ---------------------------------------------------------------------------
# refinement


@dataclass
class MacroJets:
    """Jets of one macro-triangle at one level."""

    triangle: tuple  # (A, B, C) points
    ids: tuple  # global vertex ids of A, B, C
    size: int  # M = 2**level
    grid: np.ndarray  # (M+1, M+1, 10), entry [i, j] at A + (i e1 + j e2)/M
    edge_data: np.ndarray | None = None  # (3, 3) medial data, level 0 only

    def point(self, i, j):
        A, B, C = self.triangle
        M = self.size
        if isinstance(A.x, Fraction):
            u, w = Fraction(i, M), Fraction(j, M)
        else:
            u, w = i / M, j / M
        return Point(A.x + u * (B.x - A.x) + w * (C.x - A.x), A.y + u * (B.y - A.y) + w * (C.y - A.y))

    def indices(self):
        M = self.size
        for i in range(M + 1):
            for j in range(M + 1 - i):
                yield i, j


@dataclass
class RefinementLevel:
    """Jets of every macro-triangle after ``level`` refinement steps."""

    level: int
    exact: bool
    macros: list

    @property
    def size(self) -> int:
        return 2**self.level

    def num_triangles(self) -> int:
        return len(self.macros) * 4**self.level

    def _basis(self, m):
        A, B, C = self.macros[m].triangle
        return (B.x - A.x, B.y - A.y), (C.x - A.x, C.y - A.y)

    def _value(self, x):
        if self.exact:
            return Fraction(int(x.numerator), int(x.denominator))
        return float(x)

    def jet(self, m, i, j) -> tuple:
        """Raw jet in the macro basis (e1, e2)."""
        return tuple(self._value(x) for x in self.macros[m].grid[i, j])

    def cartesian_jet(self, m, i, j) -> CornerJet:
        return CornerJet(*_matvec(self._to_cartesian(m), list(self.jet(m, i, j))))

    def frame_jet(self, m, i, j, frame) -> Jet3:
        t, mm = (frame.t, frame.m) if hasattr(frame, "t") else frame
        return Jet3(*_matvec(frame_change(t, mm), list(self.cartesian_jet(m, i, j))))

    def _to_cartesian(self, m):
        cache = self.__dict__.setdefault("_cart", {})
        if m not in cache:
            E = frame_change(*self._basis(m))
            if self.exact:
                cache[m] = _inverse(E)
            else:
                cache[m] = np.linalg.inv(np.array(E, dtype=float)).tolist()
        return cache[m]

    def points(self):
        """(macro, i, j, point) for every stored jet."""
        for m, mj in enumerate(self.macros):
            for i, j in mj.indices():
                yield m, i, j, mj.point(i, j)

    def key(self, m, i, j) -> tuple:
        """Topological identity of a point, shared between macro-triangles."""
        mj = self.macros[m]
        M = self.size
        w = (M - i - j, i, j)
        return tuple(sorted((g, x) for g, x in zip(mj.ids, w) if x))


def level_from_data(triangles, ids, corner_jets, edge_data, exact: bool) -> RefinementLevel:
    """Level 0 from Cartesian corner jets and medial edge data per macro-triangle.

    ``corner_jets[t]`` holds three :class:`CornerJet` values (corners A, B, C)
    and ``edge_data[t][X]`` the triple ``(f^m mid, f^mm near Y, f^mm near Z)``
    of the edge opposite corner X, with ``(X, Y, Z)`` in cyclic order.
    """
    macros = []
    for tri, gid, jets, edata in zip(triangles, ids, corner_jets, edge_data):
        A, B, C = tri
        E = frame_change((B.x - A.x, B.y - A.y), (C.x - A.x, C.y - A.y))
        grid = np.zeros((2, 2, 10), dtype=object if exact else WORK_FLOAT)
        conv = (lambda x: mpq(Fraction(x).numerator, Fraction(x).denominator)) if exact else _ext
        for (i, j), jet in zip(((0, 0), (1, 0), (0, 1)), jets):
            grid[i, j] = [conv(x) for x in _matvec(E, list(jet))]
        ed = np.array([[conv(x) for x in row] for row in edata], dtype=object if exact else WORK_FLOAT)
        macros.append(MacroJets(tuple(tri), tuple(gid), 1, grid, ed))
    return RefinementLevel(0, exact, macros)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PS12_THREADS", "1")))
    except ValueError:
        return 1


def _refine_macro(mj: MacroJets, exact: bool, first: bool) -> MacroJets:
    M = mj.size
    G = mj.grid
    N = 2 * M
    out = np.zeros((N + 1, N + 1, 10), dtype=G.dtype)
    ii, jj = np.array([(i, j) for i in range(M + 1) for j in range(M + 1 - i)]).T
    out[2 * ii, 2 * jj] = G[ii, jj]
    # upright sub-triangles (i, j), (i+1, j), (i, j+1)
    ui, uj = np.array([(i, j) for i in range(M) for j in range(M - i)]).T
    corners = (G[ui, uj], G[ui + 1, uj], G[ui, uj + 1])
    targets = {2: (2 * ui + 1, 2 * uj), 0: (2 * ui + 1, 2 * uj + 1), 1: (2 * ui, 2 * uj + 1)}
    s = Fraction(1, M)
    for X, (ti, tj) in targets.items():
        Y, Z, XX = ROLES[X]
        inp = np.concatenate([corners[Y], corners[Z], corners[XX]], axis=1)
        if first:
            ed = mj.edge_data
            extra = np.concatenate([ed[X], ed[Y], ed[Z]])
            inp = np.concatenate([inp, np.tile(extra, (inp.shape[0], 1))], axis=1)
            W = _matrix("init", X, None, exact)
        else:
            W = _matrix("subdiv", X, s, exact)
        out[ti, tj] = inp @ W.T
    return MacroJets(mj.triangle, mj.ids, N, out)


def refine(level: RefinementLevel, check: bool = False) -> RefinementLevel:
    """One refinement step; level 0 uses the initialization rules.

    With ``check=True`` the two-sided values, first and second derivatives at
    points on macro edges are compared first and :class:`NonConformingError`
    is raised on a mismatch.
    """
    if check:
        bad = two_sided_mismatches(level, max_order=2)
        if bad:
            raise NonConformingError(f"{len(bad)} points on macro edges disagree, e.g. {bad[0]}")
    first = level.level == 0
    if first and any(mj.edge_data is None for mj in level.macros):
        raise MissingDataError("level 0 needs edge data")
    n = _threads()
    if n > 1 and len(level.macros) > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            macros = list(pool.map(lambda mj: _refine_macro(mj, level.exact, first), level.macros))
    else:
        macros = [_refine_macro(mj, level.exact, first) for mj in level.macros]
    return RefinementLevel(level.level + 1, level.exact, macros)


def refine_levels(level: RefinementLevel, k: int) -> RefinementLevel:
    for _ in range(k):
        level = refine(level)
    return level


# ---------------------------------------------------------------------------
# two-sided checks


def shared_points(level: RefinementLevel) -> dict:
    """Map point key -> list of (macro, i, j) for points stored by several macros."""
    seen = {}
    for m, i, j, _ in level.points():
        seen.setdefault(level.key(m, i, j), []).append((m, i, j))
    return {k: v for k, v in seen.items() if len(v) > 1}


def _close(a, b, exact, rel=1e-9):
    if exact:
        return a == b
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


def two_sided_mismatches(level: RefinementLevel, max_order: int = 2) -> list:
    """Points where Cartesian derivatives up to ``max_order`` differ between macros."""
    count = {0: 1, 1: 3, 2: 6, 3: 10}[max_order]
    bad = []
    for key, owners in shared_points(level).items():
        jets = [level.cartesian_jet(*o) for o in owners]
        for other in jets[1:]:
            if not all(_close(a, b, level.exact) for a, b in zip(jets[0][:count], other[:count])):
                bad.append(key)
                break
    return bad


def edge_jump(level: RefinementLevel, m1: int, m2: int, frame) -> dict:
    """Two-sided differences of the frame jets at points shared by two macros."""
    out = {}
    for key, owners in shared_points(level).items():
        a = [o for o in owners if o[0] == m1]
        b = [o for o in owners if o[0] == m2]
        if a and b:
            ja = level.frame_jet(*a[0], frame)
            jb = level.frame_jet(*b[0], frame)
            out[key] = Jet3(*(x - y for x, y in zip(ja, jb)))
    return out


def _grid_midpoint(G, M, P, Q, R):
    """Jet at the midpoint of PQ from the sub-triangle (P, Q, R), all grid indices.

    Frames are expressed in the macro basis (e1, e2), so the result is a
    macro-basis jet comparable with the stored ones.
    """
    s = Fraction(1, M)
    t = ((Q[0] - P[0]) * s, (Q[1] - P[1]) * s)
    m = ((Fraction(P[0] + Q[0], 2) - R[0]) * s, (Fraction(P[1] + Q[1], 2) - R[1]) * s)
    F = frame_change(t, m)
    jets = [_matvec(F, [_frac(x) for x in G[p]]) for p in (P, Q, R)]
    out = subdivide_midpoint(*jets)
    return _matvec(_inverse(F), list(out))


def _frac(x):
    if isinstance(x, Fraction) or isinstance(x, int):
        return Fraction(x)
    if type(x).__name__ == "mpq":
        return Fraction(int(x.numerator), int(x.denominator))
    return float(x)


def interior_edge_mismatches(level: RefinementLevel) -> list:
    """Edges inside a macro-triangle whose midpoint jets differ between the two sides.

    Every interior edge of the level grid is shared by an upright and an
    inverted sub-triangle; the subdivision rule is applied from both and all
    10 entries compared.  In float mode a relative tolerance is used.
    """
    bad = []
    for mi, mj in enumerate(level.macros):
        M, G = mj.size, mj.grid
        for i in range(M):
            for j in range(M - 1 - i):
                a, b, c = (i + 1, j), (i + 1, j + 1), (i, j + 1)  # inverted triangle
                pairs = (
                    ((a, b, c), (a, b, (i + 2, j))),
                    ((b, c, a), (c, b, (i, j + 2))),
                    ((c, a, b), (a, c, (i, j))),
                )
                for (P, Q, R), (P2, Q2, R2) in pairs:
                    one = _grid_midpoint(G, M, P, Q, R)
                    two = _grid_midpoint(G, M, P2, Q2, R2)
                    if not all(_close(x, y, level.exact) for x, y in zip(one, two)):
                        bad.append((mi, P, Q))
    return bad
