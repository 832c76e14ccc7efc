"""Nodal macro-elements on the 12- and 6-split and the rules derived from them.

The C^3 quintic spline on a split triangle is represented by its 21
B-coefficients per face.  Unknown ``face*21 + n`` is coefficient ``n`` (in
:func:`ps12.bb_core.multi_indices` order) of face ``face``.

Equations are assembled with the nodal rows first, in the order of the
functional list, followed by the smoothness rows ordered by (interior edge,
order, edge index).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import exact
from .arith import div, is_exact
from .bb_core import (
    BezierPatch,
    Point,
    Triangle,
    eval_derivative,
    functional_weights,
    index_map,
    num_coeffs,
)
from .smoothness import cr_rows
from .splits import (
    Ps6Split,
    Ps12Split,
    corner_roles,
    edge_points,
    face_containing,
    ps6_split,
    ps12_split,
    tangent_medial,
)

DEGREE = 5
SMOOTHNESS = 3
NC = num_coeffs(DEGREE)

# (a, b): a derivatives along the first frame vector, b along the second
JET_ORDERS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3))
JET_NAMES = ("", "t", "m", "tt", "tm", "mm", "ttt", "ttm", "tmm", "mmm")
CARTESIAN_NAMES = ("", "x", "y", "xx", "xy", "yy", "xxx", "xxy", "xyy", "yyy")
ROLE = "ABC"


def fname(suffix: str, where: str) -> str:
    return f"f_{where}" if not suffix else f"f^{suffix}_{where}"


@dataclass(frozen=True)
class NodalFunctional:
    kind: str  # "corner", "midpoint" or "quarterpoint"
    carrier: Point
    directions: tuple
    label: str


def _corner_functionals(split, basis, names):
    u, w = basis
    out = []
    for c in range(3):
        where = ROLE[c] if names is JET_NAMES else f"v{c + 1}"
        for (a, b), suffix in zip(JET_ORDERS, names):
            out.append(NodalFunctional("corner", split.vertices[c], (u,) * a + (w,) * b,
                                       fname(suffix, where)))
    return out


# edges in the order AB, BC, CA, each named by its opposite corner
EDGE_CORNERS = (2, 0, 1)


def _edge_labels(X):
    _, Y, Z = corner_roles(X)
    Yn, Zn = ROLE[Y], ROLE[Z]
    if X == 2:
        return f"f^m_{Yn}{Zn}", f"f^mm_{Yn}{Yn}{Zn}", f"f^mm_{Yn}{Zn}{Zn}"
    m = "m" + ROLE[X]
    return f"f^{m}_{Yn}{Zn}", f"f^{m}{m}_{Yn}{Yn}{Zn}", f"f^{m}{m}_{Yn}{Zn}{Zn}"


def _edge_functionals(split):
    T = split.parent
    out = []
    for X in EDGE_CORNERS:
        _, Y, Z = corner_roles(X)
        _, m = tangent_medial(T, X)
        pts = edge_points(T[Y], T[Z])
        l_mid, l_q1, l_q2 = _edge_labels(X)
        out.append(NodalFunctional("midpoint", pts.midpoint, (m,), l_mid))
        out.append(NodalFunctional("quarterpoint", pts.quarter_near_Y, (m, m), l_q1))
        out.append(NodalFunctional("quarterpoint", pts.quarter_near_Z, (m, m), l_q2))
    return out


def _cartesian_basis(split):
    one = Fraction(1) if is_exact(split.parent.v1.x) else 1.0
    zero = one - one
    return Point(one, zero), Point(zero, one)


def lambda12(split: Ps12Split, corner_basis=None) -> list[NodalFunctional]:
    """The 39 functionals: corner 3-jets, midpoint and quarterpoint medial derivatives.

    ``corner_basis=None`` uses Cartesian partials (labels ``f^xy_v1`` ...);
    otherwise the corner derivatives are taken along the given two vectors and
    labelled in the (t, m) naming of the rule tables.
    """
    if corner_basis is None:
        corners = _corner_functionals(split, _cartesian_basis(split), CARTESIAN_NAMES)
    else:
        corners = _corner_functionals(split, corner_basis, JET_NAMES)
    return corners + _edge_functionals(split)


def lambda6(split: Ps6Split, corner_basis=None) -> list[NodalFunctional]:
    if corner_basis is None:
        return _corner_functionals(split, _cartesian_basis(split), CARTESIAN_NAMES)
    return _corner_functionals(split, corner_basis, JET_NAMES)


@dataclass(frozen=True)
class SplineOnSplit:
    split: object
    patches: tuple

    @property
    def coefficients(self):
        return [c for p in self.patches for c in p.coeffs]

    def face_of(self, p) -> int:
        return face_containing(self.split, p)

    def derivative(self, p, dirs=(), face=None):
        if face is None:
            face = self.face_of(p)
        return eval_derivative(self.patches[face], p, dirs)

    def __call__(self, p):
        return self.derivative(p)


SplineOn12Split = SplineOnSplit
SplineOn6Split = SplineOnSplit


def apply_functional(lam: NodalFunctional, s: SplineOnSplit, face=None):
    return s.derivative(lam.carrier, lam.directions, face)


def functional_row(split, lam: NodalFunctional, face=None) -> dict:
    """Sparse row ``{unknown: weight}`` of the functional on the split's spline space."""
    if face is None:
        face = face_containing(split, lam.carrier)
    w = functional_weights(DEGREE, split.face_triangle(face), lam.carrier, lam.directions)
    return {face * NC + n: x for n, x in enumerate(w) if x != 0}


def smoothness_rows(split, r: int = SMOOTHNESS, d: int = DEGREE) -> list[dict]:
    pos = index_map(d)
    nc = num_coeffs(d)
    rows = []
    for a, b, f1, f2 in split.interior_edges:
        for row in cr_rows(split.face_triangle(f1), split.face_triangle(f2), r, d, (f1, f2)):
            rows.append({s.face * nc + pos[s.idx]: w for s, w in row.terms})
    return rows


def assemble(split, functionals) -> list[dict]:
    """All rows of the macro-element system: nodal rows first, then smoothness rows."""
    return [functional_row(split, lam) for lam in functionals] + smoothness_rows(split)


def system_shape(split, functionals) -> tuple[int, int]:
    return len(functionals) + len(smoothness_rows(split)), len(split.faces) * NC


def _spline_from_vector(split, x) -> SplineOnSplit:
    tris = split.face_triangles()
    return SplineOnSplit(
        split, tuple(BezierPatch(DEGREE, tris[f], tuple(x[f * NC:(f + 1) * NC]))
                     for f in range(len(tris)))
    )


@lru_cache(maxsize=32)
def nodal_basis(split, corner_basis=None) -> tuple:
    """Exact coefficient vectors of the nodal basis (unknowns x functionals).

    Column ``i`` holds the spline whose i-th functional is 1 and the others 0.
    """
    lams = lambda12(split, corner_basis) if isinstance(split, Ps12Split) else lambda6(split, corner_basis)
    rows = assemble(split, lams)
    rhs = [{i: 1} for i in range(len(lams))] + [{}] * (len(rows) - len(lams))
    X = exact.solve(rows, rhs, len(split.faces) * NC, len(lams))
    return tuple(tuple(r) for r in X)


@dataclass(frozen=True)
class MacroElementData:
    """Nodal data of one macro-triangle.

    ``corner_jets[c]`` holds the 10 Cartesian partials at corner c in the order
    f, fx, fy, fxx, fxy, fyy, fxxx, fxxy, fxyy, fyyy.  ``edge_data`` holds, for
    the edges AB, BC, CA, the medial derivative at the midpoint and the second
    medial derivatives at the quarterpoints nearer the first and the second
    endpoint.
    """

    corner_jets: tuple
    edge_data: tuple = ((0, 0, 0), (0, 0, 0), (0, 0, 0))

    def as_vector(self) -> list:
        v = [x for jet in self.corner_jets for x in jet]
        return v + [x for e in self.edge_data for x in e]

    @classmethod
    def from_vector(cls, v) -> "MacroElementData":
        v = list(v)
        corners = tuple(tuple(v[10 * c:10 * c + 10]) for c in range(3))
        if len(v) == 30:
            return cls(corners)
        edges = tuple(tuple(v[30 + 3 * e:33 + 3 * e]) for e in range(3))
        return cls(corners, edges)


def _solve(split, lams, values, exact_mode: bool) -> SplineOnSplit:
    rows = assemble(split, lams)
    n = len(split.faces) * NC
    if exact_mode:
        rhs = [{0: Fraction(v)} for v in values] + [{}] * (len(rows) - len(lams))
        X = exact.solve(rows, rhs, n, 1)
        return _spline_from_vector(split, [r[0] for r in X])
    # float path: least squares on the dense system, not an oracle
    A = np.zeros((len(rows), n))
    for i, row in enumerate(rows):
        for c, w in row.items():
            A[i, c] = float(w)
    b = np.zeros(len(rows))
    b[:len(lams)] = [float(v) for v in values]
    x, _, rk, _ = np.linalg.lstsq(A, b, rcond=None)
    if rk < n:
        raise exact.RankDeficientError(f"rank {rk} < {n} unknowns")
    return _spline_from_vector(split, list(x))


def solve12(split: Ps12Split, data: MacroElementData, exact_mode: bool = True) -> SplineOnSplit:
    """Spline in the 12-split macro-element space with the given nodal data."""
    return _solve(split, lambda12(split), data.as_vector(), exact_mode)


def solve6(split: Ps6Split, corner_jets, exact_mode: bool = True) -> SplineOnSplit:
    values = [x for jet in corner_jets for x in jet]
    return _solve(split, lambda6(split), values, exact_mode)


def spline_from_basis(split, values, corner_basis=None) -> SplineOnSplit:
    """Exact spline for data ``values`` combined from the cached nodal basis."""
    B = nodal_basis(split, corner_basis)
    vals = [Fraction(v) for v in values]
    x = [sum((b * v for b, v in zip(row, vals) if b and v), Fraction(0)) for row in B]
    return _spline_from_vector(split, x)


def smoothness_nullity(split, d: int = DEGREE, r: int = SMOOTHNESS) -> int:
    """Dimension of the space of C^r piecewise degree-d polynomials on the split."""
    split.parent.check()
    pos = index_map(d)
    nc = num_coeffs(d)
    rows = []
    for a, b, f1, f2 in split.interior_edges:
        for row in cr_rows(split.face_triangle(f1), split.face_triangle(f2), r, d, (f1, f2)):
            rows.append({s.face * nc + pos[s.idx]: w for s, w in row.terms})
    n = len(split.faces) * nc
    return n - exact.rank(rows, n)


# ---------------------------------------------------------------------------
# rule tables


@dataclass
class RuleTable:
    """Midpoint rules: each output functional as a rational combination of inputs."""

    element: str
    inputs: list
    rules: dict = field(default_factory=dict)  # output -> {input: Fraction}

    def to_json(self) -> dict:
        return {
            "element": self.element,
            "inputs": list(self.inputs),
            "rules": [
                {
                    "output_functional": out,
                    "terms": [[name, w.numerator, w.denominator] for name, w in terms.items()],
                }
                for out, terms in self.rules.items()
            ],
        }

    @classmethod
    def from_json(cls, doc) -> "RuleTable":
        rules = {
            r["output_functional"]: {name: Fraction(p, q) for name, p, q in r["terms"]}
            for r in doc["rules"]
        }
        return cls(doc["element"], list(doc["inputs"]), rules)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    def matrix(self, outputs=None) -> list[list[Fraction]]:
        outputs = outputs or list(self.rules)
        return [[self.rules[o].get(i, Fraction(0)) for i in self.inputs] for o in outputs]


def _reference_triangle():
    return Triangle.of((0, 0), (1, 0), (0, 1))


def _derive(split, outputs) -> RuleTable:
    T = split.parent
    t, m = tangent_medial(T, 2)
    if isinstance(split, Ps12Split):
        lams = lambda12(split, (t, m))
        element = "ps12"
    else:
        lams = lambda6(split, (t, m))
        element = "ps6"
    B = nodal_basis(split, (t, m))
    carrier = split.vertices[3]  # midpoint of AB
    face = face_containing(split, carrier)
    table = RuleTable(element, [lam.label for lam in lams])
    for suffix in outputs:
        a, b = JET_ORDERS[JET_NAMES.index(suffix)]
        out = NodalFunctional("output", carrier, (t,) * a + (m,) * b, fname(suffix, "AB"))
        row = functional_row(split, out, face)
        weights = {}
        for i, lam in enumerate(lams):
            w = sum((x * B[c][i] for c, x in row.items()), Fraction(0))
            if w:
                weights[lam.label] = w
        table.rules[out.label] = weights
    return table


INIT_OUTPUTS = ("", "t", "tt", "tm", "mm", "ttt", "ttm", "tmm", "mmm")
SUBDIV_OUTPUTS = ("", "t", "m", "tt", "tm", "mm", "ttt", "ttm", "tmm", "mmm")


def derive_init_rules(split: Ps12Split | None = None) -> RuleTable:
    """Initialization rules at the midpoint of AB, from the 39 nodal data.

    Corner data are taken in the frame (t, m) of edge AB.
    """
    return _derive(split or ps12_split(_reference_triangle()), INIT_OUTPUTS)


def derive_subdiv_rules(split: Ps6Split | None = None) -> RuleTable:
    """Subdivision rules at the midpoint of AB, from the 30 corner data."""
    return _derive(split or ps6_split(_reference_triangle()), SUBDIV_OUTPUTS)


def on_edge_inputs(table: RuleTable) -> set:
    """Input functionals carried by the closed edge AB."""
    return {n for n in table.inputs if n.endswith(("_A", "_B", "_AB", "_AAB", "_ABB"))}


# ---------------------------------------------------------------------------
# checks on the proof of unisolvence


class ChaseResult(NamedTuple):
    dimension: int  # dimension of the relaxed space
    values: dict  # coefficient name -> value per unit c1
    pivot: Fraction  # reference-side part of the final C^3 stencil, per unit c1
    ctilde: Fraction  # the neighbouring-side coefficient c46 of that stencil, per unit c1
    ok: bool


# chase coefficients as multi-indices on <v7, v10, v6>, the stencil of the final step
_CHASE_SLOTS = {
    "c36": (3, 2, 0), "c50": (2, 3, 0), "c35": (2, 2, 1), "c59": (1, 4, 0), "c49": (1, 3, 1),
    "c34": (1, 2, 2), "c64": (0, 5, 0), "c58": (0, 4, 1), "c1": (0, 3, 2),
}
_CHASE_EXPECTED = {
    "c1": 1, "c2": 1, "c3": 1, "c34": Fraction(3, 4), "c35": Fraction(9, 8), "c36": Fraction(9, 8),
    "c49": Fraction(3, 2), "c50": Fraction(3, 2), "c58": Fraction(5, 3), "c59": Fraction(5, 3),
    "c64": Fraction(5, 3),
}


def _known_slots(split):
    """Unknowns fixed by the nodal data: disks D3 of the corners and two layers along each edge."""
    from .bb_core import cross, multi_indices

    T = split.parent
    out = []
    for f in range(len(split.faces)):
        tri = split.face_triangle(f)
        for n, idx in enumerate(multi_indices(DEGREE)):
            layer = min(
                DEGREE - sum(idx[k] for k in range(3) if cross(T[b] - T[a], tri[k] - T[a]) == 0)
                for a, b in ((0, 1), (1, 2), (2, 0))
            )
            corner = min([DEGREE - idx[k] for k in range(3) if tri[k] in T] or [DEGREE + 1])
            if layer <= 2 or corner <= 3:
                out.append(f * NC + n)
    return out


def _domain_point(tri, idx):
    return Point(sum(div(idx[k], DEGREE) * tri[k].x for k in range(3)),
                 sum(div(idx[k], DEGREE) * tri[k].y for k in range(3)))


def coefficient_chase(split: Ps12Split | None = None) -> ChaseResult:
    """Re-run the coefficient chase that proves unisolvence of the 39 functionals.

    The relaxed space has zero nodal data, the coefficients fixed by that data
    set to zero, and all smoothness conditions except those of order 3 across
    the six edges at the barycenter.  On it the proof's relations are checked:
    ``c1 = c2 = c3``, ``c58 = c1 + (c2 + c3)/3``, ``c64 = 5/9 (c1 + c2 + c3)``
    and the chain values entering the final order-3 stencil across
    ``<v6, v10>``, whose reference-side part sums to ``18/16 c1``.
    """
    split = split or ps12_split(_reference_triangle())
    v = split.vertices
    pos = index_map(DEGREE)
    rows = [functional_row(split, lam) for lam in lambda12(split)]
    rows += [{c: 1} for c in _known_slots(split)]
    for a, b, f1, f2 in split.interior_edges:
        for row in cr_rows(split.face_triangle(f1), split.face_triangle(f2), 3, DEGREE, (f1, f2)):
            if row.order == 3 and 9 in (a, b):
                continue
            rows.append({s.face * NC + pos[s.idx]: w for s, w in row.terms})
    null = exact.nullspace(rows, len(split.faces) * NC)
    if len(null) != 1:
        return ChaseResult(len(null), {}, Fraction(0), Fraction(0), False)
    x = null[0]

    tri = Triangle(v[6], v[9], v[5])
    trit = Triangle(v[8], v[5], v[9])
    slot = {name: _domain_slot(split, _domain_point(tri, idx)) for name, idx in _CHASE_SLOTS.items()}
    slot["c2"] = _domain_slot(split, _lin(v[3], v[9], 2, 3))
    slot["c3"] = _domain_slot(split, _lin(v[4], v[9], 2, 3))
    c1 = x[slot["c1"]]
    if c1 == 0:
        return ChaseResult(1, {}, Fraction(0), Fraction(0), False)
    values = {name: x[c] / c1 for name, c in slot.items()}

    fa, fb = face_containing(split, _centroid(tri)), face_containing(split, _centroid(trit))
    final = [r for r in cr_rows(tri, trit, 3, DEGREE, (fa, fb)) if r.order == 3][0]
    pivot = Fraction(0)
    ctilde = Fraction(0)
    for s, w in final.terms:
        if s.face == fb:
            ctilde = x[_domain_slot(split, _domain_point(trit, s.idx))] / c1
        else:
            pivot += w * x[_domain_slot(split, _domain_point(tri, s.idx))] / c1
    ok = (
        all(values[k] == e for k, e in _CHASE_EXPECTED.items())
        and values["c58"] == values["c1"] + (values["c2"] + values["c3"]) / 3
        and values["c64"] == Fraction(5, 9) * (values["c1"] + values["c2"] + values["c3"])
        and pivot == Fraction(18, 16)
    )
    return ChaseResult(1, values, pivot, ctilde, ok)


def coefficient_chase_check(split: Ps12Split | None = None) -> bool:
    return coefficient_chase(split).ok


def _domain_slot(split, point, d=DEGREE):
    """Unknown index of the B-coefficient at ``point`` (first face containing it)."""
    from .bb_core import to_barycentric

    for f in range(len(split.faces)):
        b = to_barycentric(point, split.face_triangle(f))
        if all(x >= 0 for x in b):
            idx = tuple(int(x * d) for x in b)
            return f * NC + index_map(d)[idx]
    raise ValueError("domain point outside split")


def _lin(p, q, wp, wq):
    return Point(div(wp * p.x + wq * q.x, 5), div(wp * p.y + wq * q.y, 5))


def _centroid(T):
    return Point(div(T[0].x + T[1].x + T[2].x, 3), div(T[0].y + T[1].y + T[2].y, 3))
