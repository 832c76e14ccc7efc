"""C^r smoothness conditions between B-form patches on adjacent triangles.

Rows are normalised so that the coefficient on the neighbouring triangle
(the ``c~`` slot) carries weight -1 and the remaining terms sit on the
reference triangle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import NamedTuple, Sequence

from .arith import is_exact
from .bb_core import (
    BezierPatch,
    Point,
    Triangle,
    eval_derivative,
    index_map,
    to_barycentric,
)


class NotAdjacentError(ValueError):
    pass


class CoeffSlot(NamedTuple):
    face: int
    idx: tuple[int, int, int]


@dataclass(frozen=True)
class SmoothnessRow:
    terms: tuple  # ((CoeffSlot, weight), ...)
    order: int

    def residual(self, coeffs_of) -> object:
        """``coeffs_of(slot)`` returns the coefficient stored in that slot."""
        return sum(w * coeffs_of(slot) for slot, w in self.terms)

    def weight(self, slot):
        for s, w in self.terms:
            if s == slot:
                return w
        return 0


def _same(p, q, tol):
    if is_exact(p[0]) and is_exact(q[0]):
        return p[0] == q[0] and p[1] == q[1]
    return abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol


def shared_edge(T: Triangle, Tt: Triangle, tol: float | None = None):
    """Positions ``(opp, a, b)`` in T and ``(opp~, a~, b~)`` in T~ of the shared edge.

    ``T[a] == Tt[a~]`` and ``T[b] == Tt[b~]``.
    """
    if tol is None:
        tol = 1e-12 * max(T.scale(), Tt.scale())
    pairs = [(i, k) for i in range(3) for k in range(3) if _same(T[i], Tt[k], tol)]
    if len(pairs) != 2:
        raise NotAdjacentError("triangles do not share exactly one edge")
    (a, at), (b, bt) = pairs
    opp = 3 - a - b
    oppt = 3 - at - bt
    return (opp, a, b), (oppt, at, bt)


def _reorder(idx, perm):
    # idx given in the order (opp, a, b); place entries into the triangle's own slots
    out = [0, 0, 0]
    for value, pos in zip(idx, perm):
        out[pos] = value
    return tuple(out)


def _compositions3(n):
    for nu in range(n, -1, -1):
        for mu in range(n - nu, -1, -1):
            yield nu, mu, n - nu - mu


def cr_rows(T: Triangle, Tt: Triangle, r: int, d: int, faces=(0, 1)) -> list[SmoothnessRow]:
    """C^r conditions across the common edge of ``T`` (face ``faces[0]``) and ``Tt``.

    Returns one row per ``n = 0..r`` and ``j + k = d - n``, in that order.
    """
    if r > d:
        raise ValueError("smoothness order exceeds degree")
    T = Triangle.of(*T)
    Tt = Triangle.of(*Tt)
    perm, permt = shared_edge(T, Tt)
    ref = Triangle(T[perm[0]], T[perm[1]], T[perm[2]])
    b1, b2, b3 = to_barycentric(Tt[permt[0]], ref)
    f, ft = faces
    rows = []
    for n in range(r + 1):
        for j in range(d - n, -1, -1):
            k = d - n - j
            terms = {}
            for nu, mu, ka in _compositions3(n):
                w = factorial(n) // (factorial(nu) * factorial(mu) * factorial(ka))
                w = w * b1**nu * b2**mu * b3**ka
                if w == 0:
                    continue
                slot = CoeffSlot(f, _reorder((nu, j + mu, k + ka), perm))
                terms[slot] = terms.get(slot, 0) + w
            terms[CoeffSlot(ft, _reorder((n, j, k), permt))] = -1
            rows.append(SmoothnessRow(tuple(terms.items()), n))
    return rows


def collinear_rows(b1, n: int, d: int, j: int) -> SmoothnessRow:
    """Univariate form of the order-n condition when v1, v3 and v~1 are collinear.

    Slots use face 0 for the reference triangle ``<v1, v2, v3>`` and face 1 for
    ``<v~1, v2, v3>``.
    """
    if n > d:
        raise ValueError("order exceeds degree")
    k = d - n - j
    if k < 0:
        raise ValueError("j too large for this order")
    terms = []
    for nu in range(n + 1):
        w = comb(n, nu) * b1**nu * (1 - b1) ** (n - nu)
        if w != 0:
            terms.append((CoeffSlot(0, (nu, j, k + n - nu)), w))
    terms.append((CoeffSlot(1, (n, j, k)), -1))
    return SmoothnessRow(tuple(terms), n)


def forward_difference(xs: Sequence, n: int):
    return sum((-1) ** (n - j) * comb(n, j) * xs[j] for j in range(n + 1))


def forward_difference_check(e, et, len1, len2, n: int, rel: float = 1e-10) -> bool:
    """Whether the n-th forward differences, scaled by the segment lengths, agree.

    ``len1`` is ``|v1 - v3|`` and ``len2`` is ``|v~1 - v3|``.
    """
    if len(e) != n + 1 or len(et) != n + 1:
        raise ValueError(f"need {n + 1} coefficients on each side")
    lhs = forward_difference(e, n) * len2**n
    rhs = forward_difference(et, n) * len1**n
    if is_exact(lhs) and is_exact(rhs):
        return lhs == rhs
    return abs(lhs - rhs) <= rel * max(abs(lhs), abs(rhs), 1.0)


def _patch_lookup(patches):
    def coeff(slot):
        p = patches[slot.face]
        return p.coeffs[index_map(p.degree)[slot.idx]]

    return coeff


def rows_vanish(rows, patches, rel: float = 1e-10) -> bool:
    coeff = _patch_lookup(patches)
    for row in rows:
        res = row.residual(coeff)
        if is_exact(res):
            if res != 0:
                return False
        else:
            scale = max(abs(w * coeff(s)) for s, w in row.terms)
            if abs(res) > rel * max(scale, 1.0):
                return False
    return True


def derivatives_match(patchA: BezierPatch, patchB: BezierPatch, r: int, samples: int = 7,
                      rel: float = 1e-10) -> bool:
    """Cross-edge derivatives up to order r agree at ``samples`` points of the shared edge."""
    (oppA, a, b), _ = shared_edge(patchA.triangle, patchB.triangle)
    TA = patchA.triangle
    u = TA[oppA] - TA[a]
    exact = is_exact(TA[a][0])
    for s in range(samples):
        lam = Fraction(s + 1, samples + 1) if exact else (s + 1) / (samples + 1)
        pt = Point(TA[a].x + lam * (TA[b].x - TA[a].x), TA[a].y + lam * (TA[b].y - TA[a].y))
        for n in range(r + 1):
            dA = eval_derivative(patchA, pt, [u] * n)
            dB = eval_derivative(patchB, pt, [u] * n)
            if exact:
                if dA != dB:
                    return False
            elif abs(dA - dB) > rel * max(abs(dA), abs(dB), 1.0):
                return False
    return True


def rows_equivalent_to_derivative_match(rows, patchA, patchB, r: int) -> bool:
    """True when "all rows vanish" and "derivatives agree" have the same truth value."""
    return rows_vanish(rows, (patchA, patchB)) == derivatives_match(patchA, patchB, r)


def stencil(rows, n: int, j: int, d: int = 5):
    """The row of order ``n`` with edge index ``j`` from a :func:`cr_rows` list."""
    start = sum(d - m + 1 for m in range(n))
    return rows[start + (d - n - j)]
