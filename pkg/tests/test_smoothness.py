import json
import random
from fractions import Fraction
from pathlib import Path

import pytest

from conftest import rand_q, rand_triangle
from ps12.bb_core import BezierPatch, Point, Triangle, eval_derivative, index_map, multi_indices
from ps12.smoothness import (
    CoeffSlot,
    NotAdjacentError,
    collinear_rows,
    cr_rows,
    derivatives_match,
    forward_difference_check,
    rows_equivalent_to_derivative_match,
    rows_vanish,
    stencil,
)
from ps12.splits import ps12_split

GOLDEN = Path(__file__).parent / "goldens" / "stencil_gallery.json"
UNIT = Triangle.of((0, 0), (1, 0), (0, 1))


def stencil_gallery():
    """Stencils (a)-(f): bivariate C^1..C^3 across <v6, v10>, univariate ones along median lines."""
    v = ps12_split(UNIT).vertices
    T = Triangle(v[6], v[9], v[5])  # <v7, v10, v6>
    Tt = Triangle(v[8], v[5], v[9])  # <v9, v6, v10>
    rows = cr_rows(T, Tt, 3, 5)
    out = {}
    for key, n in (("a", 1), ("b", 2), ("c", 3)):
        out[key] = [stencil(rows, n, 0)]
    out["d"] = [collinear_rows(Fraction(-1), n, 5, 0) for n in (1, 2, 3)]
    out["e"] = [collinear_rows(Fraction(-1, 3), n, 5, 0) for n in (1, 2, 3)]
    # along v4 -> v10 -> v9 the two segments have lengths 2:1
    out["f"] = [collinear_rows(Fraction(-1, 2), 3, 5, 0)]
    return {
        k: [[[s.face, list(s.idx), str(w)] for s, w in row.terms] for row in rs]
        for k, rs in out.items()
    }


def patch_from(T, fn):
    return BezierPatch.from_function(5, T, fn)


def consistent_pair(rng, T, Tt, r=3):
    """Random patch on T and a patch on Tt built layer by layer from the C^r rows."""
    p = patch_from(T, lambda idx: rand_q(rng))
    rows = cr_rows(T, Tt, r, 5)
    target = {}
    for row in rows:
        ct = next(s for s, w in row.terms if s.face == 1)
        target[ct.idx] = sum(w * p[s.idx] for s, w in row.terms if s.face == 0)
    q = patch_from(Tt, lambda idx: target.get(idx, rand_q(rng)))
    return p, q, rows


def neighbour(rng, T):
    """A triangle on the other side of edge (v2, v3) of T, oriented counterclockwise."""
    while True:
        w = Point(rand_q(rng, -8, 8, 3), rand_q(rng, -8, 8, 3))
        Tt = Triangle(w, T.v3, T.v2)
        if Tt.signed_area() > Fraction(1, 4):
            return Tt


def test_golden_stencils_regenerate():
    assert stencil_gallery() == json.loads(GOLDEN.read_text())


def test_row_count():
    rng = random.Random(1)
    T = rand_triangle(rng)
    assert len(cr_rows(T, neighbour(rng, T), 3, 5)) == 18


def test_not_adjacent():
    with pytest.raises(NotAdjacentError):
        cr_rows(UNIT, Triangle.of((5, 5), (6, 5), (5, 6)), 1, 5)


def test_mirror_across_edge_c1():
    # v~1 is the reflection of v1 in the edge line, so b = (-1, 2, 0)
    T = Triangle.of((0, 1), (0, 0), (1, 0))
    Tt = Triangle.of((0, -1), (1, 0), (0, 0))
    rows = cr_rows(T, Tt, 1, 5)
    for j in range(5):
        k = 4 - j
        w = dict(stencil(rows, 1, j).terms)
        # c~ + c - 2 (edge coefficient) = 0
        assert w == {
            CoeffSlot(0, (1, j, k)): -1,
            CoeffSlot(0, (0, j + 1, k)): 2,
            CoeffSlot(1, (1, k, j)): -1,
        }


def test_example_bary_coordinates_in_stencil():
    v = ps12_split(UNIT).vertices
    rows = cr_rows(Triangle(v[6], v[9], v[5]), Triangle(v[8], v[5], v[9]), 1, 5)
    w = dict(stencil(rows, 1, 0).terms)
    # c~_{1,0,4} = -1 c_{1,0,4} + 3/2 c_{0,1,4} + 1/2 c_{0,0,5}
    assert w[CoeffSlot(0, (1, 0, 4))] == -1
    assert w[CoeffSlot(0, (0, 1, 4))] == Fraction(3, 2)
    assert w[CoeffSlot(0, (0, 0, 5))] == Fraction(1, 2)


def test_collinear_examples():
    row = collinear_rows(Fraction(-1), 1, 5, 0)
    assert dict(row.terms) == {CoeffSlot(0, (0, 0, 5)): 2, CoeffSlot(0, (1, 0, 4)): -1, CoeffSlot(1, (1, 0, 4)): -1}
    row0 = collinear_rows(Fraction(1, 3), 0, 5, 2)
    assert dict(row0.terms) == {CoeffSlot(0, (0, 2, 3)): 1, CoeffSlot(1, (0, 2, 3)): -1}
    with pytest.raises(ValueError):
        collinear_rows(Fraction(-1), 6, 5, 0)


def test_collinear_specialisation():
    # v1 = (0, 2), v3 = (0, 0), v~1 = (0, -1) collinear: b1 = -1/2
    T = Triangle.of((0, 2), (3, 1), (0, 0))
    Tt = Triangle.of((0, -1), (0, 0), (3, 1))
    rows = cr_rows(T, Tt, 3, 5)
    for n in range(4):
        for j in range(6 - n):
            row = stencil(rows, n, j)
            assert all(w != 0 for _, w in row.terms)
            # no term uses the v2 index beyond j, i.e. mu = 0 only
            assert all(s.idx[1] == j for s, _ in row.terms if s.face == 0)
            expected = collinear_rows(Fraction(-1, 2), n, 5, j)
            assert {(s.face, s.idx[0], s.idx[2]) for s, _ in row.terms if s.face == 0} == {
                (s.face, s.idx[0], s.idx[2]) for s, _ in expected.terms if s.face == 0
            }
            assert sorted(w for s, w in row.terms if s.face == 0) == sorted(
                w for s, w in expected.terms if s.face == 0
            )


def test_forward_difference_examples():
    assert forward_difference_check([1, 2, 4, 8], [1, 2, 4, 8], 1, 1, 3)
    assert not forward_difference_check([1, 2, 4, 9], [1, 2, 4, 8], 1, 1, 3)
    with pytest.raises(ValueError):
        forward_difference_check([1, 2], [1, 2, 3], 1, 1, 2)


def _bernstein_cubic(g, x0, x1):
    """B-coefficients of the cubic g on the segment from x0 to x1, in that order."""
    import sympy as sp
    from math import comb

    t = sp.symbols("t")
    poly = sp.Poly(sp.expand(g(x0 + (x1 - x0) * t)), t)
    c = [poly.coeff_monomial(t**k) for k in range(4)]
    b = [sum(sp.Rational(comb(i, k), comb(3, k)) * c[k] for k in range(i + 1)) for i in range(4)]
    return [Fraction(int(sp.numer(x)), int(sp.denom(x))) for x in b]


def test_forward_difference_ratio_one_third():
    # one cubic seen from both sides of v3 = 0, with |v~1 - v3| = |v1 - v3| / 3
    rng = random.Random(4)
    a = [rand_q(rng) for _ in range(4)]
    g = lambda x: a[0] + a[1] * x + a[2] * x**2 + a[3] * x**3  # noqa: E731
    len1, len2 = Fraction(3), Fraction(1)
    e = _bernstein_cubic(g, 0, len1)  # e_nu, nu counted from v3
    et = _bernstein_cubic(g, 0, -len2)[::-1]  # ~e_nu, nu counted from v~1
    assert forward_difference_check(e, et, len1, len2, 3)
    e[1] += 1
    assert not forward_difference_check(e, et, len1, len2, 3)


def test_collinear_rows_equivalent_to_forward_differences():
    rng = random.Random(8)
    for _ in range(30):
        b1 = -Fraction(rng.randint(1, 9), rng.randint(1, 9))
        n = rng.randint(1, 3)
        e = [rand_q(rng) for _ in range(n + 1)]
        row = collinear_rows(b1, n, 5, 0)
        # e_nu = c_{nu, 0, 5-nu}; ~e_0 satisfies the order-n row or misses it by 1,
        # ~e_nu for nu >= 1 come from the lower-order rows
        val = sum(w * e[s.idx[0]] for s, w in row.terms if s.face == 0)
        et_top = val if rng.random() < 0.5 else val + 1
        et = [et_top] + [sum(w * e[s.idx[0]] for s, w in collinear_rows(b1, n - nu, 5, 0).terms if s.face == 0)
                         for nu in range(1, n + 1)]
        satisfied = et_top == val
        assert forward_difference_check(e, et, 1, -b1, n) == satisfied


def test_rows_equivalent_to_derivative_match_random_pairs():
    """Rows built from the C^3 conditions give matching derivatives; random neighbours do not."""
    rng = random.Random(12)
    for _ in range(50):
        T = rand_triangle(rng)
        Tt = neighbour(rng, T)
        p, q, rows = consistent_pair(rng, T, Tt)
        assert rows_vanish(rows, (p, q))
        assert derivatives_match(p, q, 3)
        assert rows_equivalent_to_derivative_match(rows, p, q, 3)
        # at random points of the edge, exactly
        lam = rand_q(rng)
        pt = Point(T.v2.x + lam * (T.v3.x - T.v2.x), T.v2.y + lam * (T.v3.y - T.v2.y))
        u = Point(rand_q(rng), rand_q(rng))
        for n in range(4):
            assert eval_derivative(p, pt, [u] * n) == eval_derivative(q, pt, [u] * n)
        r = patch_from(Tt, lambda idx: rand_q(rng))
        assert not rows_vanish(rows, (p, r))
        assert rows_equivalent_to_derivative_match(rows, p, r, 3)


def test_single_polynomial_pair():
    rng = random.Random(13)
    T = rand_triangle(rng)
    Tt = neighbour(rng, T)
    coeffs = {(a, b): rand_q(rng) for a in range(6) for b in range(6 - a)}
    f = lambda p: sum(c * p.x**a * p.y**b for (a, b), c in coeffs.items())  # noqa: E731
    p = _interpolate(T, f)
    q = _interpolate(Tt, f)
    rows = cr_rows(T, Tt, 3, 5)
    assert rows_vanish(rows, (p, q)) and derivatives_match(p, q, 3)


def _interpolate(T, f):
    """Degree-5 patch agreeing with polynomial f at the 21 domain points (exact solve)."""
    from ps12.bb_core import bernstein_eval, to_barycentric
    from ps12.exact import solve

    idxs = multi_indices(5)
    pts = [Point(sum(Fraction(i[k], 5) * T[k].x for k in range(3)), sum(Fraction(i[k], 5) * T[k].y for k in range(3)))
           for i in idxs]
    rows = [{c: bernstein_eval(5, idx, to_barycentric(p, T)) for c, idx in enumerate(idxs)} for p in pts]
    X = solve(rows, [{0: f(p)} for p in pts], 21, 1)
    return BezierPatch(5, T, tuple(x[0] for x in X))


def test_float_mode_rows():
    rng = random.Random(14)
    T = rand_triangle(rng, exact=False)
    Tt = Triangle(Point(T.v2.x + T.v3.x - T.v1.x + 0.3, T.v2.y + T.v3.y - T.v1.y - 0.2), T.v3, T.v2)
    p = patch_from(T, lambda idx: rng.uniform(-1, 1))
    rows = cr_rows(T, Tt, 3, 5)
    target = {}
    for row in rows:
        ct = next(s for s, w in row.terms if s.face == 1)
        target[ct.idx] = sum(w * p[s.idx] for s, w in row.terms if s.face == 0)
    q = patch_from(Tt, lambda idx: target.get(idx, rng.uniform(-1, 1)))
    assert rows_vanish(rows, (p, q)) and derivatives_match(p, q, 3)
    assert index_map(5)[(5, 0, 0)] == 0
