"""Bernstein-Bezier patches on triangles.

Barycentric and directional coordinates, the Bernstein basis, de Casteljau
evaluation and the directional-derivative recursion on B-coefficients.
Coefficients are stored densely in the order returned by
:func:`multi_indices` (``i`` descending, then ``j`` descending).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import NamedTuple, Sequence

from .arith import div, is_exact


class DegenerateTriangleError(ValueError):
    pass


class Point(NamedTuple):
    x: object
    y: object

    def __add__(self, other):
        return Point(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Point(self.x - other[0], self.y - other[1])

    def __mul__(self, s):
        return Point(self.x * s, self.y * s)

    __rmul__ = __mul__

    def __neg__(self):
        return Point(-self.x, -self.y)


Vector = Point


def as_point(p) -> Point:
    return Point(*(Fraction(c) if isinstance(c, int) else c for c in p))


def dot(u, w):
    return u[0] * w[0] + u[1] * w[1]


def cross(u, w):
    return u[0] * w[1] - u[1] * w[0]


def midpoint(p, q) -> Point:
    return Point(div(p[0] + q[0], 2), div(p[1] + q[1], 2))


class Triangle(NamedTuple):
    v1: Point
    v2: Point
    v3: Point

    @classmethod
    def of(cls, a, b, c) -> "Triangle":
        """Build from coordinate pairs; integer coordinates become Fractions."""
        return cls(as_point(a), as_point(b), as_point(c))

    def signed_area(self):
        return div(cross(self.v2 - self.v1, self.v3 - self.v1), 2)

    def scale(self):
        xs = [v[0] for v in self]
        ys = [v[1] for v in self]
        return max(max(xs) - min(xs), max(ys) - min(ys))

    def is_degenerate(self) -> bool:
        area = self.signed_area()
        if is_exact(area):
            return area == 0
        return abs(area) < 1e-12 * self.scale() ** 2

    def check(self) -> "Triangle":
        if self.is_degenerate():
            raise DegenerateTriangleError(f"degenerate triangle {tuple(self)}")
        return self


class BaryPoint(NamedTuple):
    b1: object
    b2: object
    b3: object


BaryVector = BaryPoint


def _solve_affine(u, T: Triangle):
    # u = s*(v2 - v1) + r*(v3 - v1)
    T.check()
    e1 = T.v2 - T.v1
    e2 = T.v3 - T.v1
    det = cross(e1, e2)
    s = div(cross(u, e2), det)
    r = div(cross(e1, u), det)
    return s, r


def to_barycentric(p, T: Triangle) -> BaryPoint:
    s, r = _solve_affine(Point(*p) - T.v1, T)
    return BaryPoint(1 - s - r, s, r)


def direction_coords(u, T: Triangle) -> BaryVector:
    s, r = _solve_affine(u, T)
    return BaryVector(-s - r, s, r)


def from_barycentric(b, T: Triangle) -> Point:
    return Point(
        b[0] * T.v1.x + b[1] * T.v2.x + b[2] * T.v3.x,
        b[0] * T.v1.y + b[1] * T.v2.y + b[2] * T.v3.y,
    )


@lru_cache(maxsize=None)
def multi_indices(d: int) -> tuple[tuple[int, int, int], ...]:
    return tuple((i, j, d - i - j) for i in range(d, -1, -1) for j in range(d - i, -1, -1))


@lru_cache(maxsize=None)
def index_map(d: int) -> dict[tuple[int, int, int], int]:
    return {idx: n for n, idx in enumerate(multi_indices(d))}


def num_coeffs(d: int) -> int:
    return (d + 1) * (d + 2) // 2


@lru_cache(maxsize=None)
def _step_table(d: int):
    # for each index of degree d-1, positions of its three "parents" of degree d
    pos = index_map(d)
    return tuple(
        (pos[(i + 1, j, k)], pos[(i, j + 1, k)], pos[(i, j, k + 1)])
        for i, j, k in multi_indices(d - 1)
    )


def _casteljau_step(coeffs: Sequence, d: int, a) -> list:
    a1, a2, a3 = a
    return [a1 * coeffs[p] + a2 * coeffs[q] + a3 * coeffs[r] for p, q, r in _step_table(d)]


def bernstein_eval(d: int, idx, b):
    i, j, k = idx
    if min(idx) < 0 or i + j + k != d:
        raise ValueError(f"multi-index {idx} does not match degree {d}")
    mult = factorial(d) // (factorial(i) * factorial(j) * factorial(k))
    return mult * b[0] ** i * b[1] ** j * b[2] ** k


@dataclass(frozen=True)
class BezierPatch:
    """Polynomial of degree ``degree`` on ``triangle`` in B-form."""

    degree: int
    triangle: Triangle
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != num_coeffs(self.degree):
            raise ValueError(
                f"degree {self.degree} needs {num_coeffs(self.degree)} coefficients, "
                f"got {len(self.coeffs)}"
            )

    def __getitem__(self, idx):
        return self.coeffs[index_map(self.degree)[tuple(idx)]]

    def items(self):
        return zip(multi_indices(self.degree), self.coeffs)

    def __call__(self, p):
        return patch_eval(self, to_barycentric(p, self.triangle))

    @classmethod
    def from_function(cls, degree, triangle, fn):
        """Patch with ``coeffs[idx] = fn(idx)``."""
        return cls(degree, triangle, tuple(fn(idx) for idx in multi_indices(degree)))


def patch_eval(p: BezierPatch, b):
    """de Casteljau evaluation at barycentric point ``b``."""
    c = list(p.coeffs)
    for d in range(p.degree, 0, -1):
        c = _casteljau_step(c, d, b)
    return c[0]


def basis_sum_eval(p: BezierPatch, b):
    """Naive evaluation as sum of c_ijk B_ijk(b); used to cross-check de Casteljau."""
    return sum(c * bernstein_eval(p.degree, idx, b) for idx, c in p.items())


def derivative_patch(p: BezierPatch, dirs: Sequence) -> BezierPatch:
    """Patch of ``grad_{u_m} ... grad_{u_1} p`` for directional coordinates ``dirs``.

    The factor d!/(d-m)! is folded into the returned coefficients.
    """
    m = len(dirs)
    d = p.degree
    if m > d:
        raise ValueError(f"cannot take {m} derivatives of a degree-{d} patch")
    c = list(p.coeffs)
    for n, a in enumerate(dirs):
        c = _casteljau_step(c, d - n, a)
    scale = factorial(d) // factorial(d - m)
    return BezierPatch(d - m, p.triangle, tuple(scale * x for x in c))


def eval_derivative(p: BezierPatch, pt, dirs: Sequence = ()):
    """Directional derivative of ``p`` along Cartesian vectors ``dirs`` at ``pt``."""
    T = p.triangle
    a = [direction_coords(u, T) for u in dirs]
    return patch_eval(derivative_patch(p, a), to_barycentric(pt, T))


def functional_weights(d: int, T: Triangle, pt, dirs: Sequence) -> list:
    """Weights w with ``eval_derivative(p, pt, dirs) == sum(w * p.coeffs)`` for any p."""
    b = to_barycentric(pt, T)
    a = [direction_coords(u, T) for u in dirs]
    m = len(a)
    # transpose of the forward pipeline: m derivative steps, then d - m evaluation steps
    steps = list(a) + [b] * (d - m)
    w = [factorial(d) // factorial(d - m)]
    for deg in range(1, d + 1):
        s = steps[d - deg]
        out = [0] * num_coeffs(deg)
        for val, (p_, q_, r_) in zip(w, _step_table(deg)):
            out[p_] += s[0] * val
            out[q_] += s[1] * val
            out[r_] += s[2] * val
        w = out
    return w
