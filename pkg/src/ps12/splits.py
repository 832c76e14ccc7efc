"""Powell-Sabin 6- and 12-splits, edge frames and 1-to-4 subdivision.

Labeling (0-based indices, ``v[k]`` is the 1-based label ``v{k+1}``)::

    12-split                              6-split
    v1, v2, v3   corners                  v1, v2, v3   corners
    v4 = (v1+v2)/2                        v4 = (v1+v2)/2
    v5 = (v2+v3)/2                        v5 = (v2+v3)/2
    v6 = (v3+v1)/2                        v6 = (v3+v1)/2
    v7 = (v4+v6)/2   on median of v1      v7 = barycenter
    v8 = (v4+v5)/2   on median of v2
    v9 = (v5+v6)/2   on median of v3
    v10 = barycenter

Faces are listed in :data:`PS12_FACES` / :data:`PS6_FACES`, each
counterclockwise when the parent is.  Corner ``X`` of a triangle owns the
opposite edge ``(Y, Z)`` where ``(X, Y, Z)`` is a cyclic shift of the corner
order; its tangential vector is ``vZ - vY`` and its medial vector
``(vY + vZ)/2 - vX``.

In :func:`subdivide_four` the corner children keep the parent's frames
scaled by +1/2.  The inner child ``(v4, v5, v6)`` is the image of
``(v3, v1, v2)`` under the point reflection through the barycenter scaled by
1/2, so each of its frames is the corresponding parent frame times -1/2
(both tangential and medial vectors flip).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .arith import div, is_exact
from .bb_core import Point, Triangle, cross, dot, midpoint

# 1-based labels, converted below
_PS12_FACES_1 = (
    (1, 4, 7), (1, 7, 6),
    (2, 5, 8), (2, 8, 4),
    (3, 6, 9), (3, 9, 5),
    (4, 8, 10), (8, 5, 10), (5, 9, 10), (9, 6, 10), (6, 7, 10), (7, 4, 10),
)
_PS6_FACES_1 = ((1, 4, 7), (4, 2, 7), (2, 5, 7), (5, 3, 7), (3, 6, 7), (6, 1, 7))

PS12_FACES = tuple(tuple(v - 1 for v in f) for f in _PS12_FACES_1)
PS6_FACES = tuple(tuple(v - 1 for v in f) for f in _PS6_FACES_1)


def _interior_edges(faces):
    seen = {}
    for n, face in enumerate(faces):
        for a in range(3):
            e = tuple(sorted((face[a], face[(a + 1) % 3])))
            seen.setdefault(e, []).append(n)
    interior = tuple((e[0], e[1], fs[0], fs[1]) for e, fs in sorted(seen.items()) if len(fs) == 2)
    boundary = tuple(e for e, fs in sorted(seen.items()) if len(fs) == 1)
    return interior, boundary


@dataclass(frozen=True)
class _Split:
    parent: Triangle
    vertices: tuple
    faces: tuple
    interior_edges: tuple  # (a, b, face_1, face_2)
    boundary_edges: tuple

    def face_triangle(self, n: int) -> Triangle:
        a, b, c = self.faces[n]
        return Triangle(self.vertices[a], self.vertices[b], self.vertices[c])

    def face_triangles(self) -> list[Triangle]:
        return [self.face_triangle(n) for n in range(len(self.faces))]

    @property
    def corners(self):
        return self.vertices[:3]


class Ps12Split(_Split):
    pass


class Ps6Split(_Split):
    pass


def ps12_split(T: Triangle) -> Ps12Split:
    T = Triangle.of(*T).check()
    v1, v2, v3 = T
    v4, v5, v6 = midpoint(v1, v2), midpoint(v2, v3), midpoint(v3, v1)
    v7, v8, v9 = midpoint(v4, v6), midpoint(v4, v5), midpoint(v5, v6)
    v10 = Point(div(v1.x + v2.x + v3.x, 3), div(v1.y + v2.y + v3.y, 3))
    verts = (v1, v2, v3, v4, v5, v6, v7, v8, v9, v10)
    interior, boundary = _interior_edges(PS12_FACES)
    return Ps12Split(T, verts, PS12_FACES, interior, boundary)


def ps6_split(T: Triangle) -> Ps6Split:
    T = Triangle.of(*T).check()
    v1, v2, v3 = T
    v7 = Point(div(v1.x + v2.x + v3.x, 3), div(v1.y + v2.y + v3.y, 3))
    verts = (v1, v2, v3, midpoint(v1, v2), midpoint(v2, v3), midpoint(v3, v1), v7)
    interior, boundary = _interior_edges(PS6_FACES)
    return Ps6Split(T, verts, PS6_FACES, interior, boundary)


class EdgeFrame(NamedTuple):
    """Frame of the edge (vY, vZ) opposite corner vX; ``m = alpha*n + beta*t``."""

    vY: Point
    vZ: Point
    vX: Point
    t: Point
    m: Point
    n: Point
    alpha: object
    beta: object


class EdgePoints(NamedTuple):
    midpoint: Point
    quarter_near_Y: Point
    quarter_near_Z: Point


def corner_roles(X: int) -> tuple[int, int, int]:
    """(X, Y, Z): corner X and the endpoints of its opposite edge, in cyclic order."""
    return X, (X + 1) % 3, (X + 2) % 3


def tangent_medial(T: Triangle, X: int) -> tuple[Point, Point]:
    _, Y, Z = corner_roles(X)
    return T[Z] - T[Y], midpoint(T[Y], T[Z]) - T[X]


def edge_frame(T: Triangle, X: int) -> EdgeFrame:
    """Tangential, medial and inward normal vectors of the edge opposite corner ``X``.

    The normal is the unit inward normal in float mode and the inward
    perpendicular with ``|n| = |t|`` in exact mode.
    """
    T = Triangle.of(*T).check()
    _, Y, Z = corner_roles(X)
    t, m = tangent_medial(T, X)
    n = Point(-t.y, t.x)
    if dot(n, T[X] - T[Y]) < 0:
        n = -n
    if not (is_exact(t.x) and is_exact(t.y)):
        length = math.hypot(n.x, n.y)
        n = Point(n.x / length, n.y / length)
    alpha = div(dot(m, n), dot(n, n))
    beta = div(dot(m, t), dot(t, t))
    return EdgeFrame(T[Y], T[Z], T[X], t, m, n, alpha, beta)


def edge_points(vY, vZ) -> EdgePoints:
    mid = midpoint(vY, vZ)
    return EdgePoints(mid, midpoint(vY, mid), midpoint(mid, vZ))


class Child(NamedTuple):
    triangle: Triangle
    parent_corners: tuple[int, int, int]  # parent corner matched by each child corner
    scale: object  # t_child = scale * t_parent for every matched edge


def subdivide_four(T: Triangle) -> list[Child]:
    T = Triangle.of(*T).check()
    v1, v2, v3 = T
    v4, v5, v6 = midpoint(v1, v2), midpoint(v2, v3), midpoint(v3, v1)
    half = div(1, 2)
    return [
        Child(Triangle(v1, v4, v6), (0, 1, 2), half),
        Child(Triangle(v2, v5, v4), (1, 2, 0), half),
        Child(Triangle(v3, v6, v5), (2, 0, 1), half),
        Child(Triangle(v4, v5, v6), (2, 0, 1), -half),
    ]


def face_containing(split: _Split, p, tol: float = 1e-12) -> int:
    """Index of the first face whose closure contains ``p``."""
    from .bb_core import to_barycentric

    for n in range(len(split.faces)):
        b = to_barycentric(p, split.face_triangle(n))
        if all((x >= 0) if is_exact(x) else (x >= -tol) for x in b):
            return n
    raise ValueError(f"point {tuple(p)} lies outside the split triangle")


def total_area(split: _Split):
    return sum(tri.signed_area() for tri in split.face_triangles())


def is_ccw(T: Triangle) -> bool:
    return cross(T.v2 - T.v1, T.v3 - T.v1) > 0
