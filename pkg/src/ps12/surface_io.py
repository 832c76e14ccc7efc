"""Macro-triangulations: JSON documents, test data, and mesh / field export.

Document layout (``"format": 1``)::

    {
      "format": 1,
      "arithmetic": "exact" | "f64",
      "vertices": [[x, y], ...],              # numbers or "p/q" strings
      "triangles": [[i, j, k], ...],          # 0-based, counterclockwise
      "corner_jets": [[f, fx, fy, fxx, fxy, fyy, fxxx, fxxy, fxyy, fyyy], ...],
      "edge_data": {
        "i-j": {"mode": "normal" | "medial",
                "d1_mid": ..., "d2_quarter_near_i": ..., "d2_quarter_near_j": ...}
      }
    }

Edges are keyed with ``i < j``.  In normal mode the direction is the
perpendicular ``rot90(v_j - v_i)`` (counterclockwise, not normalised, so it
stays rational).  In medial mode the direction is the medial vector of the
edge in the lowest-numbered triangle that contains it.  Either way the data
is converted at load to the medial vector of every triangle adjacent to the
edge.
"""

from __future__ import annotations

import io
import json
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import hermite
from .arith import EXACT, FLOAT, MODES, format_scalar, scalar
from .bb_core import Point, Triangle, cross, midpoint
from .exact import solve
from .hermite import CornerJet
from .macro_solver import JET_NAMES, JET_ORDERS
from .splits import corner_roles, tangent_medial

FORMAT_VERSION = 1


class TriangulationError(ValueError):
    pass


class NonConformingMeshError(TriangulationError):
    pass


class MissingDataError(TriangulationError):
    pass


class DegenerateTriangleError(TriangulationError):
    pass


class OrientationError(TriangulationError):
    pass


@dataclass
class EdgeData:
    mode: str  # "normal" or "medial"
    d1_mid: object
    d2_near_i: object
    d2_near_j: object


@dataclass
class MacroTriangulation:
    vertices: list  # Points
    triangles: list  # index triples, counterclockwise
    arithmetic: str = EXACT
    corner_jets: list | None = None  # CornerJet per vertex
    edge_data: dict = field(default_factory=dict)  # (i, j) with i < j -> EdgeData

    @property
    def exact(self) -> bool:
        return self.arithmetic == EXACT

    def edges(self) -> dict:
        """(i, j) with i < j -> list of (triangle, X) where X is the opposite corner."""
        out = {}
        for n, tri in enumerate(self.triangles):
            for X in range(3):
                _, Y, Z = corner_roles(X)
                a, b = tri[Y], tri[Z]
                out.setdefault((min(a, b), max(a, b)), []).append((n, X))
        return out

    def triangle(self, n) -> Triangle:
        i, j, k = self.triangles[n]
        return Triangle(self.vertices[i], self.vertices[j], self.vertices[k])

    def validate(self) -> "MacroTriangulation":
        nv = len(self.vertices)
        for n, tri in enumerate(self.triangles):
            if len(tri) != 3 or len(set(tri)) != 3 or not all(0 <= v < nv for v in tri):
                raise NonConformingMeshError(f"triangle {n} has bad vertex indices {tri}")
            T = self.triangle(n)
            if T.is_degenerate():
                raise DegenerateTriangleError(f"triangle {n} is degenerate")
            if T.signed_area() < 0:
                raise OrientationError(f"triangle {n} is clockwise")
        for n, tri in enumerate(self.triangles):
            T = self.triangle(n)
            for v, p in enumerate(self.vertices):
                if v not in tri and _on_open_edge(p, T, self.exact):
                    raise NonConformingMeshError(f"vertex {v} is a hanging node on triangle {n}")
        for e, owners in self.edges().items():
            if len(owners) > 2:
                raise NonConformingMeshError(f"edge {e} is shared by {len(owners)} triangles")
            if len(owners) == 2:
                (t1, X1), (t2, X2) = owners
                if self.triangles[t1][(X1 + 1) % 3] == self.triangles[t2][(X2 + 1) % 3]:
                    raise OrientationError(f"triangles {t1} and {t2} disagree on orientation")
        return self

    def has_data(self) -> bool:
        return self.corner_jets is not None and len(self.edge_data) == len(self.edges())

    # -- conversion to refinement input

    def medial_edge_data(self) -> list:
        """Per triangle and corner X: (f^m mid, f^mm near Y, f^mm near Z) for its own medial m."""
        self._check_data()
        out = [[None] * 3 for _ in self.triangles]
        for (i, j), owners in self.edges().items():
            ed = self.edge_data[(i, j)]
            u = self._direction((i, j), ed.mode, owners)
            for n, X in owners:
                t, m = tangent_medial(self.triangle(n), X)
                tau = self.vertices[j] - self.vertices[i]
                mid, near_i, near_j = convert_edge_data(
                    self.corner_jets[i], self.corner_jets[j], tau, u, (ed.d1_mid, ed.d2_near_i, ed.d2_near_j), m
                )
                Y = self.triangles[n][(X + 1) % 3]
                out[n][X] = (mid, near_i, near_j) if Y == i else (mid, near_j, near_i)
        return out

    def _direction(self, edge, mode, owners):
        i, j = edge
        if mode == "normal":
            d = self.vertices[j] - self.vertices[i]
            return Point(-d.y, d.x)
        if mode == "medial":
            n, X = min(owners)
            return tangent_medial(self.triangle(n), X)[1]
        raise TriangulationError(f"unknown edge-data mode {mode!r}")

    def _check_data(self):
        if self.corner_jets is None or len(self.corner_jets) != len(self.vertices):
            raise MissingDataError("corner jets missing")
        missing = [e for e in self.edges() if e not in self.edge_data]
        if missing:
            raise MissingDataError(f"edge data missing for edges {missing[:5]}")

    def level0(self) -> hermite.RefinementLevel:
        edata = self.medial_edge_data()
        tris = [self.triangle(n) for n in range(len(self.triangles))]
        jets = [[self.corner_jets[v] for v in tri] for tri in self.triangles]
        return hermite.level_from_data(tris, [tuple(t) for t in self.triangles], jets, edata, self.exact)

    def refine(self, levels: int) -> hermite.RefinementLevel:
        return hermite.refine_levels(self.level0(), levels)


def _on_open_edge(p, T, exact):
    for a in range(3):
        A, B = T[a], T[(a + 1) % 3]
        c = cross(B - A, p - A)
        if (c == 0) if exact else abs(c) <= 1e-12 * max(T.scale(), 1.0) ** 2:
            s = (p - A)[0] * (B - A)[0] + (p - A)[1] * (B - A)[1]
            L = (B - A)[0] ** 2 + (B - A)[1] ** 2
            if 0 < s < L:
                return True
    return False


# ---------------------------------------------------------------------------
# edge data conversion along one edge


def _hermite_weights(degree, smooth, n_end, targets, extra_mid):
    """Weights mapping end data (and optionally the value at 1/2) to target functionals.

    The spline has two pieces on [0, 1/2] and [1/2, 1], degree ``degree``,
    C^smooth at 1/2.  Data: derivatives 0..n_end-1 at 0, then at 1, then the
    value at 1/2 if ``extra_mid``.  Each target is ``(order, point)``.
    """
    half = Fraction(1, 2)
    nc = degree + 1
    ncols = 2 * nc

    def row(piece, order, x):
        # monomials in (x - x0) on each piece, x0 = 0 or 1/2
        x0 = 0 if piece == 0 else half
        r = {}
        for k in range(order, nc):
            r[piece * nc + k] = Fraction(math.factorial(k), math.factorial(k - order)) * (x - x0) ** (k - order)
        return r

    rows, rhs = [], []
    nd = 2 * n_end + int(extra_mid)
    for o in range(n_end):
        rows.append(row(0, o, 0)); rhs.append({o: 1})
    for o in range(n_end):
        rows.append(row(1, o, 1)); rhs.append({n_end + o: 1})
    if extra_mid:
        rows.append(row(0, 0, half)); rhs.append({2 * n_end: 1})
    for o in range(smooth + 1):
        a, b = row(0, o, half), row(1, o, half)
        r = dict(a)
        for c, v in b.items():
            r[c] = r.get(c, 0) - v
        rows.append(r); rhs.append({})
    X = solve(rows, rhs, ncols, nd)
    out = []
    for order, x in targets:
        piece = 0 if x < half or (x == half and order == 0) else 1
        r = row(piece, order, x)
        out.append([sum(w * X[c][k] for c, w in r.items()) for k in range(nd)])
    return out


@lru_cache(maxsize=None)
def _value_weights():
    # C^3 quintic spline from f, f', f'', f''' at both ends: F'(1/2), F''(1/4), F''(3/4)
    q = Fraction(1, 4)
    return _hermite_weights(5, 3, 4, [(1, Fraction(1, 2)), (2, q), (2, 3 * q)], False)


@lru_cache(maxsize=None)
def _cross_weights():
    # C^2 quartic spline from g, g', g'' at both ends and g(1/2): G'(1/4), G'(3/4)
    q = Fraction(1, 4)
    return _hermite_weights(4, 2, 3, [(1, q), (1, 3 * q)], True)


def _weights(table, exact):
    return table if exact else [[float(w) for w in row] for row in table]


def _directional(jet, dirs):
    """Derivative of a Cartesian jet along the given direction vectors."""
    a = sum(1 for _ in dirs)
    coeffs = {(0, 0): 1}
    for d in dirs:
        new = {}
        for (p, q), c in coeffs.items():
            new[(p + 1, q)] = new.get((p + 1, q), 0) + c * d[0]
            new[(p, q + 1)] = new.get((p, q + 1), 0) + c * d[1]
        coeffs = new
    pos = {o: n for n, o in enumerate(JET_ORDERS) if sum(o) == a}
    return sum(c * jet[pos[o]] for o, c in coeffs.items())


def convert_edge_data(jet_i, jet_j, tau, u, data, w):
    """Re-express cross-boundary edge data given along ``u`` in the direction ``w``.

    ``tau = v_j - v_i``; ``data = (f^u mid, f^uu near i, f^uu near j)``.
    Returns ``(f^w mid, f^ww near i, f^ww near j)``.  With ``w = a u + b tau``
    the tangential parts come from the cubic-order Hermite splines along the edge.
    """
    det = cross(u, tau)
    if det == 0:
        raise TriangulationError("edge-data direction is parallel to the edge")
    a = cross(w, tau) / det
    b = cross(u, w) / det
    g, h_i, h_j = data
    if a == 1 and b == 0:
        return g, h_i, h_j
    exact = isinstance(det, (int, Fraction))
    F = [_directional(jet_i, [tau] * k) for k in range(4)] + [_directional(jet_j, [tau] * k) for k in range(4)]
    G = [_directional(jet_i, [u] + [tau] * k) for k in range(3)] + [_directional(jet_j, [u] + [tau] * k) for k in range(3)] + [g]
    Fw = [sum(x * y for x, y in zip(r, F)) for r in _weights(_value_weights(), exact)]
    Gw = [sum(x * y for x, y in zip(r, G)) for r in _weights(_cross_weights(), exact)]
    mid = a * g + b * Fw[0]
    near_i = a * a * h_i + 2 * a * b * Gw[0] + b * b * Fw[1]
    near_j = a * a * h_j + 2 * a * b * Gw[1] + b * b * Fw[2]
    return mid, near_i, near_j


# ---------------------------------------------------------------------------
# JSON


def _num(x, exact):
    try:
        return scalar(x, exact)
    except (TypeError, ValueError, ZeroDivisionError) as err:
        raise TriangulationError(f"bad number {x!r}") from err


def load_triangulation(document) -> MacroTriangulation:
    """Parse and validate a triangulation document (dict, JSON text or path-like file object)."""
    if hasattr(document, "read"):
        document = json.load(document)
    elif isinstance(document, (str, bytes)):
        document = json.loads(document)
    fmt = document.get("format", FORMAT_VERSION)
    if fmt != FORMAT_VERSION:
        raise TriangulationError(f"unsupported format {fmt}")
    arithmetic = document.get("arithmetic", EXACT)
    if arithmetic not in MODES:
        raise TriangulationError(f"unknown arithmetic {arithmetic!r}")
    exact = arithmetic == EXACT
    try:
        verts = [Point(_num(x, exact), _num(y, exact)) for x, y in document["vertices"]]
        tris = [tuple(int(v) for v in t) for t in document["triangles"]]
    except KeyError as err:
        raise MissingDataError(f"missing key {err}") from err
    except (TypeError, ValueError) as err:
        raise TriangulationError("malformed vertices or triangles") from err
    tri = MacroTriangulation(verts, tris, arithmetic)
    tri.validate()
    jets = document.get("corner_jets")
    if jets is not None:
        if len(jets) != len(verts) or any(len(j) != 10 for j in jets):
            raise MissingDataError("corner_jets needs 10 entries per vertex")
        tri.corner_jets = [CornerJet(*(_num(x, exact) for x in j)) for j in jets]
    edges = tri.edges()
    for key, ed in document.get("edge_data", {}).items():
        try:
            i, j = (int(s) for s in key.split("-"))
        except ValueError as err:
            raise TriangulationError(f"bad edge key {key!r}") from err
        if i >= j:
            raise TriangulationError(f"edge key {key!r} must have i < j")
        if (i, j) not in edges:
            raise NonConformingMeshError(f"edge {key} is not an edge of the mesh")
        try:
            tri.edge_data[(i, j)] = EdgeData(
                ed.get("mode", "normal"),
                _num(ed["d1_mid"], exact),
                _num(ed["d2_quarter_near_i"], exact),
                _num(ed["d2_quarter_near_j"], exact),
            )
        except KeyError as err:
            raise MissingDataError(f"edge {key} lacks {err}") from err
        if tri.edge_data[(i, j)].mode not in ("normal", "medial"):
            raise TriangulationError(f"edge {key}: unknown mode {ed['mode']!r}")
    if "edge_data" in document and len(tri.edge_data) != len(edges):
        raise MissingDataError(f"edge data given for {len(tri.edge_data)} of {len(edges)} edges")
    return tri


def to_document(tri: MacroTriangulation) -> dict:
    doc = {
        "format": FORMAT_VERSION,
        "arithmetic": tri.arithmetic,
        "vertices": [[format_scalar(p.x), format_scalar(p.y)] for p in tri.vertices],
        "triangles": [list(t) for t in tri.triangles],
    }
    if tri.corner_jets is not None:
        doc["corner_jets"] = [[format_scalar(x) for x in j] for j in tri.corner_jets]
    if tri.edge_data:
        doc["edge_data"] = {
            f"{i}-{j}": {
                "mode": ed.mode,
                "d1_mid": format_scalar(ed.d1_mid),
                "d2_quarter_near_i": format_scalar(ed.d2_near_i),
                "d2_quarter_near_j": format_scalar(ed.d2_near_j),
            }
            for (i, j), ed in sorted(tri.edge_data.items())
        }
    return doc


def dumps(tri: MacroTriangulation) -> str:
    """JSON text with one vertex, triangle, jet or edge record per line."""
    parts = []
    for key, value in to_document(tri).items():
        if isinstance(value, list):
            body = ",\n  ".join(json.dumps(x) for x in value)
            parts.append(f' "{key}": [\n  {body}\n ]')
        elif isinstance(value, dict):
            body = ",\n  ".join(f"{json.dumps(k)}: {json.dumps(v)}" for k, v in value.items())
            parts.append(f' "{key}": {{\n  {body}\n }}')
        else:
            parts.append(f' "{key}": {json.dumps(value)}')
    return "{\n" + ",\n".join(parts) + "\n}"


# ---------------------------------------------------------------------------
# test data


class Poly2:
    """Bivariate polynomial ``sum c[(a, b)] x^a y^b``."""

    def __init__(self, coeffs: dict):
        self.coeffs = {tuple(k): v for k, v in coeffs.items() if v != 0}

    @property
    def degree(self) -> int:
        return max((a + b for a, b in self.coeffs), default=0)

    @classmethod
    def from_json(cls, doc, exact=True) -> "Poly2":
        """``{"terms": [[a, b, c], ...]}`` with c a number or "p/q" string."""
        return cls({(int(a), int(b)): scalar(c, exact) for a, b, c in doc["terms"]})

    def derivative(self, p: int, q: int) -> "Poly2":
        out = {}
        for (a, b), c in self.coeffs.items():
            if a >= p and b >= q:
                out[(a - p, b - q)] = c * math.perm(a, p) * math.perm(b, q)
        return Poly2(out)

    def __call__(self, x, y):
        return sum(c * x**a * y**b for (a, b), c in self.coeffs.items())

    def jet(self, pt) -> CornerJet:
        return CornerJet(*(self.derivative(p, q)(pt[0], pt[1]) for p, q in JET_ORDERS))

    def directional(self, pt, dirs):
        return _directional(self.jet(pt), dirs)


def sample_polynomial(poly: Poly2, tri: MacroTriangulation, mode: str = "normal") -> MacroTriangulation:
    """Fill all nodal data of ``tri`` from ``poly`` (normal-mode edge data by default)."""
    if poly.degree > 5:
        raise ValueError(f"degree {poly.degree} > 5: quintic reproduction does not apply")
    exact = tri.exact
    conv = (lambda x: scalar(x, True)) if exact else float
    p = Poly2({k: conv(c) for k, c in poly.coeffs.items()})
    out = MacroTriangulation(list(tri.vertices), list(tri.triangles), tri.arithmetic)
    out.corner_jets = [p.jet(v) for v in tri.vertices]
    for (i, j), owners in out.edges().items():
        vi, vj = tri.vertices[i], tri.vertices[j]
        u = out._direction((i, j), mode, owners)
        qi = _lerp(vi, vj, Fraction(1, 4), exact)
        qj = _lerp(vi, vj, Fraction(3, 4), exact)
        out.edge_data[(i, j)] = EdgeData(
            mode, p.directional(midpoint(vi, vj), [u]), p.directional(qi, [u, u]), p.directional(qj, [u, u])
        )
    return out


def _lerp(p, q, s, exact):
    s = s if exact else float(s)
    return Point(p.x + s * (q.x - p.x), p.y + s * (q.y - p.y))


def delta_data(tri: MacroTriangulation, vertex_index: int) -> MacroTriangulation:
    """All-zero nodal data except the value 1 at one vertex.

    The edge functionals are medial derivatives, so the zeros are written in
    medial mode; zero normal derivatives are a different spline unless the
    medial vectors are perpendicular to the edges.
    """
    if not 0 <= vertex_index < len(tri.vertices):
        raise IndexError(f"vertex index {vertex_index} out of range")
    zero = Fraction(0) if tri.exact else 0.0
    one = Fraction(1) if tri.exact else 1.0
    out = MacroTriangulation(list(tri.vertices), list(tri.triangles), tri.arithmetic)
    out.corner_jets = [CornerJet(one if v == vertex_index else zero, *([zero] * 9)) for v in range(len(tri.vertices))]
    out.edge_data = {e: EdgeData("medial", zero, zero, zero) for e in out.edges()}
    return out


def hexagon(arithmetic: str = EXACT) -> MacroTriangulation:
    """Six triangles around the origin.

    Exact mode uses the affine lattice hexagon with corners (1,0), (1,1), (0,1),
    (-1,0), (-1,-1), (0,-1); the linear map [[1, -1], [1, 0]] permutes it
    cyclically, just as the rotation by 60 degrees does for the regular hexagon
    used in f64 mode.
    """
    if arithmetic == EXACT:
        ring = [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)]
        verts = [Point(Fraction(0), Fraction(0))] + [Point(Fraction(x), Fraction(y)) for x, y in ring]
    elif arithmetic == FLOAT:
        verts = [Point(0.0, 0.0)] + [
            Point(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)
        ]
    else:
        raise TriangulationError(f"unknown arithmetic {arithmetic!r}")
    tris = [(0, 1 + k, 1 + (k + 1) % 6) for k in range(6)]
    return MacroTriangulation(verts, tris, arithmetic).validate()


HEXAGON_ROTATION = ((1, -1), (1, 0))


def two_triangles(arithmetic: str = EXACT) -> MacroTriangulation:
    """<v1, v2, v3> = <(0,0), (1,0), (0,1)> and its neighbour with corner (1,1)."""
    conv = Fraction if arithmetic == EXACT else float
    verts = [Point(conv(x), conv(y)) for x, y in ((0, 0), (1, 0), (0, 1), (1, 1))]
    return MacroTriangulation(verts, [(0, 1, 2), (3, 2, 1)], arithmetic).validate()


# ---------------------------------------------------------------------------
# export


@dataclass
class SurfaceMesh:
    positions: list  # (x, y, f) floats
    normals: list  # unit (nx, ny, nz)
    faces: list  # 0-based index triples
    values: list | None = None  # exact f values, when available


def surface_mesh(level: hermite.RefinementLevel) -> SurfaceMesh:
    """Deduplicated triangle mesh of one refinement level."""
    index = {}
    positions, normals, values = [], [], []
    local = []
    for m, mj in enumerate(level.macros):
        ids = {}
        for i, j in mj.indices():
            key = level.key(m, i, j)
            if key not in index:
                index[key] = len(positions)
                p = mj.point(i, j)
                cj = level.cartesian_jet(m, i, j)
                positions.append((float(p.x), float(p.y), float(cj.f)))
                normals.append(hermite.surface_normal(cj))
                values.append(cj.f)
            ids[(i, j)] = index[key]
        local.append(ids)
    faces = []
    M = level.size
    for ids in local:
        for i in range(M):
            for j in range(M - i):
                faces.append((ids[(i, j)], ids[(i + 1, j)], ids[(i, j + 1)]))
                if i + j <= M - 2:
                    faces.append((ids[(i + 1, j)], ids[(i + 1, j + 1)], ids[(i, j + 1)]))
    return SurfaceMesh(positions, normals, faces, values)


def export_mesh(level, fmt: str = "obj") -> bytes:
    mesh = level if isinstance(level, SurfaceMesh) else surface_mesh(level)
    if fmt == "obj":
        out = io.StringIO()
        out.write(f"# {len(mesh.positions)} vertices, {len(mesh.faces)} faces\n")
        for x, y, z in mesh.positions:
            out.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
        for x, y, z in mesh.normals:
            out.write(f"vn {x:.17g} {y:.17g} {z:.17g}\n")
        for a, b, c in mesh.faces:
            out.write(f"f {a + 1}//{a + 1} {b + 1}//{b + 1} {c + 1}//{c + 1}\n")
        return out.getvalue().encode()
    if fmt == "ply":
        head = (
            "ply\nformat binary_little_endian 1.0\n"
            f"element vertex {len(mesh.positions)}\n"
            "property double x\nproperty double y\nproperty double z\n"
            "property double nx\nproperty double ny\nproperty double nz\n"
            f"element face {len(mesh.faces)}\n"
            "property list uchar int vertex_indices\nend_header\n"
        )
        body = bytearray(head.encode("ascii"))
        for p, n in zip(mesh.positions, mesh.normals):
            body += struct.pack("<6d", *p, *n)
        for f in mesh.faces:
            body += struct.pack("<B3i", 3, *f)
        return bytes(body)
    raise ValueError(f"unknown mesh format {fmt!r}")


def default_field_frame(tri: MacroTriangulation):
    """Frame (t, m) of the edge opposite corner 0 of triangle 0."""
    return tangent_medial(tri.triangle(0), 0)


def derivative_field(level: hermite.RefinementLevel, which: str, frame) -> list:
    """Rows ``(x, y, value, macro)``; points on macro edges appear once per macro."""
    key = "" if which == "f" else which
    if key not in JET_NAMES:
        raise ValueError(f"unknown derivative selector {which!r}")
    n = JET_NAMES.index(key)
    rows = []
    for m, i, j, p in level.points():
        rows.append((p.x, p.y, level.frame_jet(m, i, j, frame)[n], m))
    return rows


def export_derivative_field(level, which: str, frame) -> str:
    out = io.StringIO()
    out.write("x,y,value,macro\n")
    for x, y, v, m in derivative_field(level, which, frame):
        out.write(f"{_fmt(x)},{_fmt(y)},{_fmt(v)},{m}\n")
    return out.getvalue()


def _fmt(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator == 1 else f"{float(x):.17g}"
    return f"{float(x):.17g}"
