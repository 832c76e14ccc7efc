"""Command line interface: ``ps12 {derive-rules, refine, field, verify, sample}``."""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import hermite, macro_solver, rules, surface_io
from .bb_core import Triangle
from .splits import ps6_split, ps12_split, tangent_medial


def _load(path):
    with open(path) as fh:
        return surface_io.load_triangulation(fh)


def _write(path, data):
    if path in (None, "-"):
        out = sys.stdout.buffer
        out.write(data if isinstance(data, bytes) else data.encode())
        out.flush()
    else:
        Path(path).write_bytes(data if isinstance(data, bytes) else data.encode())


def format_rules_text(table: macro_solver.RuleTable) -> str:
    lines = []
    for out, terms in table.rules.items():
        rhs = " ".join(f"{'-' if w < 0 else '+'} {abs(w)} {name}" for name, w in terms.items())
        lines.append(f"{out} = {rhs.lstrip('+ ')}")
    return "\n".join(lines) + "\n"


def cmd_derive_rules(args):
    t0 = time.perf_counter()
    if args.element == "ps12":
        table = macro_solver.derive_init_rules()
    else:
        table = macro_solver.derive_subdiv_rules()
    text = table.dumps() + "\n" if args.format == "json" else format_rules_text(table)
    _write(args.out, text)
    print(f"derived {len(table.rules)} rules in {time.perf_counter() - t0:.2f} s", file=sys.stderr)
    return 0


def _require_data(tri):
    if not tri.has_data():
        raise surface_io.MissingDataError("the document carries no nodal data; run `ps12 sample` first")


def cmd_refine(args):
    tri = _load(args.input)
    _require_data(tri)
    level = tri.refine(args.levels)
    fmt = args.format or Path(args.out).suffix.lstrip(".").lower() or "obj"
    _write(args.out, surface_io.export_mesh(level, fmt))
    print(f"level {args.levels}: {level.num_triangles()} triangles", file=sys.stderr)
    return 0


def cmd_field(args):
    tri = _load(args.input)
    _require_data(tri)
    level = tri.refine(args.levels)
    frame = surface_io.default_field_frame(tri)
    _write(args.out, surface_io.export_derivative_field(level, args.which, frame))
    return 0


def cmd_sample(args):
    with open(args.poly) as fh:
        doc = json.load(fh)
    mesh = _load(args.mesh)
    poly = surface_io.Poly2.from_json(doc, mesh.exact)
    data = surface_io.sample_polynomial(poly, mesh, args.mode)
    _write(args.out, surface_io.dumps(data) + "\n")
    return 0


# ---------------------------------------------------------------------------
# verify suites


def _random_poly(rng, exact=True):
    return surface_io.Poly2({
        (a, b): Fraction(rng.randint(-20, 20), rng.randint(1, 9))
        for a in range(6) for b in range(6 - a)
    })


def _random_data(tri, rng):
    r = lambda: Fraction(rng.randint(-20, 20), rng.randint(1, 9))  # noqa: E731
    out = surface_io.MacroTriangulation(list(tri.vertices), list(tri.triangles), tri.arithmetic)
    out.corner_jets = [hermite.CornerJet(*(r() for _ in range(10))) for _ in tri.vertices]
    out.edge_data = {e: surface_io.EdgeData("normal", r(), r(), r()) for e in tri.edges()}
    return out


def suite_rules():
    for name, derived, baked in (
        ("initialization", macro_solver.derive_init_rules(), rules.INIT_RULES),
        ("subdivision", macro_solver.derive_subdiv_rules(), rules.SUBDIV_RULES),
    ):
        same = derived.rules == rules.as_fractions(baked)
        yield same, f"{name} rules re-derived ({len(derived.rules)} formulas)"


def suite_nullity():
    T = Triangle.of((0, 0), (1, 0), (0, 1))
    n12 = macro_solver.smoothness_nullity(ps12_split(T))
    n6 = macro_solver.smoothness_nullity(ps6_split(T))
    yield n12 == 39, f"12-split space dimension {n12} (expected 39)"
    yield n6 == 30, f"6-split space dimension {n6} (expected 30)"


def suite_reproduction(count=3, levels=3):
    rng = random.Random(0)
    tri = surface_io.two_triangles()
    for k in range(count):
        poly = _random_poly(rng)
        level = surface_io.sample_polynomial(poly, tri).refine(levels)
        bad = sum(
            1 for m, i, j, p in level.points()
            if tuple(level.cartesian_jet(m, i, j)) != tuple(poly.jet(p))
        )
        yield bad == 0, f"quintic {k}: {bad} wrong jets at level {levels}"


def suite_smoothness(levels=3):
    rng = random.Random(1)
    level = _random_data(surface_io.two_triangles(), rng).refine(levels)
    bad = hermite.two_sided_mismatches(level, max_order=2)
    yield not bad, f"values and derivatives up to order 2 agree across macro edges ({len(bad)} mismatches)"
    bad = hermite.interior_edge_mismatches(level)
    yield not bad, f"all derivatives agree across edges inside macro-triangles ({len(bad)} mismatches)"
    delta = surface_io.delta_data(surface_io.two_triangles(), 2)
    level = delta.refine(levels)
    jumps = hermite.edge_jump(level, 0, 1, tangent_medial(delta.triangle(0), 0))
    third = [j.mmm for j in jumps.values()]
    others = all(x == 0 for j in jumps.values() for x in j[:9])
    yield others and any(third), "delta spline: only the cross-boundary f^mmm jumps across the shared edge"


def suite_examples():
    hexa = surface_io.delta_data(surface_io.hexagon(), 0)
    level = hexa.refine(5)
    centre = level.jet(0, 0, 0)[0]
    yield centre == 1, f"hexagon centre value after 5 levels = {centre}"
    g0 = level.macros[0]
    same = all(
        list(mj.grid[i, j]) == list(g0.grid[i, j]) for mj in level.macros for i, j in g0.indices()
    )
    yield same, "hexagon data invariant under the order-6 symmetry"
    faces = len(surface_io.surface_mesh(level).faces)
    yield faces == 6144, f"hexagon mesh at level 5 has {faces} faces"
    yield from suite_smoothness()


SUITES = {
    "rules": suite_rules,
    "reproduction": suite_reproduction,
    "nullity": suite_nullity,
    "smoothness": suite_smoothness,
    "examples": suite_examples,
}


def cmd_verify(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    failed = 0
    for name in names:
        for ok, msg in SUITES[name]():
            print(f"{'PASS' if ok else 'FAIL'} [{name}] {msg}")
            failed += not ok
    return 1 if failed else 0


def build_parser():
    p = argparse.ArgumentParser(prog="ps12", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("derive-rules", help="derive midpoint rules in exact arithmetic")
    d.add_argument("--element", choices=("ps12", "ps6"), default="ps12",
                   help="ps12: initialization rules, ps6: subdivision rules")
    d.add_argument("--out", default="-")
    d.add_argument("--format", choices=("json", "text"), default="json")
    d.set_defaults(func=cmd_derive_rules)

    r = sub.add_parser("refine", help="refine a triangulation and write a mesh")
    r.add_argument("--input", required=True)
    r.add_argument("--levels", type=int, default=3)
    r.add_argument("--out", required=True)
    r.add_argument("--format", choices=("obj", "ply"))
    r.set_defaults(func=cmd_refine)

    f = sub.add_parser("field", help="write one jet entry at all refined points as CSV")
    f.add_argument("--input", required=True)
    f.add_argument("--levels", type=int, default=3)
    f.add_argument("--which", choices=("f",) + macro_solver.JET_NAMES[1:], default="mmm")
    f.add_argument("--out", default="-")
    f.set_defaults(func=cmd_field)

    v = sub.add_parser("verify", help="run a self-check suite")
    v.add_argument("--suite", choices=tuple(SUITES) + ("all",), default="all")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sample", help="fill nodal data from a polynomial of degree <= 5")
    s.add_argument("--poly", required=True, help='JSON {"terms": [[a, b, c], ...]} for c x^a y^b')
    s.add_argument("--mesh", required=True)
    s.add_argument("--out", default="-")
    s.add_argument("--mode", choices=("normal", "medial"), default="normal")
    s.set_defaults(func=cmd_sample)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (surface_io.TriangulationError, hermite.MissingDataError, ValueError, OSError) as err:
        print(f"ps12: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
