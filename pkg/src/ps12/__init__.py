"""C2 quintic splines on Powell-Sabin 12-splits and their Hermite subdivision scheme.

Modules:
    bb_core       Bernstein-Bezier patches on triangles
    splits        Powell-Sabin 6- and 12-splits, edge frames
    smoothness    C^r conditions between neighbouring patches
    macro_solver  nodal functionals, exact solves, rule derivation
    hermite       midpoint rules and uniform refinement
    surface_io    triangulation documents, sample data, mesh export
"""

__version__ = "0.1.0"
