"""Sparse exact Gauss-Jordan elimination over the rationals.

Rows are ``{column: value}`` dicts.  Values are carried as ``gmpy2.mpq``
internally (much faster than :class:`fractions.Fraction`) and converted back
to ``Fraction`` on the way out.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction

import gmpy2

mpq = gmpy2.mpq


class RankDeficientError(ArithmeticError):
    """The system does not have a unique solution."""


class InconsistentSystemError(ArithmeticError):
    pass


def _q(x):
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def _f(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


class Elimination:
    """Incremental reduced row echelon form.

    Columns ``>= ncols`` are augmented (right-hand side) columns: they are
    carried along but never chosen as pivots.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivots: dict[int, dict] = {}  # pivot column -> row with 1 in that column
        self.where: dict[int, set] = defaultdict(set)  # column -> pivot columns whose row uses it
        self.zero_rows: list[dict] = []  # leftovers with no pivotable entry

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _set_row(self, p, row):
        old = self.pivots.get(p)
        if old is not None:
            for c in old:
                self.where[c].discard(p)
        self.pivots[p] = row
        for c in row:
            self.where[c].add(p)

    def add(self, row: dict) -> None:
        r = {c: _q(v) for c, v in row.items() if v != 0}
        for p in [c for c in r if c in self.pivots]:
            f = r.get(p)
            if not f:
                continue
            for c, v in self.pivots[p].items():
                nv = r.get(c, 0) - f * v
                if nv:
                    r[c] = nv
                else:
                    r.pop(c, None)
        cands = [c for c in r if c < self.ncols]
        if not cands:
            if r:
                self.zero_rows.append(r)
            return
        # sparsest elimination first, ties broken by column index for determinism
        p = min(cands, key=lambda c: (len(self.where.get(c, ())), c))
        inv = 1 / r[p]
        r = {c: v * inv for c, v in r.items()}
        for q in list(self.where.get(p, ())):
            row = self.pivots[q]
            f = row[p]
            new = dict(row)
            for c, v in r.items():
                nv = new.get(c, 0) - f * v
                if nv:
                    new[c] = nv
                else:
                    new.pop(c, None)
            self._set_row(q, new)
        self._set_row(p, r)

    def add_all(self, rows) -> "Elimination":
        for row in rows:
            self.add(row)
        return self

    def consistent(self) -> bool:
        return not self.zero_rows

    def free_columns(self) -> list[int]:
        return [c for c in range(self.ncols) if c not in self.pivots]


def rank(rows, ncols: int) -> int:
    return Elimination(ncols).add_all(rows).rank


def nullspace(rows, ncols: int) -> list[list[Fraction]]:
    """Basis of {x : rows @ x = 0}, one vector per free column."""
    el = Elimination(ncols).add_all(rows)
    basis = []
    for f in el.free_columns():
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for p, row in el.pivots.items():
            v = row.get(f)
            if v:
                x[p] = -_f(v)
        basis.append(x)
    return basis


def solve(rows, rhs, ncols: int, nrhs: int) -> list[list[Fraction]]:
    """Unique solution X (ncols x nrhs) of ``rows @ X = rhs``.

    ``rhs[i]`` is a ``{rhs_column: value}`` dict for row ``i``.  Raises
    :class:`RankDeficientError` or :class:`InconsistentSystemError`.
    """
    el = Elimination(ncols)
    for row, b in zip(rows, rhs):
        aug = dict(row)
        for k, v in b.items():
            if v:
                aug[ncols + k] = -v
        el.add(aug)
    if not el.consistent():
        raise InconsistentSystemError(f"{len(el.zero_rows)} rows reduce to 0 = nonzero")
    if el.rank < ncols:
        raise RankDeficientError(f"rank {el.rank} < {ncols} unknowns")
    X = [[Fraction(0)] * nrhs for _ in range(ncols)]
    for p, row in el.pivots.items():
        for c, v in row.items():
            if c >= ncols:
                X[p][c - ncols] = -_f(v)
    return X
