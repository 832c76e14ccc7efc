"""Scalar handling for the two arithmetic modes.

Every numeric routine in the package works on plain Python numbers: exact
mode uses :class:`fractions.Fraction`, float mode uses ``float``.  The helpers
here only cover conversion at the boundaries (parsing, formatting, tolerances).
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

EXACT = "exact"
FLOAT = "f64"
MODES = (EXACT, FLOAT)


def is_exact(x) -> bool:
    return isinstance(x, Rational)


def scalar(value, exact: bool):
    """Convert ``value`` (int, float, Fraction or "p/q" string) to the mode's type."""
    if exact:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, float):
            # decimal reading, so 0.1 means 1/10
            return Fraction(repr(value))
        return Fraction(value)
    if isinstance(value, str):
        return float(Fraction(value))
    return float(value)


def format_scalar(x):
    """JSON-friendly representation: "p/q" strings for rationals, floats otherwise."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return x
    return float(x)


def div(a, b):
    """Division that stays exact when both operands are integers or rationals."""
    if isinstance(a, int) and isinstance(b, int):
        return Fraction(a, b)
    return a / b


def is_zero(x, tol: float = 0.0) -> bool:
    if is_exact(x):
        return x == 0
    return abs(x) <= tol


def close(a, b, rel: float = 1e-12, scale=1.0) -> bool:
    """Exact equality for rationals, relative closeness otherwise."""
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(a - b) <= rel * max(abs(scale), abs(a), abs(b), 1.0)
