import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def rand_q(rng, lo=-20, hi=20, den=9):
    return Fraction(rng.randint(lo, hi), rng.randint(1, den))


def rand_triangle(rng, exact=True):
    """Random counterclockwise triangle with rational (or float) corners, not too thin."""
    from ps12.bb_core import Triangle

    while True:
        pts = [(rand_q(rng, -6, 6, 4), rand_q(rng, -6, 6, 4)) for _ in range(3)]
        T = Triangle.of(*pts)
        area = T.signed_area()
        if abs(area) < Fraction(1, 2):
            continue
        if area < 0:
            T = Triangle(T.v1, T.v3, T.v2)
        if not exact:
            T = Triangle.of(*[(float(p.x), float(p.y)) for p in T])
        return T


@pytest.fixture
def rng():
    return random.Random(20240611)
