import numpy as np
import pytest

from moyalcalc import PhaseSpace, PolySymbol


@pytest.fixture
def rng():
    return np.random.default_rng(0x5EED)


def random_poly(space, rng, degree=3, terms=4, complex_coeffs=True):
    """Random integer-coefficient polynomial (exact under float arithmetic,
    exact under the symbolic oracle's Rational conversion)."""
    picks = {}
    for _ in range(terms):
        exp = [0] * space.dim
        for _ in range(int(rng.integers(0, degree + 1))):
            exp[int(rng.integers(0, space.dim))] += 1
        c = float(rng.integers(-3, 4))
        if complex_coeffs:
            c = complex(c, float(rng.integers(-3, 4)))
        picks[tuple(exp)] = picks.get(tuple(exp), 0j) + c
    p = PolySymbol(space, picks)
    # keep the draw nonzero so products and brackets stay informative
    return p if not p.is_zero else PolySymbol.one(space)


def spaces_n12():
    return [PhaseSpace(1), PhaseSpace(2)]
