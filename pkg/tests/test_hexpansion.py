"""Truncation bookkeeping for h-expansions: the container must never invent
coefficients it was not given."""

import numpy as np
import pytest

from conftest import random_poly
from moyalcalc import (
    HExpansion,
    PhaseSpace,
    PolySymbol,
    TruncationError,
    lift,
)

SP = PhaseSpace(1)
X = PolySymbol.coordinate(SP, 0)
XI = PolySymbol.coordinate(SP, 1)


def test_constructor_coefficient_count():
    with pytest.raises(ValueError):
        HExpansion(SP, 0, 2, [X])  # needs 3
    e = HExpansion(SP, 0, 2, [X, XI, X])
    assert e.h_min == 0 and e.trunc == 2


def test_from_powers_infers_order():
    e = HExpansion.from_powers(SP, {0: X, 2: XI}, 3)
    assert e.h_min == 0
    assert e.coefficient(1).is_zero
    assert e.coefficient(2) == XI
    neg = HExpansion.from_powers(SP, {-1: X}, 1)
    assert neg.h_min == -1 and neg.order == 1
    with pytest.raises(TruncationError):
        HExpansion.from_powers(SP, {4: X}, 3)


def test_coefficient_access_rules():
    e = HExpansion.from_powers(SP, {1: X}, 2)
    # below the leading power: structurally zero
    assert e.coefficient(0).is_zero
    assert e.coefficient(-5).is_zero
    # beyond trunc: loudly undefined, never silently zero
    with pytest.raises(TruncationError):
        e.coefficient(3)


def test_addition_takes_min_trunc():
    a = lift(X, 3)
    b = lift(XI, 2)
    s = a + b
    assert s.trunc == 2
    assert s.coefficient(0) == X + XI
    d = a - b
    assert d.coefficient(0) == X - XI
    assert (a + 1.0).coefficient(0) == X + 1.0


def test_scalar_multiple_only():
    a = lift(X, 2)
    assert (a * 2.0).coefficient(0) == X * 2.0
    assert (0.5j * a).coefficient(0) == X * 0.5j
    with pytest.raises(TypeError):
        a * XI  # symbol products must go through the star product


def test_times_h_power_shifts_both_ends():
    e = HExpansion.from_powers(SP, {0: X, 1: XI}, 1)
    up = e.times_h_power(2)
    assert up.h_min == 2 and up.trunc == 3
    assert up.coefficient(2) == X and up.coefficient(3) == XI
    down = e.times_h_power(-1)
    assert down.h_min == -1 and down.trunc == 0
    assert down.coefficient(-1) == X


def test_truncate_never_extends():
    e = lift(X, 3)
    assert e.truncate(1).trunc == 1
    with pytest.raises(TruncationError):
        e.truncate(4)


def test_asserting_exact_tail_pads_zeros():
    e = HExpansion.from_powers(SP, {0: X}, 1)
    ext = e.asserting_exact_tail(4)
    assert ext.trunc == 4
    assert ext.coefficient(4).is_zero
    assert ext.coefficient(0) == X


def test_evaluate_sums_the_series(rng):
    a0 = random_poly(SP, rng)
    a1 = random_poly(SP, rng)
    e = HExpansion.from_powers(SP, {0: a0, 1: a1}, 1)
    pts = rng.normal(size=(10, 2))
    h = 0.01
    np.testing.assert_allclose(
        e.evaluate(pts, h), a0.evaluate(pts) + h * a1.evaluate(pts),
        rtol=1e-12, atol=1e-14)


def test_lift_has_exact_zero_tail():
    e = lift(X, 5)
    assert e.h_min == 0 and e.trunc == 5
    for j in range(1, 6):
        assert e.coefficient(j).is_zero


def test_equality_and_allclose():
    a = HExpansion.from_powers(SP, {0: X, 1: XI}, 1)
    b = HExpansion.from_powers(SP, {0: X, 1: XI}, 1)
    assert a == b and hash(a) == hash(b)
    c = a + HExpansion.from_powers(SP, {1: PolySymbol.constant(SP, 1e-14)}, 1)
    assert a.allclose(c, 1e-12)
    assert not a.allclose(c, 1e-16)
    # allclose compares over the shared range only
    assert a.allclose(a.truncate(0), 1e-12)


def test_json_roundtrip(rng):
    e = HExpansion.from_powers(
        SP, {0: random_poly(SP, rng), 2: random_poly(SP, rng)}, 2)
    back = HExpansion.from_json_obj(SP, e.to_json_obj())
    assert back == e


def test_map_and_conjugate():
    e = HExpansion.from_powers(SP, {0: X * 1j}, 1)
    assert e.conjugate().coefficient(0) == X * -1j
    doubled = e.map_coeffs(lambda c: c * 2)
    assert doubled.coefficient(0) == X * 2j


def test_immutable():
    e = lift(X, 1)
    with pytest.raises(AttributeError):
        e.trunc = 7


def test_coeff_norms_and_lowest_order():
    e = HExpansion.from_powers(
        SP, {1: PolySymbol.constant(SP, 1e-14), 2: X}, 3)
    assert e.lowest_order() == 1
    assert e.lowest_order(tol=1e-10) == 2
    norms = e.coeff_norms()
    assert norms[2] == 1.0 and norms[3] == 0.0
    assert HExpansion.zero(SP, 3).is_zero()
