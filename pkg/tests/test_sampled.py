"""Sampled-grid backend: finite-difference fidelity and interop with the
polynomial backend."""

import numpy as np
import pytest

from conftest import random_poly
from moyalcalc import (
    Cutoff,
    DimensionMismatchError,
    HExpansion,
    PhaseSpace,
    PolySymbol,
    Region,
    SampleGrid,
    SampledSymbol,
    StarContext,
    apply_cutoff,
    lift,
    sample,
    star,
    star_inverse,
)

SP1 = PhaseSpace(1)
X = PolySymbol.coordinate(SP1, 0)
XI = PolySymbol.coordinate(SP1, 1)
BOX1 = Region.box([(-1.0, 1.0), (-1.0, 1.0)])


def box_grid(points=33):
    return SampleGrid.for_region(BOX1, points)


def test_grid_geometry():
    g = box_grid(11)
    assert g.shape == (11, 11)
    assert g.spacing == (0.2, 0.2)
    pts = g.points()
    assert pts.shape == (11, 11, 2)
    np.testing.assert_allclose(pts[0, 0], [-1.0, -1.0])
    np.testing.assert_allclose(pts[-1, -1], [1.0, 1.0])
    assert g.mask() is None  # box regions need no mask


def test_grid_mask_for_ball():
    ball = Region.ball([0.0, 0.0], 1.0)
    g = SampleGrid.for_region(ball, 21)
    mask = g.mask()
    assert mask.shape == (21, 21)
    assert mask[10, 10] and not mask[0, 0]


def test_grid_rejects_tiny_axes():
    with pytest.raises(ValueError):
        SampleGrid(SP1, ((-1.0, 1.0), (-1.0, 1.0)), (4, 4))


def test_sample_matches_evaluate(rng):
    g = box_grid()
    p = random_poly(SP1, rng)
    s = sample(p, g)
    np.testing.assert_allclose(s.values, p.evaluate(g.points()), rtol=1e-13)
    c = sample(2.5 - 1j, g)
    assert np.all(c.values == 2.5 - 1j)
    f = sample(lambda pts: pts[..., 0] + 2.0 * pts[..., 1], g)
    np.testing.assert_allclose(f.values, (X + 2.0 * XI).evaluate(g.points()))


def test_fd_derivative_exact_on_low_degree(rng):
    # the 4th-order stencils (one-sided rows included) differentiate
    # polynomials of degree <= 4 without truncation error
    g = box_grid(17)
    p = random_poly(SP1, rng, degree=4, terms=6)
    s = sample(p, g)
    for axis in (0, 1):
        want = p.derivative(axis).evaluate(g.points())
        got = s.derivative(axis).values
        np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-9)


def test_fd_fourth_order_convergence():
    # halving the spacing must shrink the smooth-function error ~16x
    def f(pts):
        return np.exp(np.sin(2.0 * pts[..., 0]) + 0.5 * pts[..., 1])

    def dfdx(pts):
        return 2.0 * np.cos(2.0 * pts[..., 0]) * f(pts)

    errs = []
    for m in (41, 81):
        g = SampleGrid(SP1, BOX1.intervals, (m, m))
        err = np.abs(sample(f, g).derivative(0).values - dfdx(g.points()))
        errs.append(err.max())
    ratio = errs[0] / errs[1]
    assert 10.0 < ratio < 40.0


def test_arithmetic_and_mixing(rng):
    g = box_grid()
    p = random_poly(SP1, rng)
    q = random_poly(SP1, rng)
    sp_, sq = sample(p, g), sample(q, g)
    np.testing.assert_allclose((sp_ + sq).values, sample(p + q, g).values, rtol=1e-12)
    np.testing.assert_allclose((sp_ * sq).values, sample(p * q, g).values, rtol=1e-11)
    # polynomial operands are adopted onto the grid, from either side
    np.testing.assert_allclose((sp_ * q).values, (sp_ * sq).values, rtol=1e-12)
    np.testing.assert_allclose((q * sp_).values, (sp_ * sq).values, rtol=1e-12)
    np.testing.assert_allclose((2.0 * sp_ - sp_).values, sp_.values, rtol=1e-12)


def test_grid_mismatch_raises(rng):
    a = sample(X, box_grid(17))
    b = sample(X, box_grid(21))
    with pytest.raises(DimensionMismatchError):
        a + b
    with pytest.raises(DimensionMismatchError):
        sample(a, box_grid(21))


def test_reciprocal():
    g = box_grid()
    s = sample(X + 3.0, g)
    np.testing.assert_allclose((s * s.reciprocal()).values, 1.0)


def test_masked_extrema():
    ball = Region.ball([0.0, 0.0], 1.0)
    g = SampleGrid.for_region(ball, 41)
    s = sample(X + XI, g)
    # corners of the bounding box lie outside the ball and must not count
    assert s.max_abs() < 1.5
    unmasked = SampledSymbol(SampleGrid(SP1, g.intervals, g.shape), s.values)
    assert unmasked.max_abs() > 1.9


def test_apply_cutoff_support():
    g = box_grid(41)
    chi = Cutoff(Region.ball([0.0, 0.0], 0.8), plateau=0.5)
    out = apply_cutoff(X + 1.0, chi, g)
    pts = g.points()
    r = np.hypot(pts[..., 0], pts[..., 1])
    np.testing.assert_allclose(out.values[r > 0.82], 0.0)
    inner = r < 0.38
    np.testing.assert_allclose(out.values[inner], (X + 1.0).evaluate(pts)[inner])


def test_values_are_frozen():
    s = sample(X, box_grid(9))
    with pytest.raises(ValueError):
        s.values[0, 0] = 5.0
    with pytest.raises(AttributeError):
        s.values = np.zeros((9, 9))
    with pytest.raises(TypeError):
        s.evaluate(np.zeros(2))


# ---------------------------------------------------------------------------
# star product on the sampled backend
# ---------------------------------------------------------------------------


def test_sampled_star_matches_polynomial(rng):
    # degree <= 3 inputs keep every stencil application exact, so the two
    # backends must agree to rounding
    g = box_grid(25)
    ctx = StarContext(SP1, 2, BOX1)
    a = random_poly(SP1, rng, degree=3)
    b = random_poly(SP1, rng, degree=3)
    poly = star(a, b, ctx)
    sampled = star(sample(a, g), sample(b, g), ctx)
    pts = g.points()
    for j in range(0, 3):
        want = poly.coefficient(j).evaluate(pts)
        got = sampled.coefficient(j).values
        scale = max(np.abs(want).max(), 1.0)
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-9 * scale)


def test_sampled_star_inverse_nonconstant_principal():
    # 2 + x is elliptic on the box; verify a # a^-1 = 1 away from the edge
    # rows where one-sided stencils differentiate the nonpolynomial 1/(2+x)
    g = box_grid(201)
    ctx = StarContext(SP1, 2, BOX1)
    a = HExpansion.from_powers(SP1, {0: X + 2.0, 1: X * XI}, 2)
    inv = star_inverse(a, ctx, grid=g)
    check = star(a.map_coeffs(lambda c: sample(c, g)), inv, ctx)
    interior = (slice(4, -4), slice(4, -4))
    np.testing.assert_allclose(check.coefficient(0).values[interior], 1.0,
                               rtol=0, atol=1e-10)
    for j in (1, 2):
        np.testing.assert_allclose(check.coefficient(j).values[interior], 0.0,
                                   rtol=0, atol=1e-7)
