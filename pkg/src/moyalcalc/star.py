"""Weyl-ordered star product on truncated h-expansions.

The composition law is the bidifferential series

    a # b  =  sum_k (1/k!) (i h / 2)^k A^k(a, b),
    A(a, b) = sum_j (d_x_j a * d_xi_j b - d_xi_j a * d_x_j b),

truncated at the context's order.  The sign is pinned by x # xi = x*xi + ih/2,
which together with the bracket convention in `phasespace` makes the scaled
commutator i/h (a#b - b#a) reproduce {a, b} at h^0.  Coefficients may be
polynomial or sampled-grid symbols; for polynomials every term is exact and
the series terminates on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from .errors import EllipticityError, TruncationError
from .hexpansion import HExpansion, lift
from .phasespace import PhaseSpace, PolySymbol, Region
from .sampled import SampleGrid, SampledSymbol, sample

__all__ = [
    "StarContext",
    "bidiff_term",
    "star",
    "star_commutator_scaled",
    "star_inverse",
    "conjugate_symbol",
    "conjugate_by_exp_generator",
    "star_exp",
]


@dataclass(frozen=True)
class StarContext:
    """Ambient data for star operations: phase space, truncation order K,
    and the working region used for ellipticity checks."""

    space: PhaseSpace
    trunc: int
    region: Region | None = None

    def __post_init__(self):
        if self.trunc < 0:
            raise ValueError("truncation order must be >= 0")


def _multi_indices(n: int, total: int):
    """All alpha in N^n with |alpha| = total."""
    if total == 0:
        yield (0,) * n
        return
    for combo in combinations_with_replacement(range(n), total):
        alpha = [0] * n
        for c in combo:
            alpha[c] += 1
        yield tuple(alpha)


def _multi_factorial(alpha) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


class _DerivCache:
    """Memoized iterated partial derivatives of one symbol."""

    def __init__(self, base):
        self.store = {(0,) * base.space.dim: base}
        self.dim = base.space.dim

    def get(self, multi: tuple[int, ...]):
        got = self.store.get(multi)
        if got is not None:
            return got
        # peel one derivative off the first nonzero slot
        i = next(k for k, e in enumerate(multi) if e)
        lower = list(multi)
        lower[i] -= 1
        parent = self.get(tuple(lower))
        out = parent.derivative(i)
        self.store[multi] = out
        return out


def bidiff_term(a, b, k: int,
                cache_a: _DerivCache | None = None,
                cache_b: _DerivCache | None = None):
    """(1/k!) A^k(a, b) via the multinomial expansion

        sum_{|alpha|+|beta|=k} (-1)^{|beta|} / (alpha! beta!)
            (d_x^alpha d_xi^beta a) (d_xi^alpha d_x^beta b).
    """
    n = a.space.n
    if cache_a is None:
        cache_a = _DerivCache(a)
    if cache_b is None:
        cache_b = _DerivCache(b)
    out = None
    for ka in range(k + 1):
        kb = k - ka
        for alpha in _multi_indices(n, ka):
            for beta in _multi_indices(n, kb):
                coeff = (-1.0) ** kb / (_multi_factorial(alpha) * _multi_factorial(beta))
                da = cache_a.get(alpha + beta)   # d_x^alpha d_xi^beta a
                db = cache_b.get(beta + alpha)   # d_xi^alpha d_x^beta b
                term = (da * db) * coeff
                out = term if out is None else out + term
    return out


def _coerce(sym, ctx: StarContext) -> HExpansion:
    if isinstance(sym, HExpansion):
        return sym
    if isinstance(sym, (PolySymbol, SampledSymbol)):
        return lift(sym, ctx.trunc) if isinstance(sym, PolySymbol) else HExpansion(
            sym.space, 0, ctx.trunc,
            [sym] + [sym * 0] * ctx.trunc)
    if isinstance(sym, (int, float, complex)):
        return lift(PolySymbol.constant(ctx.space, sym), ctx.trunc)
    raise TypeError(f"cannot interpret {type(sym).__name__} as a symbol")


def _check_star_depth(a: HExpansion, b: HExpansion, k_out: int):
    avail = min(a.trunc + b.h_min, b.trunc + a.h_min)
    if k_out > avail:
        raise TruncationError(
            f"star product requested through h^{k_out} but operand truncations "
            f"only support h^{avail}"
        )


def _poly_degree(sym) -> int | None:
    return sym.degree() if isinstance(sym, PolySymbol) else None


def star(a, b, ctx: StarContext) -> HExpansion:
    """Truncated star product a # b at the context's order.

    Raises TruncationError if the operands are not known deeply enough to
    determine every requested coefficient.
    """
    a = _coerce(a, ctx)
    b = _coerce(b, ctx)
    a._require_same_space(b)
    k_out = ctx.trunc
    _check_star_depth(a, b, k_out)

    caches_a: dict[int, _DerivCache] = {}
    caches_b: dict[int, _DerivCache] = {}

    h_min_out = a.h_min + b.h_min
    powers: dict[int, object] = {}
    for m in range(h_min_out, k_out + 1):
        acc = None
        for i in range(a.h_min, min(a.trunc, m - b.h_min) + 1):
            ai = a.coefficient(i)
            deg_a = _poly_degree(ai)
            if deg_a is not None and deg_a < 0:
                continue  # zero coefficient
            for j in range(b.h_min, min(b.trunc, m - i) + 1):
                k = m - i - j
                bj = b.coefficient(j)
                deg_b = _poly_degree(bj)
                if deg_b is not None and deg_b < 0:
                    continue
                # polynomial termination: A^k kills either factor past its degree
                if k > 0 and deg_a is not None and k > deg_a:
                    continue
                if k > 0 and deg_b is not None and k > deg_b:
                    continue
                ca = caches_a.setdefault(i, _DerivCache(ai))
                cb = caches_b.setdefault(j, _DerivCache(bj))
                term = bidiff_term(ai, bj, k, ca, cb)
                term = term * ((0.5j) ** k)
                acc = term if acc is None else acc + term
        if acc is not None:
            powers[m] = acc
    if not powers:
        return HExpansion.zero(ctx.space, k_out)
    return HExpansion.from_powers(ctx.space, powers, k_out)


def star_commutator_scaled(a, b, ctx: StarContext) -> HExpansion:
    """i/h (a # b - b # a), truncated at the context's order.

    Needs the operands through h^{trunc+1}; its h^0 coefficient is the
    Poisson bracket of the principal parts, and for real lifted symbols only
    even h-powers survive (Weyl parity).
    """
    deep = StarContext(ctx.space, ctx.trunc + 1, ctx.region)
    a = _coerce(a, deep)
    b = _coerce(b, deep)
    comm = star(a, b, deep) - star(b, a, deep)
    return (comm * 1j).times_h_power(-1).truncate(ctx.trunc)


def _principal_bounds(a0, region: Region | None, grid: SampleGrid | None):
    if isinstance(a0, SampledSymbol):
        return a0.min_abs(), a0.max_abs()
    reg = region
    if reg is None:
        raise EllipticityError(
            "ellipticity check needs a working region (set it on the context)"
        )
    pts = reg.grid(41)
    vals = np.abs(a0.evaluate(pts))
    return float(vals.min()), float(vals.max())


def star_inverse(a, ctx: StarContext, grid: SampleGrid | None = None,
                 epsilon: float | None = None) -> HExpansion:
    """Order-by-order star inverse: returns b with a # b = 1 + O(h^{K+1}).

    The principal part must be elliptic on the working region: min |a_0| >=
    epsilon * max |a_0| (epsilon defaults to 1e-6).  A nonconstant polynomial
    principal part has no polynomial reciprocal, so the computation moves to
    the sampled backend; pass `grid` to choose the sampling.
    """
    a = _coerce(a, ctx)
    if a.h_min != 0:
        raise EllipticityError("star_inverse needs an order-0 expansion")
    a0 = a.coefficient(0)
    eps = 1e-6 if epsilon is None else epsilon
    lo, hi = _principal_bounds(a0, ctx.region, grid)
    if hi == 0.0 or lo < eps * hi:
        raise EllipticityError(
            f"principal symbol not elliptic on region: min {lo:.3g} < "
            f"{eps:.1g} * max {hi:.3g}"
        )

    constant_principal = (
        isinstance(a0, PolySymbol) and a0.degree() <= 0
    )
    if isinstance(a0, PolySymbol) and not constant_principal:
        if grid is None:
            raise EllipticityError(
                "nonconstant principal part: supply a SampleGrid for the "
                "sampled-backend inverse"
            )
        a = a.map_coeffs(lambda c: sample(c, grid))
        a0 = a.coefficient(0)

    if isinstance(a0, SampledSymbol):
        b0 = a0.reciprocal()
    else:
        b0 = PolySymbol.constant(ctx.space, 1.0 / a0.constant_term())

    k_out = ctx.trunc
    b_coeffs = [b0]
    caches_a = {i: _DerivCache(a.coefficient(i))
                for i in range(0, min(a.trunc, k_out) + 1)}
    for m in range(1, k_out + 1):
        acc = None
        for i in range(0, min(a.trunc, m) + 1):
            ai = a.coefficient(i)
            for j in range(0, m - i + 1):
                k = m - i - j
                if i == 0 and k == 0 and j == m:
                    continue  # this is the a0 * b_m unknown
                if j >= len(b_coeffs):
                    continue
                term = bidiff_term(ai, b_coeffs[j], k, caches_a[i], None)
                term = term * ((0.5j) ** k)
                acc = term if acc is None else acc + term
        if acc is None:
            b_m = b0 * 0
        else:
            b_m = (b0 * -1.0) * acc
        b_coeffs.append(b_m)
    b = HExpansion(ctx.space, 0, k_out, b_coeffs)
    return b


def conjugate_symbol(p, b, ctx: StarContext, grid: SampleGrid | None = None) -> HExpansion:
    """star_inverse(b) # p # b: conjugation of p by the elliptic symbol b.

    The leading correction is h * H_{i log b_0}(p_0); the identity and
    constant cases collapse to p exactly.
    """
    b = _coerce(b, ctx)
    b_inv = star_inverse(b, ctx, grid=grid)
    p = _coerce(p, ctx)
    if grid is not None and isinstance(b.coefficient(0), SampledSymbol):
        p = p.map_coeffs(lambda c: sample(c, grid))
    return star(star(b_inv, p, ctx), b, ctx)


def _star_commutator_with_poly(f: HExpansion, p: HExpansion, ctx: StarContext) -> HExpansion:
    return star(f, p, ctx) - star(p, f, ctx)


def conjugate_by_exp_generator(p, f: PolySymbol, level: int, ctx: StarContext,
                               inverse: bool = False) -> HExpansion:
    """Conjugation by the unitary-model corrector b = exp_#(-i h^{level-1} f),
    computed as the exponentiated inner derivation

        b^{-1} # p # b = exp(+i ad_{h^{level-1} f})(p),

    whose series terminates inside the truncation because each ad raises the
    h-order by at least `level` (the commutator contributes h * {f,.} + odd
    higher terms).  `inverse=True` conjugates by b^{-1} instead.  Exact on
    the polynomial backend for every level, including level 1.
    """
    if level < 1:
        raise ValueError("corrector level must be >= 1")
    p = _coerce(p, ctx)
    f_lift = lift(f, ctx.trunc)
    sign = -1.0 if inverse else 1.0
    total = p
    term = p
    k = 0
    max_apps = ctx.trunc + 2
    while k < max_apps:
        k += 1
        comm = _star_commutator_with_poly(f_lift, term, ctx)
        # i * ad_{h^{l-1} f}: shift by the level weight, then retruncate
        term = (comm * (sign * 1j / k)).times_h_power(level - 1).truncate(ctx.trunc)
        if term.is_zero(0.0):
            break
        total = total + term
    return total


def star_exp(g: HExpansion, ctx: StarContext, tol: float = 1e-15,
             max_terms: int = 80) -> HExpansion:
    """Star exponential exp_#(g) = sum_k g^{#k} / k!.

    Terminates exactly when g has positive h-order; otherwise (sampled
    backend, bounded coefficients) the factorial makes the series converge
    and summation stops once a term's coefficient norms fall below tol."""
    one = lift(PolySymbol.one(ctx.space), ctx.trunc)
    sampled_coeff = next(
        (c for c in g.coeffs if isinstance(c, SampledSymbol)), None)
    if sampled_coeff is not None:
        one = one.map_coeffs(lambda c: sample(c, sampled_coeff.grid))
    total = one
    term = one
    for k in range(1, max_terms):
        term = star(term, g, ctx) * (1.0 / k)
        total = total + term
        norms = term.coeff_norms()
        if max(norms.values(), default=0.0) < tol:
            return total
        if g.h_min >= 1 and term.is_zero(0.0):
            return total
    if g.h_min >= 1:
        return total
    raise TruncationError("star_exp did not converge within max_terms")
