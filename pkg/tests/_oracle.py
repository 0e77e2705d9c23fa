"""Independent symbolic composition oracle.

Builds a # b by applying the exponential bidifferential operator with sympy
on a doubled variable set and merging the copies afterwards.  Deliberately
shares nothing with the package implementation: no multinomial coefficients,
no derivative caches, every derivative routed through sympy.diff, so a
coefficient-level match is a genuine cross-check.
"""

import sympy as sp

H = sp.Symbol("h")


def phase_gens(n):
    """Generators in the package's coordinate order (x's first, then xi's)."""
    return ([sp.Symbol(f"x{j}") for j in range(n)]
            + [sp.Symbol(f"w{j}") for j in range(n)])


def to_sympy(p, gens):
    """PolySymbol -> sympy expression over the given 2n generators.

    Coefficients in the tests are small integers (or dyadic rationals), so
    the float -> Rational conversion is exact.
    """
    expr = sp.Integer(0)
    for exp, c in p.terms.items():
        term = sp.Rational(c.real) + sp.I * sp.Rational(c.imag)
        for g, e in zip(gens, exp):
            if e:
                term *= g ** e
        expr += term
    return expr


def expansion_to_sympy(e, gens):
    total = sp.Integer(0)
    for j in range(e.h_min, e.trunc + 1):
        total += H ** j * to_sympy(e.coefficient(j), gens)
    return sp.expand(total)


def star_oracle(a_expr, b_expr, n, gens, kmax):
    """exp((i h / 2) A) applied to a (x) b, merged back to the diagonal.

    A = sum_j (d_x_j (x) d_w_j - d_w_j (x) d_x_j); for polynomial inputs the
    series terminates on its own, kmax is just a hard stop.
    """
    xs, ws = gens[:n], gens[n:]
    xps = [sp.Symbol(f"xP{j}") for j in range(n)]
    wps = [sp.Symbol(f"wP{j}") for j in range(n)]
    out_sub = {g: gp for g, gp in zip(xs + ws, xps + wps)}
    in_sub = {gp: g for g, gp in zip(xs + ws, xps + wps)}

    cur = sp.expand(a_expr * b_expr.xreplace(out_sub))
    total = cur
    coeff = sp.Integer(1)
    for k in range(1, kmax + 1):
        cur = sp.expand(sum(
            sp.diff(cur, xs[j], 1, wps[j], 1) - sp.diff(cur, ws[j], 1, xps[j], 1)
            for j in range(n)))
        if cur == 0:
            break
        coeff = coeff * sp.I * H / (2 * k)
        total = total + coeff * cur
    return sp.expand(total.xreplace(in_sub))


def h_coefficient(expr, j, gens):
    """Coefficient of h**j as {exponent tuple: complex} over the generators."""
    c = sp.expand(expr).coeff(H, j)
    if c == 0:
        return {}
    poly = sp.Poly(c, *gens)
    return {tuple(int(e) for e in mono): complex(v)
            for mono, v in poly.as_dict().items()}


def assert_matches_oracle(result, oracle_expr, gens, tol=1e-12):
    """Compare an HExpansion against a sympy series in h, coefficient by
    coefficient, through the expansion's truncation order."""
    for j in range(result.h_min, result.trunc + 1):
        mine = dict(result.coefficient(j).terms)
        want = h_coefficient(oracle_expr, j, gens)
        scale = max([abs(v) for v in mine.values()]
                    + [abs(v) for v in want.values()] + [1.0])
        for key in set(mine) | set(want):
            got = mine.get(key, 0j)
            ref = want.get(key, 0j)
            assert abs(got - ref) <= tol * scale, (
                f"h^{j} term {key}: got {got}, oracle {ref}")
