"""Shared builders and independent oracles for the test suite."""
from __future__ import annotations

import random
from fractions import Fraction

import sympy as sp

from birkhoff.coeffs import GaussQ
from birkhoff.resonance import FrequencyModel
from birkhoff.series import TruncatedSeries, monomials_of_degree


def rand_gauss(rng: random.Random, mag: int = 3, real: bool = False) -> GaussQ:
    def part():
        return Fraction(rng.randint(-mag, mag), rng.choice((1, 1, 2, 3)))

    return GaussQ(part(), 0 if real else part())


def random_series(rng, n, order, density=0.3, exact=True, min_deg=2, max_deg=None,
                  mag=3, real=False):
    terms = {}
    for k in range(min_deg, (order if max_deg is None else max_deg) + 1):
        for mono in monomials_of_degree(2 * n, k):
            if rng.random() < density:
                c = rand_gauss(rng, mag, real)
                terms[mono] = c if exact else complex(c)
    return TruncatedSeries(n, order, terms, exact)


def symbols(n):
    xs = sp.symbols(f"x1:{n + 1}")
    ys = sp.symbols(f"y1:{n + 1}")
    return list(xs) + list(ys)


def gq_to_sympy(c: GaussQ):
    return (sp.Rational(int(c.re.numerator), int(c.re.denominator))
            + sp.I * sp.Rational(int(c.im.numerator), int(c.im.denominator)))


def sympy_to_gq(c) -> GaussQ:
    re, im = sp.Rational(sp.re(c)), sp.Rational(sp.im(c))
    return GaussQ(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))


def to_sympy(A: TruncatedSeries):
    z = symbols(A.n)
    expr = sp.Integer(0)
    for mono, c in A.items():
        term = gq_to_sympy(c)
        for v, e in zip(z, mono):
            term *= v ** e
        expr += term
    return sp.expand(expr)


def from_sympy(expr, n, order):
    z = symbols(n)
    poly = sp.Poly(sp.expand(expr), *z)
    return TruncatedSeries(n, order, {mono: sympy_to_gq(c) for mono, c in poly.terms()})


def sympy_bracket(f, g, n):
    """``{f, g} = sum df/dx dg/dy - df/dy dg/dx`` by symbolic differentiation."""
    z = symbols(n)
    xs, ys = z[:n], z[n:]
    return sp.expand(sum(sp.diff(f, x) * sp.diff(g, y) - sp.diff(f, y) * sp.diff(g, x)
                         for x, y in zip(xs, ys)))


def ad_matrix(F, n, k):
    """Matrix of ``G -> {F, G}`` on homogeneous degree-k polynomials (sympy oracle).

    ``F`` must be quadratic so the image stays in degree ``k``.
    """
    basis = list(monomials_of_degree(2 * n, k))
    z = symbols(n)
    fexpr = to_sympy(F)
    index = {m: i for i, m in enumerate(basis)}
    M = sp.zeros(len(basis), len(basis))
    for j, mono in enumerate(basis):
        g = sp.Integer(1)
        for v, e in zip(z, mono):
            g *= v ** e
        br = sympy_bracket(fexpr, g, n)
        if br == 0:
            continue
        for m, c in sp.Poly(br, *z).terms():
            M[index[m], j] = c
    return M, basis


def vector_of(A: TruncatedSeries, basis):
    return sp.Matrix([gq_to_sympy(A.coefficient(m)) for m in basis])


def series_of(vec, basis, n, order):
    return TruncatedSeries(n, order, {m: sympy_to_gq(c) for m, c in zip(basis, vec) if c != 0})


def homological_oracle(Hk: TruncatedSeries, H2: TruncatedSeries, Hss: TruncatedSeries):
    """Dense exact solve of ``Hk = -{H2, L} + H'`` on the graded monomial basis.

    ``H'`` is the projection of ``Hk`` onto ``ker ad_{Hss}`` along
    ``im ad_{Hss}``; ``L`` is the unique solution inside ``im ad_{Hss}``.
    """
    n = Hk.n
    k = Hk.max_degree()
    Ass, basis = ad_matrix(Hss, n, k)
    A2, _ = ad_matrix(H2, n, k)
    K = Ass.nullspace()
    Im = Ass.columnspace()
    h = vector_of(Hk, basis)
    blocks = K + Im
    Bmat = sp.Matrix.hstack(*blocks)
    c = Bmat.solve(h)  # ker + im spans everything because Hss is semisimple
    hp = sp.zeros(len(basis), 1)
    for i, vec in enumerate(K):
        hp += c[i] * vec
    rhs = h - hp
    if Im:
        Imat = sp.Matrix.hstack(*Im)
        y, params = (-A2 * Imat).gauss_jordan_solve(rhs)
        assert params.shape[0] == 0, "ad_H2 is not injective on im ad_Hss"
        lvec = Imat * y
    else:
        lvec = sp.zeros(len(basis), 1)
    order = Hk.order
    return (series_of([sp.expand(v) for v in lvec], basis, n, order),
            series_of([sp.expand(v) for v in hp], basis, n, order))


def random_model(rng):
    n = rng.randint(1, 4)
    d = rng.randint(1, 3)
    rows = [[GaussQ(Fraction(rng.randint(-4, 4), rng.randint(1, 3)),
                    Fraction(rng.randint(-2, 2), rng.randint(1, 3)) if rng.random() < 0.3 else 0)
             for _ in range(d)] for _ in range(rng.randint(1, n))]
    while len(rows) < n:
        # integer combinations of existing rows create resonances
        comb = [rng.randint(-2, 2) for _ in rows]
        rows.append([sum((r[l] * c for r, c in zip(rows, comb)), GaussQ(0)) for l in range(d)])
    rng.shuffle(rows)
    return FrequencyModel(rows, numeric=[1.0 + l * 0.4142 for l in range(d)])


def membership_via_basis(k, basis):
    n, q = basis.n, basis.q
    c = [sum(a * b for a, b in zip(basis.rho[n - q + h], k)) for h in range(q)]
    recon = [sum(c[h] * basis.mu[h][j] for h in range(q)) for j in range(n)]
    return recon == list(k)
