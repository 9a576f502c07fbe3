import random

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from birkhoff.coeffs import GaussQ
from birkhoff.errors import CoefficientKindMismatch, DimensionMismatch, InvalidGenerator
from birkhoff.series import (FORWARD, INVERSE, TruncatedSeries, apply_generators, count_monomials,
                             evaluate, evaluate_many, gradient_many, lie_transform,
                             monomials_of_degree, multiply, poisson_bracket, to_string, truncate)
from helpers import from_sympy, random_series, symbols, sympy_bracket, to_sympy

seeds = st.integers(0, 2**32 - 1)


def S(n, order, terms, exact=True):
    return TruncatedSeries(n, order, terms, exact)


def test_bracket_examples():
    x1y1 = S(1, 4, {(1, 1): 1})
    x1 = S(1, 4, {(1, 0): 1})
    assert poisson_bracket(x1y1, x1) == S(1, 4, {(1, 0): -1})
    assert poisson_bracket(S(1, 4, {(2, 0): 1}), S(1, 4, {(0, 2): 1})) == S(1, 4, {(1, 1): 4})
    # eigenvector relation {sum g_j x_j y_j, x^a y^b} = (sum (b_j - a_j) g_j) x^a y^b
    H = TruncatedSeries.action(2, (1, 2), 6)
    mono = (2, 0, 0, 1)
    assert poisson_bracket(H, S(2, 6, {mono: 1})) == S(2, 6, {mono: (0 - 2) * 1 + (1 - 0) * 2})


def test_construction_rules():
    A = S(1, 3, [((1, 1), 1), ((1, 1), 2), ((2, 2), 5), ((3, 0), 0)])
    assert A.terms == {(1, 1): GaussQ(3)}
    with pytest.raises(DimensionMismatch):
        S(1, 3, {(1, 1, 0): 1})
    with pytest.raises(CoefficientKindMismatch):
        S(1, 3, {(1, 1): 0.5})
    with pytest.raises(CoefficientKindMismatch):
        poisson_bracket(A, A.to_float())
    with pytest.raises(DimensionMismatch):
        poisson_bracket(A, S(2, 3, {}))


def test_monomial_enumeration():
    for nvar in (2, 4):
        for k in range(5):
            ms = list(monomials_of_degree(nvar, k))
            assert len(ms) == len(set(ms)) == count_monomials(nvar, k)
            assert all(sum(m) == k for m in ms)


@settings(max_examples=15)
@given(seeds)
def test_bracket_matches_symbolic_differentiation(seed):
    rng = random.Random(seed)
    n = rng.choice((1, 2))
    A = random_series(rng, n, 4, 0.25, min_deg=1)
    B = random_series(rng, n, 4, 0.25, min_deg=1)
    expect = from_sympy(sympy_bracket(to_sympy(A), to_sympy(B), n), n, 4)
    assert poisson_bracket(A, B) == expect


@given(seeds)
def test_bracket_algebra(seed):
    rng = random.Random(seed)
    n = 2
    A, B, C = (random_series(rng, n, 6, 0.1) for _ in range(3))
    c = GaussQ(rng.randint(-3, 3), rng.randint(-3, 3))
    assert poisson_bracket(A, B) == -poisson_bracket(B, A)
    assert poisson_bracket(A + B.scale(c), C) == poisson_bracket(A, C) + poisson_bracket(B, C).scale(c)
    # Leibniz and Jacobi hold exactly for the truncated operations when all
    # inputs start at degree 2 (truncation only discards terms above order)
    assert poisson_bracket(A, multiply(B, C)) == (multiply(poisson_bracket(A, B), C)
                                                  + multiply(B, poisson_bracket(A, C)))
    jac = (poisson_bracket(A, poisson_bracket(B, C)) + poisson_bracket(B, poisson_bracket(C, A))
           + poisson_bracket(C, poisson_bracket(A, B)))
    assert jac.is_zero()


@settings(max_examples=15)
@given(seeds)
def test_multiply_matches_sympy(seed):
    rng = random.Random(seed)
    A = random_series(rng, 1, 6, 0.4, min_deg=0)
    B = random_series(rng, 1, 6, 0.4, min_deg=0)
    full = from_sympy(sp.expand(to_sympy(A) * to_sympy(B)), 1, 6)
    assert multiply(A, B) == full


def test_lie_transform_closed_form():
    H = S(1, 10, {(1, 1): 1, (3, 0): 1})
    L = S(1, 10, {(3, 0): GaussQ(1, 0) / 3})
    assert lie_transform(H, L, FORWARD) == S(1, 10, {(1, 1): 1})
    assert lie_transform(S(1, 10, {(1, 1): 1}), L, INVERSE) == H


def test_lie_transform_rejects_low_degree_generator():
    with pytest.raises(InvalidGenerator):
        lie_transform(S(1, 4, {(1, 1): 1}), S(1, 4, {(1, 1): 1}))


@given(seeds)
def test_lie_transform_is_poisson_morphism_and_invertible(seed):
    rng = random.Random(seed)
    n, m = 2, 6
    A = random_series(rng, n, m, 0.1)
    B = random_series(rng, n, m, 0.1)
    L = random_series(rng, n, m, 0.1, min_deg=3, max_deg=4)
    for d in (FORWARD, INVERSE):
        T = lambda X: lie_transform(X, L, d, m)  # noqa: E731
        assert poisson_bracket(T(A), T(B)) == T(poisson_bracket(A, B))
    assert lie_transform(lie_transform(A, L, INVERSE, m), L, FORWARD, m) == A
    gens = [L, random_series(rng, n, m, 0.1, min_deg=4, max_deg=4)]
    assert apply_generators(apply_generators(A, gens, INVERSE, m), gens, FORWARD, m) == A


def test_lie_transform_matches_flow_numerically():
    # exp(ad_L) x equals x after the time-one flow of X_L (checked by ODE)
    from birkhoff.actions import hamiltonian_flow

    n, m = 1, 14
    L = S(n, m, {(2, 1): GaussQ(1, 0) / 5, (1, 2): GaussQ(0, 1) / 7})
    z = np.array([0.03 + 0.01j, -0.02 + 0.02j])
    flowed = hamiltonian_flow(L, z, 1.0)
    for i in range(2):
        coord = TruncatedSeries.variable(n, i, m)
        assert abs(evaluate(lie_transform(coord, L, INVERSE, m), z) - flowed[i]) < 1e-13


def test_evaluation_and_gradient():
    rng = random.Random(3)
    A = random_series(rng, 2, 5, 0.3, min_deg=0)
    Z = np.random.default_rng(0).normal(size=(7, 4)) + 0.3j
    expr = to_sympy(A)
    z = symbols(2)
    f = sp.lambdify(z, expr, "numpy")
    grads = [sp.lambdify(z, sp.diff(expr, v), "numpy") for v in z]
    vals, jac = gradient_many(A.to_float(), Z)
    for p in range(7):
        assert abs(vals[p] - complex(f(*Z[p]))) < 1e-10
        assert abs(evaluate(A, Z[p]) - complex(f(*Z[p]))) < 1e-10
        for v in range(4):
            assert abs(jac[p, v] - complex(grads[v](*Z[p]))) < 1e-10
    assert np.allclose(evaluate_many(A.to_float(), Z), vals)


def test_truncate_and_views():
    A = S(1, 6, {(1, 1): 1, (3, 0): 2, (2, 3): 1})
    assert truncate(A, 3) == S(1, 3, {(1, 1): 1, (3, 0): 2})
    assert A.homogeneous_part(3) == S(1, 6, {(3, 0): 2})
    assert (A.min_degree(), A.max_degree()) == (2, 5)
    assert A.max_abs_coef() == 2.0 and A.max_abs_coef(5) == 1.0
    assert to_string(S(1, 10, {(1, 1): 1, (3, 0): GaussQ(1, 0) / 3})) == "x1*y1 + (1/3)*x1^3"
    assert A.to_float().coefficient((3, 0)) == 2.0
    assert A.is_real() and not S(1, 2, {(1, 1): GaussQ(0, 1)}).is_real()
