import itertools
from math import comb, sqrt

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from qbarrier.cpoly import (
    CPolynomial,
    ExponentPair,
    add,
    conjugate,
    enumerate_exponents,
    evaluate,
    is_real_valued,
    multiply_monomial,
    partial_derivative,
    scale,
    to_text,
)

from conftest import hadamard_b, polynomials


def brute_force_exponents(n, k):
    return {
        ExponentPair(v[:n], v[n:])
        for v in itertools.product(range(k + 1), repeat=2 * n)
        if sum(v) <= k
    }


def test_enumerate_constant_only():
    assert enumerate_exponents(1, 0) == [ExponentPair((0,), (0,))]


def test_enumerate_n1_k2_order():
    got = enumerate_exponents(1, 2)
    assert got == [
        ExponentPair((0,), (0,)),
        ExponentPair((1,), (0,)),
        ExponentPair((0,), (1,)),
        ExponentPair((2,), (0,)),
        ExponentPair((1,), (1,)),
        ExponentPair((0,), (2,)),
    ]


@pytest.mark.parametrize("n,k", [(1, 0), (1, 2), (2, 2), (2, 3), (3, 2), (4, 2)])
def test_enumerate_matches_brute_force(n, k):
    got = enumerate_exponents(n, k)
    assert len(got) == len(set(got)) == comb(2 * n + k, k)
    assert set(got) == brute_force_exponents(n, k)
    degrees = [e.degree for e in got]
    assert degrees == sorted(degrees)


def test_enumerate_n2_k2_has_15():
    assert len(enumerate_exponents(2, 2)) == 15


def test_evaluate_examples():
    p = CPolynomial.monomial(1, [1], [1])
    assert evaluate(p, [0.6 + 0.8j]) == pytest.approx(1.0, abs=1e-15)
    assert evaluate(CPolynomial.const(2, 11 / 5), [0.3, 0.1j]) == pytest.approx(2.2)
    assert evaluate(hadamard_b(), [sqrt(0.9), sqrt(0.1)]) == pytest.approx(-3.4, abs=1e-12)


def test_evaluate_dimension_mismatch():
    with pytest.raises(ValueError):
        evaluate(CPolynomial.z(2, 0), [1.0])


def test_partial_derivative_examples():
    z0 = CPolynomial.z(2, 0)
    assert partial_derivative(z0 * z0, 0) == 2 * z0
    assert partial_derivative(CPolynomial.zb(2, 0), 0).is_zero()
    assert partial_derivative(z0 * CPolynomial.zb(2, 1), 0) == CPolynomial.zb(2, 1)
    assert partial_derivative(z0 * CPolynomial.zb(2, 0), 0, conjugate_var=True) == z0


def _to_sympy(p, zs, us):
    expr = 0
    for e, c in p.items():
        term = sp.Integer(int(c.real)) + sp.I * sp.Integer(int(c.imag))
        for j in range(p.n):
            term *= zs[j] ** e.alpha[j] * us[j] ** e.beta[j]
        expr += term
    return sp.expand(expr)


@settings(max_examples=30, deadline=None)
@given(polynomials(n=2, max_degree=3, integer=True), st.integers(0, 1), st.booleans())
def test_partial_derivative_matches_sympy(p, j, conj_var):
    zs, us = sp.symbols("z0 z1"), sp.symbols("u0 u1")
    want = sp.diff(_to_sympy(p, zs, us), (us if conj_var else zs)[j])
    got = _to_sympy(partial_derivative(p, j, conjugate_var=conj_var), zs, us)
    assert sp.expand(got - want) == 0


def test_conjugate_examples():
    assert conjugate(1j * CPolynomial.z(1, 0)) == -1j * CPolynomial.zb(1, 0)
    assert conjugate(CPolynomial.z(2, 0) * CPolynomial.zb(2, 1)) == CPolynomial.z(2, 1) * CPolynomial.zb(2, 0)


def test_ring_examples():
    z0 = CPolynomial.z(2, 0)
    zero = add(z0, -z0)
    assert zero.is_zero() and zero.terms == {}
    assert evaluate(scale(CPolynomial.monomial(2, [1, 0], [1, 0]), 2), [1, 0]) == 2
    assert multiply_monomial(CPolynomial.z(1, 0), ExponentPair((0,), (1,)), 1) == CPolynomial.monomial(1, [1], [1])


def test_add_dimension_mismatch():
    with pytest.raises(ValueError):
        add(CPolynomial.z(1, 0), CPolynomial.z(2, 0))


def test_text_rendering():
    assert to_text(hadamard_b() + 2.2) == (
        "2.2 + -3.0 * z0 * zb0 + -1.0 * z0 * zb1 + -1.0 * zb0 * z1 + -1.0 * z1 * zb1"
    )
    assert to_text(CPolynomial.monomial(2, [2, 0], [0, 3], 1j)) == "(0.0+1j) * z0^2 * zb1^3"


def test_exponent_key_roundtrip():
    e = ExponentPair((1, 0, 2), (0, 1, 0))
    assert e.to_key() == "1,0,2|0,1,0"
    assert ExponentPair.from_key(e.to_key()) == e
    with pytest.raises(ValueError):
        ExponentPair.from_key("1,0")


# --- invariants ----------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(polynomials(), polynomials(), st.complex_numbers(max_magnitude=3))
def test_canonical_form(p, q, s):
    for r in (add(p, q), scale(p, s), conjugate(p), partial_derivative(p, 0), p * q):
        assert all(c != 0 for _, c in r.items())


@settings(max_examples=60, deadline=None)
@given(polynomials())
def test_conjugation_is_an_involution(p):
    assert conjugate(conjugate(p)) == p


@settings(max_examples=60, deadline=None)
@given(polynomials(), polynomials(), st.integers(0, 2**32 - 1))
def test_evaluation_homomorphism(p, q, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    z /= max(1.0, np.linalg.norm(z))
    assert abs(evaluate(add(p, q), z) - evaluate(p, z) - evaluate(q, z)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(polynomials(), polynomials(), st.integers(0, 1), st.booleans())
def test_derivative_linearity(p, q, j, conj_var):
    lhs = partial_derivative(add(p, q), j, conj_var)
    rhs = add(partial_derivative(p, j, conj_var), partial_derivative(q, j, conj_var))
    # exact up to float addition order in the coefficients
    assert set(lhs.terms) <= set(rhs.terms) | set(lhs.terms)
    for e in set(lhs.terms) | set(rhs.terms):
        assert abs(lhs.coefficient(e) - rhs.coefficient(e)) <= 1e-12 * (1 + abs(rhs.coefficient(e)))


@settings(max_examples=60, deadline=None)
@given(polynomials(), st.integers(0, 2**32 - 1))
def test_reality_criterion(p, seed):
    herm = add(p, conjugate(p))
    assert is_real_valued(herm)
    rng = np.random.default_rng(seed)
    for _ in range(5):
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        z /= max(1.0, np.linalg.norm(z))
        assert abs(evaluate(herm, z).imag) <= 1e-12


def test_not_real_valued():
    assert not is_real_valued(CPolynomial.z(1, 0))
    assert is_real_valued(hadamard_b())


def test_evaluate_many_matches_pointwise():
    rng = np.random.default_rng(3)
    p = hadamard_b() + CPolynomial.monomial(2, [2, 0], [0, 1], 0.5 - 2j)
    Z = rng.standard_normal((20, 2)) + 1j * rng.standard_normal((20, 2))
    np.testing.assert_allclose(p.evaluate_many(Z), [evaluate(p, z) for z in Z], atol=1e-12)
