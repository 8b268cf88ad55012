"""Number-theoretic helpers, checked against sympy and Dirichlet identities."""

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from rootbias.arith import (
    Factorization,
    decompose_level,
    divisors,
    euler_phi,
    factor,
    is_squarefree,
    kronecker,
    mobius,
    odd_part,
    omega,
    sigma,
    vp,
)


def test_factor_roundtrip():
    for n in range(1, 2000):
        f = factor(n)
        prod = 1
        for p, e in f.pairs:
            assert e >= 1
            prod *= p**e
        assert prod == n
        assert list(f.pairs) == sorted(f.pairs)


def test_factor_matches_sympy():
    for n in (1, 2, 97, 2**10, 3 * 5 * 7 * 11, 9991, 104729 * 104723, 10**12 + 39):
        assert dict(factor(n).pairs) == sympy.factorint(n)


def test_factor_rejects_nonpositive():
    with pytest.raises(ValueError):
        factor(0)
    with pytest.raises(ValueError):
        factor(-12)


def test_factorization_accessors():
    f = factor(360)
    assert f.pairs == ((2, 3), (3, 2), (5, 1))
    assert f.primes() == (2, 3, 5)
    assert f.exponent(2) == 3
    assert f.exponent(7) == 0
    assert isinstance(f, Factorization)


def test_divisors_known():
    assert divisors(1) == [1]
    assert divisors(28) == [1, 2, 4, 7, 14, 28]
    assert divisors(360) == sorted(d for d in range(1, 361) if 360 % d == 0)


def test_mobius_dirichlet_unit():
    # sum of mu over divisors is the identity of Dirichlet convolution
    for n in range(1, 3000):
        assert sum(mobius(d) for d in divisors(n)) == (1 if n == 1 else 0)


def test_euler_phi_dirichlet():
    for n in range(1, 2000):
        assert sum(euler_phi(d) for d in divisors(n)) == n


def test_sigma_is_divisor_sum():
    for n in range(1, 500):
        assert sigma(n) == sum(divisors(n))


def test_omega_odd_part_vp():
    assert omega(1) == 0 and omega(12) == 2 and omega(30) == 3
    assert odd_part(96) == 3 and odd_part(7) == 7
    assert vp(48, 2) == 4 and vp(48, 3) == 1 and vp(48, 5) == 0
    with pytest.raises(ValueError):
        vp(0, 2)
    with pytest.raises(ValueError):
        vp(12, 6)
    with pytest.raises(ValueError):
        odd_part(0)


def test_kronecker_matches_jacobi():
    # the Kronecker symbol restricted to odd positive bottom is Jacobi
    for a in range(-40, 41):
        for n in range(1, 80, 2):
            assert kronecker(a, n) == sympy.jacobi_symbol(a, n), (a, n)


def test_kronecker_conventions():
    assert kronecker(1, 0) == 1 and kronecker(-1, 0) == 1 and kronecker(5, 0) == 0
    assert kronecker(0, 1) == 1 and kronecker(0, 2) == 0
    # bottom 2 depends on a mod 8
    assert [kronecker(a, 2) for a in (1, 3, 5, 7)] == [1, -1, -1, 1]
    # negative bottom flips exactly the sign of negative a
    assert kronecker(3, -5) == kronecker(3, 5)
    assert kronecker(-3, -5) == -kronecker(-3, 5)


def test_kronecker_fundamental_discriminant_periodicity():
    # chi_d is a character mod |d| for fundamental d
    for d in (-3, -4, -7, -8, -11, -15, -20):
        for n in range(1, 200):
            assert kronecker(d, n) == kronecker(d, n + abs(d)), (d, n)


@given(st.integers(-300, 300), st.integers(1, 200), st.integers(1, 200))
@settings(deadline=None)
def test_kronecker_multiplicative_bottom(a, m, n):
    assert kronecker(a, m * n) == kronecker(a, m) * kronecker(a, n)


@given(st.integers(-200, 200), st.integers(-200, 200), st.integers(1, 300))
@settings(deadline=None)
def test_kronecker_multiplicative_top(a, b, n):
    assert kronecker(a * b, n) == kronecker(a, n) * kronecker(b, n)


def test_is_squarefree():
    for n in range(1, 5000):
        expected = all(e == 1 for _, e in factor(n).pairs)
        assert is_squarefree(n) == expected


def test_decompose_level_known():
    for N, n1, n2 in ((1, 1, 1), (48, 3, 4), (72, 2, 6), (37, 37, 1), (144, 1, 12)):
        dec = decompose_level(N)
        assert (dec.N1, dec.N2) == (n1, n2)


@given(st.integers(1, 10**6))
@settings(deadline=None)
def test_decompose_level_properties(N):
    dec = decompose_level(N)
    assert dec.N1 * dec.N2**2 == N
    assert is_squarefree(dec.N1)
    # N2 is maximal: no prime square survives in N1
    assert all(e == 1 for _, e in factor(dec.N1).pairs)


@given(st.integers(1, 5000), st.integers(1, 5000))
@settings(deadline=None)
def test_factor_multiplicative_on_coprimes(m, n):
    from math import gcd

    if gcd(m, n) == 1:
        merged = dict(factor(m).pairs)
        for p, e in factor(n).pairs:
            merged[p] = merged.get(p, 0) + e
        assert dict(factor(m * n).pairs) == merged
