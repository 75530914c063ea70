"""Modular arithmetic helpers, checked against hand values and sympy."""

import pytest
from sympy import factorint, jacobi_symbol
from sympy.ntheory import is_quad_residue

from esverify.arith import (
    Incompatible,
    NotInvertible,
    ResidueClass,
    crt_combine,
    divisors,
    factorize,
    gcd,
    is_perfect_square,
    is_prime,
    is_quadratic_residue,
    isqrt,
    jacobi,
    mod_inverse,
    smallest_prime_factor,
    solve_linear_congruence,
)


@pytest.mark.parametrize("a,b,expected", [(12, 18, 6), (1, 97, 1), (120, 25, 5), (0, 7, 7)])
def test_gcd(a, b, expected):
    assert gcd(a, b) == expected


@pytest.mark.parametrize("x,m,expected", [(4, 15, 4), (1, 7, 1), (2, 15, 8), (5, 1, 0)])
def test_mod_inverse(x, m, expected):
    assert mod_inverse(x, m) == expected


def test_mod_inverse_rejects_shared_factor():
    with pytest.raises(NotInvertible):
        mod_inverse(6, 15)


def test_crt_combine_builds_wheel_classes():
    assert crt_combine(ResidueClass.of(1, 24), ResidueClass.of(4, 5)) == ResidueClass(120, 49)
    assert crt_combine(ResidueClass.of(1, 24), ResidueClass.of(1, 5)) == ResidueClass(120, 1)


def test_crt_combine_non_coprime_moduli():
    assert crt_combine(ResidueClass.of(1, 4), ResidueClass.of(3, 6)) == ResidueClass(12, 9)
    with pytest.raises(Incompatible):
        crt_combine(ResidueClass.of(1, 4), ResidueClass.of(2, 6))


def test_residue_class_validation_and_lift():
    with pytest.raises(ValueError):
        ResidueClass(5, 5)
    with pytest.raises(ValueError):
        ResidueClass(0, 0)
    assert ResidueClass(5, 2).lift(15) == [2, 7, 12]
    assert ResidueClass(5, 2).contains(97)


def test_solve_linear_congruence():
    assert solve_linear_congruence(2, 4, 6) == ResidueClass(3, 2)
    assert solve_linear_congruence(2, 3, 6) is None
    assert solve_linear_congruence(7, 1, 1) == ResidueClass(1, 0)


@pytest.mark.parametrize("a,n,expected", [(1, 9, 1), (3, 5, -1), (2, 7, 1), (6, 9, 0)])
def test_jacobi_examples(a, n, expected):
    assert jacobi(a, n) == expected


def test_jacobi_matches_sympy():
    for n in range(1, 200, 2):
        for a in range(-5, 60):
            assert jacobi(a, n) == jacobi_symbol(a, n), (a, n)


def test_jacobi_rejects_even_modulus():
    with pytest.raises(ValueError):
        jacobi(3, 8)


def test_is_perfect_square():
    assert is_perfect_square(49) == (True, 7)
    assert is_perfect_square(50) == (False, None)
    assert is_perfect_square(0) == (True, 0)
    assert is_perfect_square((10**9 + 7) ** 2) == (True, 10**9 + 7)


def test_divisors():
    assert divisors(840, odd_only=True) == [1, 3, 5, 7, 15, 21, 35, 105]
    assert divisors(15) == [1, 3, 5, 15]
    assert divisors(1) == [1]
    assert divisors(1, odd_only=True) == [1]
    assert divisors(36) == [1, 2, 3, 4, 6, 9, 12, 18, 36]


@pytest.mark.parametrize("n,expected", [(16, 4), (17, 4), (10**16, 10**8), (0, 0)])
def test_isqrt(n, expected):
    assert isqrt(n) == expected


def test_factorize_matches_sympy():
    for n in list(range(1, 500)) + [2**40 - 1, 13992 * 97 + 1, 4495 * 4661]:
        assert factorize(n) == factorint(n), n


def test_smallest_prime_factor_and_is_prime():
    assert smallest_prime_factor(91) == 7
    assert smallest_prime_factor(97) is None
    assert smallest_prime_factor(4) == 2
    assert smallest_prime_factor(101 * 103, bound=50) is None
    assert [p for p in range(30) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_is_quadratic_residue_matches_sympy():
    for a in (120, 168, 840, 9, 25, 49 * 24):
        for b in range(1, a):
            if gcd(a, b) == 1:
                assert is_quadratic_residue(b, a) == is_quad_residue(b, a), (b, a)


def test_is_quadratic_residue_examples():
    assert is_quadratic_residue(49, 120)
    assert not is_quadratic_residue(97, 120)
    with pytest.raises(ValueError):
        is_quadratic_residue(25, 120)
