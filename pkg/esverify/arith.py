"""Exact modular arithmetic shared by every other module.

Python integers are unbounded, so the 128-bit intermediates a fixed-width
implementation would need come for free; callers still keep public operands
below 2**63 so the numpy-backed sieve can hold them in int64.
"""

import math
from dataclasses import dataclass
from functools import lru_cache


class NotInvertible(ValueError):
    """Raised by mod_inverse when gcd(x, m) != 1."""


class Incompatible(ValueError):
    """Raised by crt_combine when two classes disagree modulo gcd(m1, m2)."""


@dataclass(frozen=True, order=True)
class ResidueClass:
    modulus: int
    residue: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"modulus must be >= 1, got {self.modulus}")
        if not 0 <= self.residue < self.modulus:
            raise ValueError(
                f"residue {self.residue} outside [0, {self.modulus})"
            )

    @classmethod
    def of(cls, residue: int, modulus: int) -> "ResidueClass":
        return cls(modulus, residue % modulus)

    def contains(self, n: int) -> bool:
        return n % self.modulus == self.residue

    def lift(self, modulus: int) -> list[int]:
        """Residues mod `modulus` (a multiple of ours) lying in this class."""
        if modulus % self.modulus:
            raise ValueError(f"{modulus} is not a multiple of {self.modulus}")
        return list(range(self.residue, modulus, self.modulus))


def gcd(a: int, b: int) -> int:
    return math.gcd(a, b)


def lcm(a: int, b: int) -> int:
    return math.lcm(a, b)


def isqrt(n: int) -> int:
    return math.isqrt(n)


def mod_inverse(x: int, m: int) -> int:
    if m == 1:
        return 0
    try:
        return pow(x, -1, m)
    except ValueError:
        raise NotInvertible(f"{x} has no inverse modulo {m}") from None


def crt_combine(c1: ResidueClass, c2: ResidueClass) -> ResidueClass:
    """Intersect two residue classes whose moduli need not be coprime."""
    m1, r1 = c1.modulus, c1.residue
    m2, r2 = c2.modulus, c2.residue
    g = math.gcd(m1, m2)
    if (r2 - r1) % g:
        raise Incompatible(f"{r1} mod {m1} and {r2} mod {m2} do not meet")
    m2g = m2 // g
    step = ((r2 - r1) // g) * mod_inverse((m1 // g) % m2g, m2g) % m2g if m2g > 1 else 0
    modulus = m1 * m2g
    return ResidueClass(modulus, (r1 + m1 * step) % modulus)


def solve_linear_congruence(a: int, c: int, m: int) -> ResidueClass | None:
    """All x with a*x = c (mod m), as one class modulo m/gcd(a, m)."""
    g = math.gcd(a, m)
    if c % g:
        return None
    mg = m // g
    return ResidueClass.of((c // g) * mod_inverse((a // g) % mg, mg), mg)


def jacobi(a: int, n: int) -> int:
    if n < 1 or n % 2 == 0:
        raise ValueError(f"Jacobi symbol needs a positive odd modulus, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def is_perfect_square(n: int) -> tuple[bool, int | None]:
    if n < 0:
        return False, None
    root = math.isqrt(n)
    if root * root == n:
        return True, root
    return False, None


@lru_cache(maxsize=65536)
def _factorize(n: int) -> tuple[tuple[int, int], ...]:
    factors = []
    for p in (2, 3):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            factors.append((p, e))
    p, step = 5, 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            factors.append((p, e))
        p += step
        step = 6 - step
    if n > 1:
        factors.append((n, 1))
    return tuple(factors)


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division (6k +- 1 wheel)."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    return dict(_factorize(n))


def prime_factors(n: int) -> list[int]:
    return [p for p, _ in _factorize(n)] if n > 1 else []


def divisors_from_factors(factors: dict[int, int]) -> list[int]:
    divs = [1]
    for p, e in factors.items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def divisors(n: int, odd_only: bool = False) -> list[int]:
    if n < 1:
        raise ValueError(f"divisors needs n >= 1, got {n}")
    if odd_only:
        while n % 2 == 0:
            n //= 2
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def smallest_prime_factor(n: int, bound: int | None = None) -> int | None:
    """Least prime p | n with p <= bound (default isqrt(n)); None if n is
    prime or has no factor in range."""
    if n < 4:
        return None
    limit = math.isqrt(n) if bound is None else min(bound, math.isqrt(n))
    for p in (2, 3):
        if n % p == 0:
            return p
    p, step = 5, 2
    while p <= limit:
        if n % p == 0:
            return p
        p += step
        step = 6 - step
    return None


def is_prime(n: int) -> bool:
    """Trial division; meant for moduli and wheel primes, not candidates."""
    if n < 2:
        return False
    return smallest_prime_factor(n) is None


def is_quadratic_residue(b: int, a: int) -> bool:
    """Whether x*x = b (mod a) is solvable, for gcd(a, b) = 1."""
    if math.gcd(a, b) != 1:
        raise ValueError(f"{b} is not coprime to {a}")
    for p, e in _factorize(a) if a > 1 else ():
        if p == 2:
            if e == 2 and b % 4 != 1:
                return False
            if e >= 3 and b % 8 != 1:
                return False
        elif jacobi(b, p) != 1:
            return False
    return True
