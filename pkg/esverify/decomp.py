"""Decompositions 4/n = 1/x1 + 1/x2 + 1/x3 with x1 < x2 < x3.

Holds the elementary closed forms, the quadruple (A, B, C, D) encoding of a
decomposition, and an exhaustive brute-force oracle that knows nothing about
quadruples or equations.
"""

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from esverify.arith import divisors_from_factors, factorize


class DegenerateSplit(ValueError):
    """1/1 cannot be split into two distinct unit fractions."""


class InvalidQuadruple(ValueError):
    """The quadruple fails its relation, coprimality or integrality checks."""


class DuplicateDenominators(ValueError):
    """A quadruple produced two equal denominators (composite input)."""


@dataclass(frozen=True, order=True)
class UnitFractionTriple:
    n: int
    x1: int
    x2: int
    x3: int

    @classmethod
    def from_denominators(cls, n: int, denominators) -> "UnitFractionTriple":
        x1, x2, x3 = sorted(denominators)
        return cls(n, x1, x2, x3)

    @property
    def denominators(self) -> tuple[int, int, int]:
        return self.x1, self.x2, self.x3

    def as_fractions(self) -> tuple[Fraction, Fraction, Fraction]:
        return tuple(Fraction(1, x) for x in self.denominators)

    def __str__(self) -> str:
        return f"4/{self.n} = 1/{self.x1} + 1/{self.x2} + 1/{self.x3}"


def verify_triple(t: UnitFractionTriple) -> bool:
    if min(t.n, t.x1, t.x2, t.x3) < 1:
        return False
    if not t.x1 < t.x2 < t.x3:
        return False
    return t.n * (t.x2 * t.x3 + t.x1 * t.x3 + t.x1 * t.x2) == 4 * t.x1 * t.x2 * t.x3


def split_unit_fraction(t: int) -> tuple[int, int]:
    if t < 1:
        raise ValueError(f"split needs t >= 1, got {t}")
    if t == 1:
        raise DegenerateSplit("1/1 = 1/2 + 1/2 repeats a denominator")
    return t + 1, t * (t + 1)


def closed_form_decompose(n: int) -> UnitFractionTriple | None:
    if n < 3:
        raise ValueError(f"closed forms need n >= 3, got {n}")
    if n % 3 == 2:
        t = (n + 1) // 3
        return UnitFractionTriple.from_denominators(n, (t, n, t * n))
    if n % 4 == 3:
        t = (n + 1) // 4
        # 4/n = 1/t + 1/(t*n); split the smaller fraction 1/(t*n)
        return UnitFractionTriple.from_denominators(n, (t, *split_unit_fraction(t * n)))
    if n % 8 == 5:
        t = (n + 3) // 8
        return UnitFractionTriple.from_denominators(n, (2 * t, t * n, 2 * t * n))
    return None


def distinct_triple(n: int, denominators) -> UnitFractionTriple | None:
    """Three distinct denominators for 4/n from a sum that may repeat one.

    A repeated pair 2/x becomes 1/(x/2), or 1/h + 1/(x*h) with h = (x+1)/2
    for odd x; a two-term sum is padded by splitting its smallest fraction.
    """
    terms = sorted(denominators)
    for _ in range(16):
        repeated = next((x for x in terms if terms.count(x) > 1), None)
        if repeated is not None:
            terms.remove(repeated)
            terms.remove(repeated)
            if repeated % 2 == 0:
                terms.append(repeated // 2)
            else:
                h = (repeated + 1) // 2
                terms.extend((h, repeated * h))
            terms.sort()
            continue
        if len(terms) == 3:
            break
        largest = terms.pop()
        if largest < 2:
            return None
        terms.extend(split_unit_fraction(largest))
        terms.sort()
    else:
        return None
    if len(terms) != 3:
        return None
    triple = UnitFractionTriple.from_denominators(n, terms)
    return triple if verify_triple(triple) else None


def scale_decomposition(t: UnitFractionTriple, k: int) -> UnitFractionTriple:
    if k < 1:
        raise ValueError(f"scale factor must be >= 1, got {k}")
    return UnitFractionTriple(t.n * k, t.x1 * k, t.x2 * k, t.x3 * k)


class Relation(Enum):
    ONE = "one"  # 4ABCD = A + B + pC
    TWO = "two"  # 4ABCD = p(A + B) + C


@dataclass(frozen=True)
class RosatiQuadruple:
    """(A, B, C, D) with E = (A+B)/C and F derived at construction.

    Relation one: F = 4BCD - 1 and FE = 4B^2 D + p.
    Relation two: FE = 4B^2 D + 1 and F = 4BCD - p.
    Either way the quadruple pins down p (``implied_p``).
    """

    kind: Relation
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 1:
            raise InvalidQuadruple(f"non-positive entry in {self.values}")
        if (self.a + self.b) % self.c:
            raise InvalidQuadruple(f"C={self.c} does not divide A+B={self.a + self.b}")
        if self.kind is Relation.TWO and (4 * self.b * self.b * self.d + 1) % self.e:
            raise InvalidQuadruple(f"E={self.e} does not divide 4B^2D+1")
        if self.implied_p < 1:
            raise InvalidQuadruple(f"{self.values} implies p={self.implied_p}")

    @property
    def values(self) -> tuple[int, int, int, int]:
        return self.a, self.b, self.c, self.d

    @property
    def e(self) -> int:
        return (self.a + self.b) // self.c

    @property
    def f(self) -> int:
        if self.kind is Relation.ONE:
            return 4 * self.b * self.c * self.d - 1
        return (4 * self.b * self.b * self.d + 1) // self.e

    @property
    def implied_p(self) -> int:
        if self.kind is Relation.ONE:
            return self.f * self.e - 4 * self.b * self.b * self.d
        return 4 * self.b * self.c * self.d - self.f

    def is_canonical(self) -> bool:
        """(A,B) = (B,C) = (C,D) = (4ABD,E) = (4BCD,F) = 1."""
        a, b, c, d = self.values
        return (
            math.gcd(a, b) == 1
            and math.gcd(b, c) == 1
            and math.gcd(c, d) == 1
            and math.gcd(4 * a * b * d, self.e) == 1
            and math.gcd(4 * b * c * d, self.f) == 1
        )


def verify_quadruple(q: RosatiQuadruple, p: int) -> bool:
    a, b, c, d = q.values
    if min(a, b, c, d, p) < 1:
        return False
    if q.kind is Relation.ONE:
        return 4 * a * b * c * d == a + b + p * c and math.gcd(a * b * d, p) == 1
    return 4 * a * b * c * d == p * (a + b) + c and math.gcd(a * b * c * d, p) == 1


def quadruple_to_triple(q: RosatiQuadruple, p: int) -> UnitFractionTriple:
    if not verify_quadruple(q, p):
        raise InvalidQuadruple(f"{q.kind.value} {q.values} does not hold for p={p}")
    a, b, c, d = q.values
    if q.kind is Relation.ONE:
        dens = (p * b * c * d, p * a * c * d, a * b * d)
    else:
        dens = (b * c * d, a * c * d, p * a * b * d)
    if len(set(dens)) < 3:
        raise DuplicateDenominators(f"{q.values} with p={p} gives {sorted(dens)}")
    return UnitFractionTriple.from_denominators(p, dens)


def brute_force_decompose(n: int, want_all: bool = False) -> list[UnitFractionTriple]:
    """Every (or the lexicographically smallest) decomposition of 4/n.

    For fixed x1 the remainder u/v = 4/n - 1/x1 splits as 1/x2 + 1/x3 exactly
    when (u*x2 - v)(u*x3 - v) = v^2, so x2 comes from divisors of v^2 below v.
    """
    found: list[UnitFractionTriple] = []
    if n < 1:
        return found
    n_factors = factorize(n)
    # 3/x1 > 4/n, and 1/x1 < 4/n
    for x1 in range(n // 4 + 1, (3 * n + 3) // 4):
        num, den = 4 * x1 - n, n * x1
        if num <= 0:
            continue
        g = math.gcd(num, den)
        u, v = num // g, den // g
        factors = dict(n_factors)
        for p, e in factorize(x1).items():
            factors[p] = factors.get(p, 0) + e
        for p, e in factorize(g).items():
            factors[p] -= e
        squared = {p: 2 * e for p, e in factors.items() if e}
        hits = []
        for d1 in divisors_from_factors(squared):
            if d1 >= v:
                break
            if (d1 + v) % u:
                continue
            d2 = v * v // d1
            if (d2 + v) % u:
                continue
            x2, x3 = (d1 + v) // u, (d2 + v) // u
            if x2 > x1:
                hits.append(UnitFractionTriple(n, x1, x2, x3))
        if hits:
            if not want_all:
                return [min(hits)]
            found.extend(sorted(hits))
    return found
