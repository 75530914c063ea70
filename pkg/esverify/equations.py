"""The seven constant-coefficient modular equations and what they certify.

Relation one (4ABCD = A + B + pC) is reached through 6a, 6b, 6c and relation
two (4ABCD = p(A + B) + C) through 7a, 7b, 7c, 7d. Each template has three
constant parameters; for a progression p = a*t + b every modulus in the
template must divide a, which makes the parameter space finite.

Every (params, modulus, residue) triple produced by ``template_classes`` is a
polynomial identity in t: for each n in the class the "conversely" formulas
give positive integers (A, B, C, D).
"""

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterator, Union

import numpy as np

from esverify.arith import (
    Incompatible,
    ResidueClass,
    crt_combine,
    divisors,
    divisors_from_factors,
    factorize,
    is_quadratic_residue,
    mod_inverse,
    prime_factors,
    solve_linear_congruence,
)
from esverify.constants import CLOSED_FORM_RESIDUES, DEFAULT_SEARCH_PRODUCT
from esverify.decomp import (
    DuplicateDenominators,
    InvalidQuadruple,
    Relation,
    RosatiQuadruple,
    UnitFractionTriple,
    closed_form_decompose,
    distinct_triple,
    quadruple_to_triple,
    scale_decomposition,
    verify_quadruple,
)


class InvalidModulus(ValueError):
    """Progression period not divisible by 4."""


class InvalidParams(ValueError):
    """Template parameters violate the template's own side conditions."""


class EquationId(Enum):
    E6A = "6a"
    E6B = "6b"
    E6C = "6c"
    E7A = "7a"
    E7B = "7b"
    E7C = "7c"
    E7D = "7d"

    @property
    def relation(self) -> Relation:
        return Relation.ONE if self.value.startswith("6") else Relation.TWO

    @property
    def param_names(self) -> tuple[str, str, str]:
        return PARAM_NAMES[self]


PARAM_NAMES = {
    EquationId.E6A: ("B", "C", "D"),
    EquationId.E6B: ("A", "B", "E"),
    EquationId.E6C: ("B", "D", "E"),
    EquationId.E7A: ("A", "B", "E"),
    EquationId.E7B: ("B", "C", "F"),
    EquationId.E7C: ("B", "D", "F"),
    EquationId.E7D: ("C", "D", "F"),
}


@dataclass(frozen=True)
class EquationParams:
    id: EquationId
    values: tuple[int, int, int]

    def __post_init__(self):
        if len(self.values) != 3 or min(self.values) < 1:
            raise InvalidParams(f"{self.id.value} needs three positive parameters, got {self.values}")
        x, y, z = self.values
        if self.id in (EquationId.E6B, EquationId.E7A) and (x + y) % z:
            raise InvalidParams(f"E={z} does not divide A+B={x + y}")
        if self.id is EquationId.E7A and math.gcd(z, 4 * x * y) != 1:
            raise InvalidParams(f"E={z} is not coprime to 4AB={4 * x * y}")
        if self.id is EquationId.E7C and (4 * x * x * y + 1) % z:
            raise InvalidParams(f"F={z} does not divide 4B^2D+1={4 * x * x * y + 1}")

    @classmethod
    def of(cls, id: EquationId, **params: int) -> "EquationParams":
        return cls(id, tuple(params[name] for name in PARAM_NAMES[id]))

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.id.param_names, self.values))

    def __str__(self) -> str:
        body = " ".join(f"{k}={v}" for k, v in self.as_dict().items())
        return f"({self.id.value}) {body}"


class ClosedFormCase(Enum):
    MOD3 = 3
    MOD4 = 4
    MOD8 = 8


@dataclass(frozen=True)
class EquationCert:
    params: EquationParams

    def __str__(self) -> str:
        return str(self.params)


@dataclass(frozen=True)
class ClosedFormCert:
    case: ClosedFormCase

    def __str__(self) -> str:
        m = self.case.value
        return f"closed form b = {CLOSED_FORM_RESIDUES[m]} mod {m}"


@dataclass(frozen=True)
class ScaledCert:
    k: int
    inner: "Certificate"

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"scaling factor must be > 1, got {self.k}")

    def __str__(self) -> str:
        return f"{self.k} x [{self.inner}]"


Certificate = Union[EquationCert, ScaledCert, ClosedFormCert]


Solution = tuple[Relation, tuple[int, int, int, int]]


def _reconstruct(ep: EquationParams, n: int) -> Solution | None:
    """Apply the template's "conversely" formulas to n.

    Only divisibility, positivity and the relation itself are checked; the
    quadruple invariants that hold for prime n are left to the caller.
    """
    x, y, z = ep.values
    i = ep.id
    if i is EquationId.E6A:
        b, c, d = x, y, z
        q = 4 * b * c * d - 1
        if (b + n * c) % q:
            return None
        kind, values = Relation.ONE, ((b + n * c) // q, b, c, d)
    elif i is EquationId.E6B:
        a, b, e = x, y, z
        if (n + e) % (4 * a * b):
            return None
        kind, values = Relation.ONE, (a, b, (a + b) // e, (n + e) // (4 * a * b))
    elif i is EquationId.E6C:
        b, d, e = x, y, z
        if (n + e) % (4 * b * d) or (n + e + 4 * b * b * d) % (4 * b * d * e):
            return None
        a = (n + e) // (4 * b * d)
        kind, values = Relation.ONE, (a, b, (n + e + 4 * b * b * d) // (4 * b * d * e), d)
    elif i is EquationId.E7A:
        a, b, e = x, y, z
        if (n * e + 1) % (4 * a * b):
            return None
        kind, values = Relation.TWO, (a, b, (a + b) // e, (n * e + 1) // (4 * a * b))
    elif i is EquationId.E7B:
        b, c, f = x, y, z
        if (n + f) % (4 * b * c) or (n * b + c) % f:
            return None
        kind, values = Relation.TWO, ((n * b + c) // f, b, c, (n + f) // (4 * b * c))
    elif i is EquationId.E7C:
        b, d, f = x, y, z
        if (n + f) % (4 * b * d):
            return None
        c = (n + f) // (4 * b * d)
        kind, values = Relation.TWO, (c * ((4 * b * b * d + 1) // f) - b, b, c, d)
    else:
        c, d, f = x, y, z
        if (n + f) % (4 * c * d):
            return None
        b = (n + f) // (4 * c * d)
        if (n * b + c) % f:
            return None
        kind, values = Relation.TWO, ((n * b + c) // f, b, c, d)
    a, b, c, d = values
    if min(values) < 1:
        return None
    if kind is Relation.ONE:
        holds = 4 * a * b * c * d == a + b + n * c
    else:
        holds = 4 * a * b * c * d == n * (a + b) + c
    return (kind, values) if holds else None


def _denominators(solution: Solution, n: int) -> tuple[int, int, int]:
    kind, (a, b, c, d) = solution
    if kind is Relation.ONE:
        return n * b * c * d, n * a * c * d, a * b * d
    return b * c * d, a * c * d, n * a * b * d


def check_certifies(ep: EquationParams, n: int) -> RosatiQuadruple | None:
    """The quadruple template `ep` builds for n, when it is a verified one.

    Composite n can satisfy the congruences with a solution that is not a
    valid quadruple (C not dividing A+B, or a shared factor with n); use
    ``instantiate`` for the decomposition itself.
    """
    solution = _reconstruct(ep, n)
    if solution is None:
        return None
    kind, values = solution
    try:
        quad = RosatiQuadruple(kind, *values)
    except InvalidQuadruple:
        return None
    return quad if verify_quadruple(quad, n) else None


def _odd_divisors_of_product(*factors: int) -> list[int]:
    merged: dict[int, int] = {}
    for value in factors:
        for p, e in factorize(value).items():
            merged[p] = merged.get(p, 0) + e
    merged.pop(2, None)
    return divisors_from_factors(merged)


def _pairs(n: int) -> Iterator[tuple[int, int]]:
    for x in divisors(n):
        yield x, n // x


def _triples(n: int) -> Iterator[tuple[int, int, int]]:
    for x in divisors(n):
        for y in divisors(n // x):
            yield x, y, n // x // y


def _classes_6a(a: int):
    for q in divisors(a):
        if q % 4 != 3:
            continue
        for b, c, d in _triples((q + 1) // 4):
            yield (b, c, d), q, (-b * mod_inverse(c, q)) % q


def _classes_6b(a: int):
    for ab in divisors(a // 4):
        for x, y in _pairs(ab):
            m = 4 * ab
            for e in divisors(x + y):
                yield (x, y, e), m, (-e) % m


def _classes_6c(a: int):
    for bde in divisors(a // 4):
        for b, d, e in _triples(bde):
            m = 4 * bde
            yield (b, d, e), m, (-e - 4 * b * b * d) % m


def _classes_7a(a: int):
    for ab in divisors(a // 4):
        m = 4 * ab
        for x, y in _pairs(ab):
            for e in divisors(x + y):
                if math.gcd(e, m) == 1:
                    yield (x, y, e), m, (-mod_inverse(e, m)) % m


def _classes_7b(a: int):
    for bc in divisors(a // 4):
        m = 4 * bc
        for b, c in _pairs(bc):
            for f in _odd_divisors_of_product(a, b):
                # b*B = -C (mod F) has a class mod F/gcd(B, F), and that divides a
                side = solve_linear_congruence(b, -c, f)
                if side is None:
                    continue
                try:
                    both = crt_combine(ResidueClass.of(-f, m), side)
                except Incompatible:
                    continue
                yield (b, c, f), both.modulus, both.residue


def _classes_7c(a: int):
    for bd in divisors(a // 4):
        m = 4 * bd
        for b, d in _pairs(bd):
            for f in divisors_from_factors(factorize(4 * b * b * d + 1)):
                yield (b, d, f), m, (-f) % m


def _classes_7d(a: int):
    # b = 4CD*s - F with B = (a/4CD)*t + s; F | p*B + C identically in t
    # means F | a*a', F | 2*a*s and F | 4CD*s^2 + C, which bounds F by
    # gcd(a*a', 2*a*C) and makes s periodic modulo gcd(F, a').
    for cd in divisors(a // 4):
        m0 = 4 * cd
        a1 = a // m0
        for c, d in _pairs(cd):
            for f in _odd_divisors_of_product(math.gcd(a * a1, 2 * a * c)):
                g = math.gcd(f, a1)
                s = np.arange(g, dtype=np.int64)
                ok = ((2 * a * s) % f == 0) & ((m0 * s * s + c) % f == 0)
                for s_ok in np.flatnonzero(ok):
                    modulus = m0 * g
                    yield (c, d, f), modulus, (m0 * int(s_ok) - f) % modulus


_GENERATORS = {
    EquationId.E6A: _classes_6a,
    EquationId.E6B: _classes_6b,
    EquationId.E6C: _classes_6c,
    EquationId.E7A: _classes_7a,
    EquationId.E7B: _classes_7b,
    EquationId.E7C: _classes_7c,
    EquationId.E7D: _classes_7d,
}


@lru_cache(maxsize=8192)
def template_classes(id: EquationId, a: int) -> tuple[tuple[EquationParams, int, int], ...]:
    """(params, modulus, residue) for every class of period dividing a that
    template `id` certifies. Only 6a applies when 4 does not divide a."""
    if a < 1:
        raise ValueError(f"period must be >= 1, got {a}")
    if id is not EquationId.E6A and a % 4:
        return ()
    return tuple(
        (EquationParams(id, values), modulus, residue)
        for values, modulus, residue in _GENERATORS[id](a)
    )


def certified_classes(id: EquationId, a: int) -> set[ResidueClass]:
    if a < 1 or a % 4:
        raise InvalidModulus(f"period {a} is not a positive multiple of 4")
    return {ResidueClass(modulus, residue) for _, modulus, residue in template_classes(id, a)}


def _closed_form_case(a: int, b: int) -> ClosedFormCase | None:
    for case in ClosedFormCase:
        m = case.value
        if a % m == 0 and b % m == CLOSED_FORM_RESIDUES[m]:
            return case
    return None


@lru_cache(maxsize=None)
def _certify_progression(a: int, b: int) -> Certificate | None:
    g = math.gcd(a, b)
    if g > 1:
        for k in prime_factors(g):
            inner = _certify_progression(a // k, b // k)
            if inner is not None:
                return ScaledCert(k, inner)
    for id in EquationId:
        for params, modulus, residue in template_classes(id, a):
            if b % modulus == residue:
                return EquationCert(params)
    case = _closed_form_case(a, b)
    return ClosedFormCert(case) if case is not None else None


def progression_certified(a: int, b: int) -> Certificate | None:
    """A certificate that 4/(a*t + b) is 3-Egyptian for every t, or None.

    Non-primitive classes try the scaling rule first so the certificate
    reflects the shared factor.
    """
    if a < 1:
        raise ValueError(f"period must be >= 1, got {a}")
    if not 0 <= b < a:
        raise ValueError(f"offset {b} outside [0, {a})")
    return _certify_progression(a, b)


@lru_cache(maxsize=4096)
def _bitmap(a: int) -> np.ndarray:
    mask = np.zeros(a, dtype=bool)
    for id in EquationId:
        for _, modulus, residue in template_classes(id, a):
            mask[residue::modulus] = True
    for m, r in CLOSED_FORM_RESIDUES.items():
        if a % m == 0:
            mask[r::m] = True
    for k in prime_factors(a):
        mask[0::k] |= _bitmap(a // k)
    mask.setflags(write=False)
    return mask


def certified_bitmap(a: int) -> np.ndarray:
    """Read-only boolean array: entry b is set iff progression_certified(a, b)."""
    if a < 1:
        raise ValueError(f"period must be >= 1, got {a}")
    return _bitmap(a)


def instantiate(cert: Certificate, n: int) -> UnitFractionTriple | None:
    """The explicit decomposition a certificate yields at a concrete n."""
    if isinstance(cert, ScaledCert):
        if n % cert.k:
            return None
        inner = instantiate(cert.inner, n // cert.k)
        return scale_decomposition(inner, cert.k) if inner is not None else None
    if isinstance(cert, ClosedFormCert):
        return closed_form_decompose(n) if n >= 3 else None
    solution = _reconstruct(cert.params, n)
    if solution is None:
        return None
    return distinct_triple(n, _denominators(solution, n))


def _params_for(id: EquationId, quad: RosatiQuadruple) -> EquationParams | None:
    a, b, c, d = quad.values
    e, f = quad.e, quad.f
    values = {
        EquationId.E6A: (b, c, d),
        EquationId.E6B: (a, b, e),
        EquationId.E6C: (b, d, e),
        EquationId.E7A: (a, b, e),
        EquationId.E7B: (b, c, f),
        EquationId.E7C: (b, d, f),
        EquationId.E7D: (c, d, f),
    }[id]
    try:
        return EquationParams(id, values)
    except InvalidParams:
        return None


def _label(quad: RosatiQuadruple, p: int) -> tuple[tuple, EquationParams]:
    best = None
    for rank, id in enumerate(EquationId):
        if id.relation is not quad.kind:
            continue
        params = _params_for(id, quad)
        if params is None or check_certifies(params, p) != quad:
            continue
        key = (max(params.values), sum(params.values), params.values, rank)
        if best is None or key < best[0]:
            best = (key, params)
    if best is None:
        raise InvalidQuadruple(f"no template reproduces {quad.values} for p={p}")
    return best


def label_quadruple(quad: RosatiQuadruple, p: int) -> EquationParams:
    """The template reproducing `quad` with the smallest parameters."""
    return _label(quad, p)[1]


def _relation_one_quadruples(p: int) -> Iterator[RosatiQuadruple]:
    # p/4 < ABD <= p/2 and E = 4ABD - p divides A + B
    hi = p // 2
    for a in range(1, hi + 1):
        for b in range(1, hi // a + 1):
            ab = a * b
            d_top = min(hi // ab, (p + a + b) // (4 * ab))
            for d in range(p // (4 * ab) + 1, d_top + 1):
                e = 4 * ab * d - p
                if (a + b) % e == 0:
                    yield RosatiQuadruple(Relation.ONE, a, b, (a + b) // e, d)


def _relation_two_quadruples(p: int) -> Iterator[RosatiQuadruple]:
    # with B <= A: p/4 < BCD <= 2p/3 and F = 4BCD - p divides pB + C;
    # quadruples with B > A give the same triples as their swap
    hi = 2 * p // 3
    for b in range(1, hi + 1):
        for c in range(1, hi // b + 1):
            bc = b * c
            for d in range(p // (4 * bc) + 1, hi // bc + 1):
                f = 4 * bc * d - p
                if (p * b + c) % f:
                    continue
                a = (p * b + c) // f
                try:
                    yield RosatiQuadruple(Relation.TWO, a, b, c, d)
                except InvalidQuadruple:
                    continue


def decompose_all_via_equations(
    p: int,
) -> list[tuple[Certificate, RosatiQuadruple, UnitFractionTriple]]:
    """Every decomposition of 4/p reachable through the seven templates,
    one entry per distinct triple, sorted by triple.

    When several quadruples give the same triple (A and B swapped, say) the
    canonical one wins, then the one labelled with the smallest parameters.
    """
    if p < 3 or p % 2 == 0:
        raise ValueError(f"need an odd p >= 3, got {p}")
    by_triple: dict[UnitFractionTriple, tuple[tuple, RosatiQuadruple, EquationParams]] = {}
    quads = list(_relation_one_quadruples(p)) + list(_relation_two_quadruples(p))
    for quad in quads:
        if not verify_quadruple(quad, p):
            continue
        try:
            triple = quadruple_to_triple(quad, p)
        except DuplicateDenominators:
            continue
        label_key, params = _label(quad, p)
        key = (not quad.is_canonical(), label_key)
        held = by_triple.get(triple)
        if held is None or key < held[0]:
            by_triple[triple] = (key, quad, params)
    return [
        (EquationCert(params), quad, triple)
        for triple, (_, quad, params) in sorted(by_triple.items())
    ]


def is_qnr_certified_consistent(a: int, b: int) -> bool:
    """Schinzel's restriction: a certified coprime class is never a square class."""
    if math.gcd(a, b) != 1:
        raise ValueError(f"{b} is not coprime to {a}")
    if not is_quadratic_residue(b, a):
        return True
    return progression_certified(a, b % a) is None


def search_equation_decomposition(
    n: int, max_product: int = DEFAULT_SEARCH_PRODUCT
) -> tuple[EquationParams, UnitFractionTriple] | None:
    """First decomposition of 4/n found by trying small template parameters.

    Meant for n too large for ``decompose_all_via_equations``; tries 6a over
    B*C*D <= max_product, then 6b and 7a over A*B <= max_product.
    """
    for bcd in range(1, max_product + 1):
        q = 4 * bcd - 1
        for b, c, d in _triples(bcd):
            if (b + n * c) % q == 0:
                hit = _try(EquationParams(EquationId.E6A, (b, c, d)), n)
                if hit:
                    return hit
    for ab in range(1, max_product + 1):
        for x, y in _pairs(ab):
            for e in divisors(x + y):
                if (n + e) % (4 * ab) == 0:
                    hit = _try(EquationParams(EquationId.E6B, (x, y, e)), n)
                    if hit:
                        return hit
                if math.gcd(e, 4 * ab) == 1 and (n * e + 1) % (4 * ab) == 0:
                    hit = _try(EquationParams(EquationId.E7A, (x, y, e)), n)
                    if hit:
                        return hit
    return None


def _try(params: EquationParams, n: int) -> tuple[EquationParams, UnitFractionTriple] | None:
    triple = instantiate(EquationCert(params), n)
    return (params, triple) if triple is not None else None
