"""CRT wheel (G, R): candidates n = r + k*G that no construction-time filter
already certifies.

G = 24 * prod(primes). R starts as {1} mod 24 and is lifted one prime at a
time; after each lift every policy modulus that newly divides the period
prunes the residues whose reduction lands in its filter.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator

import numpy as np

from esverify.arith import divisors, is_prime
from esverify.constants import (
    BASE_MODULUS,
    BASE_RESIDUE,
    DEFAULT_POLICY_MAX_MODULUS,
    POLICY_ALL_ODD_DIVISORS,
    POLICY_CUSTOM,
    POLICY_PRIMES,
)
from esverify.filters import FilterBank, FilterProvider
from esverify.logging import Log


class PolicyModulusInvalid(ValueError):
    """A reduction modulus is even, <= 1, or does not divide G."""


class EmptyWheel(ValueError):
    """The wheel has no residues left."""


class WheelFormatError(ValueError):
    """Malformed wheel file."""


@dataclass(frozen=True)
class WheelPolicy:
    kind: str = POLICY_PRIMES
    moduli: tuple[int, ...] = ()
    max_modulus: int = DEFAULT_POLICY_MAX_MODULUS

    @classmethod
    def parse(cls, text: str, max_modulus: int = DEFAULT_POLICY_MAX_MODULUS) -> "WheelPolicy":
        """`primes`, `all-odd-divisors[:max]` or `custom:q1,q2,...`."""
        kind, _, arg = text.strip().partition(":")
        try:
            if kind == POLICY_PRIMES and not arg:
                return cls(POLICY_PRIMES, max_modulus=max_modulus)
            if kind == POLICY_ALL_ODD_DIVISORS:
                return cls(kind, max_modulus=int(arg) if arg else max_modulus)
            if kind == POLICY_CUSTOM:
                moduli = tuple(int(x) for x in arg.split(",") if x.strip())
                return cls(kind, moduli, max_modulus)
        except ValueError:
            pass
        raise PolicyModulusInvalid(f"unknown reduction policy {text!r}")

    def resolve(self, primes: tuple[int, ...]) -> tuple[int, ...]:
        if self.kind == POLICY_PRIMES:
            return tuple(primes)
        if self.kind == POLICY_ALL_ODD_DIVISORS:
            g = BASE_MODULUS
            for p in primes:
                g *= p
            return tuple(q for q in divisors(g, odd_only=True) if 1 < q <= self.max_modulus)
        return self.moduli

    def describe(self) -> str:
        if self.kind == POLICY_ALL_ODD_DIVISORS:
            return f"{self.kind}:{self.max_modulus}"
        if self.kind == POLICY_CUSTOM:
            return f"{self.kind}:{','.join(str(q) for q in self.moduli)}"
        return self.kind


@dataclass(frozen=True, eq=False)
class Wheel:
    primes: tuple[int, ...]
    G: int
    residues: np.ndarray = field(repr=False)
    policy: tuple[int, ...] = ()
    policy_label: str = POLICY_CUSTOM

    def __eq__(self, other) -> bool:
        if not isinstance(other, Wheel):
            return NotImplemented
        return (
            self.primes == other.primes
            and self.G == other.G
            and self.policy == other.policy
            and np.array_equal(self.residues, other.residues)
        )

    __hash__ = None

    def __len__(self) -> int:
        return int(self.residues.size)

    def contains(self, n: int) -> bool:
        r = n % self.G
        i = int(np.searchsorted(self.residues, r))
        return i < self.residues.size and int(self.residues[i]) == r

    def block(self, k: int) -> np.ndarray:
        """All candidates r + k*G of one turn, ascending."""
        return self.residues + np.int64(k) * np.int64(self.G)


def build_wheel(
    primes,
    policy,
    provider: FilterProvider | None = None,
    policy_label: str = POLICY_CUSTOM,
) -> Wheel:
    primes = tuple(int(p) for p in primes)
    if len(set(primes)) != len(primes) or any(p % 2 == 0 or not is_prime(p) for p in primes):
        raise PolicyModulusInvalid(f"wheel primes must be distinct odd primes, got {primes}")
    G = BASE_MODULUS
    for p in primes:
        G *= p
    policy = tuple(dict.fromkeys(int(q) for q in policy))
    for q in policy:
        if q <= 1 or q % 2 == 0 or G % q:
            raise PolicyModulusInvalid(f"policy modulus {q} must be odd, > 1 and divide G={G}")
    provider = provider or FilterBank()

    period = BASE_MODULUS
    residues = np.array([BASE_RESIDUE], dtype=np.int64)
    residues = _prune(residues, [q for q in policy if period % q == 0], provider)
    for p in primes:
        lifted = (residues[:, None] + period * np.arange(p, dtype=np.int64)[None, :]).ravel()
        fresh = [q for q in policy if (period * p) % q == 0 and period % q]
        period *= p
        residues = _prune(lifted, fresh, provider)
        Log.d(f"wheel lifted by {p}: period {period}, {residues.size} residue(s) after pruning {fresh}")
    residues = np.sort(residues)
    residues.setflags(write=False)
    return Wheel(primes, G, residues, policy, policy_label)


def _prune(residues: np.ndarray, moduli, provider: FilterProvider) -> np.ndarray:
    for q in moduli:
        residues = residues[~provider(q).table[residues % q]]
    return residues


def build_wheel_from_policy(primes, policy: WheelPolicy, provider: FilterProvider | None = None) -> Wheel:
    primes = tuple(primes)
    return build_wheel(primes, policy.resolve(primes), provider, policy.describe())


def mean_gap(w: Wheel) -> Fraction:
    if len(w) == 0:
        raise EmptyWheel(f"wheel G={w.G} has no residues")
    return Fraction(w.G, len(w))


def candidates(w: Wheel, k_range: range) -> Iterator[int]:
    for k in k_range:
        for r in w.residues:
            yield int(r) + k * w.G


def excluding_modulus(w: Wheel, n: int, provider: FilterProvider) -> int | None:
    """The first policy modulus whose filter traps n, or None."""
    for q in w.policy:
        if provider(q).contains(n):
            return q
    return None


def save_wheel(path: Path, w: Wheel) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = (
        f"G={w.G} primes={','.join(str(p) for p in w.primes)} "
        f"policy={w.policy_label} moduli={','.join(str(q) for q in w.policy)}"
    )
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(header + "\n")
        for r in w.residues:
            handle.write(f"{int(r)}\n")


def load_wheel(path: Path) -> Wheel:
    with open(path, encoding="utf-8") as handle:
        header = handle.readline()
        body = handle.read().split()
    fields = dict(part.partition("=")[::2] for part in header.split())
    try:
        G = int(fields["G"])
        primes = tuple(int(p) for p in fields.get("primes", "").split(",") if p)
        moduli = tuple(int(q) for q in fields.get("moduli", "").split(",") if q)
        residues = np.array([int(r) for r in body], dtype=np.int64)
    except (KeyError, ValueError) as exc:
        raise WheelFormatError(f"{path}: bad wheel file ({exc})") from None
    expected = BASE_MODULUS
    for p in primes:
        expected *= p
    if expected != G:
        raise WheelFormatError(f"{path}: G={G} does not match primes {primes}")
    if residues.size and (
        np.any(np.diff(residues) <= 0)
        or residues[0] < 0
        or residues[-1] >= G
        or np.any(residues % BASE_MODULUS != BASE_RESIDUE)
    ):
        raise WheelFormatError(f"{path}: residues must be ascending, in [0, G) and 1 mod 24")
    residues.setflags(write=False)
    return Wheel(primes, G, residues, moduli, fields.get("policy", POLICY_CUSTOM))
