"""Shared value types for sieve runs, checkpoints and reports."""

from dataclasses import dataclass, field
from enum import Enum

from esverify.decomp import UnitFractionTriple


class FallbackKind(Enum):
    DECOMPOSED_BY_EQUATIONS = "equations"
    DECOMPOSED_BY_BRUTE_FORCE = "brute-force"
    DECOMPOSED_BY_SCALING = "scaling"
    COUNTEREXAMPLE_CANDIDATE = "counterexample-candidate"


@dataclass(frozen=True)
class FallbackOutcome:
    n: int
    kind: FallbackKind
    triples: tuple[UnitFractionTriple, ...] = ()

    @property
    def decomposed(self) -> bool:
        return self.kind is not FallbackKind.COUNTEREXAMPLE_CANDIDATE


@dataclass(frozen=True)
class Limit:
    """Resolved run bound: k in [0, k_count) and n <= max_n."""

    k_count: int
    max_n: int

    @classmethod
    def from_n(cls, n: int, G: int) -> "Limit":
        if n < 1:
            return cls(0, max(n, 0))
        return cls((n - 1) // G + 1, n)

    @classmethod
    def from_k(cls, k: int, G: int) -> "Limit":
        return cls(k, k * G - 1 if k > 0 else 0)


@dataclass(frozen=True)
class RunReport:
    mods: tuple[int, ...]
    per_mod_counts: tuple[int, ...]
    checked: int
    squares: int
    failures: tuple[FallbackOutcome, ...]
    unproven_squares: tuple[int, ...]
    k_count: int
    max_n: int
    G: int
    residue_count: int
    wall_time: float = field(default=0.0, compare=False)

    @property
    def certified(self) -> int:
        return sum(self.per_mod_counts)

    @property
    def accounting_holds(self) -> bool:
        return self.certified + self.squares + len(self.failures) == self.checked

    @property
    def counterexamples(self) -> tuple[FallbackOutcome, ...]:
        return tuple(f for f in self.failures if not f.decomposed)

    @property
    def ok(self) -> bool:
        return not self.counterexamples and not self.unproven_squares
