"""Modular filters S_m and shortened filters S*_m.

S_m holds the residues r mod m such that every n = 1 (mod 24) with
n = r (mod m) lies in a certified progression of period lcm(m, 24).
"""

import threading
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from esverify.arith import divisors, lcm
from esverify.constants import BASE_MODULUS, BASE_RESIDUE, SHORTENED_SUFFIX
from esverify.equations import certified_bitmap
from esverify.logging import Log


class EvenModulus(ValueError):
    """Filters exist only for odd moduli."""


class FilterFormatError(ValueError):
    """Malformed line in a filter file."""


@dataclass(frozen=True)
class Filter:
    m: int
    residues: tuple[int, ...]
    a: int = field(init=False)

    def __post_init__(self):
        if self.m < 1 or self.m % 2 == 0:
            raise EvenModulus(f"filter modulus must be odd and positive, got {self.m}")
        object.__setattr__(self, "a", lcm(self.m, BASE_MODULUS))

    @cached_property
    def table(self) -> np.ndarray:
        """Membership bitmap indexed by n % m."""
        table = np.zeros(self.m, dtype=bool)
        table[np.asarray(self.residues, dtype=np.intp)] = True
        table.setflags(write=False)
        return table

    @cached_property
    def _members(self) -> frozenset[int]:
        return frozenset(self.residues)

    def contains(self, n: int) -> bool:
        return n % self.m in self._members

    def __len__(self) -> int:
        return len(self.residues)


@dataclass(frozen=True)
class ShortenedFilter:
    m: int
    residues: tuple[int, ...]


FilterProvider = Callable[[int], Filter]


def compute_filter(m: int) -> Filter:
    if m < 3 or m % 2 == 0:
        raise EvenModulus(f"filter modulus must be odd and >= 3, got {m}")
    a = lcm(m, BASE_MODULUS)
    bs = np.arange(BASE_RESIDUE, a, BASE_MODULUS)
    hits = bs[certified_bitmap(a)[bs]]
    return Filter(m, tuple(int(r) for r in np.unique(hits % m)))


def filter_contains(f: Filter, n: int) -> bool:
    return f.contains(n)


def shorten(m: int, provider: FilterProvider) -> ShortenedFilter:
    full = provider(m)
    proper = [q for q in divisors(m) if 1 < q < m]
    kept = [
        x for x in full.residues
        if not any(provider(q).contains(x) for q in proper)
    ]
    return ShortenedFilter(m, tuple(kept))


class FilterBank:
    """Memo of filters by modulus, safe to share across worker threads."""

    def __init__(self, filters: Iterable[Filter] = ()):
        self._filters: dict[int, Filter] = {f.m: f for f in filters}
        self._lock = threading.Lock()

    def __contains__(self, m: int) -> bool:
        return m in self._filters

    def __call__(self, m: int) -> Filter:
        return self.get(m)

    def get(self, m: int) -> Filter:
        f = self._filters.get(m)
        if f is None:
            Log.d(f"computing filter for m={m}")
            f = compute_filter(m)
            with self._lock:
                f = self._filters.setdefault(m, f)
        return f

    def ensure(self, moduli: Iterable[int]) -> dict[int, Filter]:
        moduli = list(dict.fromkeys(moduli))
        missing = [m for m in moduli if m not in self._filters]
        if missing:
            Log.i(f"Computing {len(missing)} filter(s) (max modulus {max(missing)})...")
        for m in missing:
            self.get(m)
        return {m: self._filters[m] for m in moduli}

    def shortened(self, m: int) -> ShortenedFilter:
        return shorten(m, self.get)

    def filters(self) -> list[Filter]:
        return [self._filters[m] for m in sorted(self._filters)]

    @classmethod
    def load(cls, path: Path) -> "FilterBank":
        if Path(path).suffix == SHORTENED_SUFFIX:
            raise FilterFormatError(f"{path} holds shortened filters, which cannot be used for certification")
        return cls(load_filters(path))

    def save(self, path: Path) -> None:
        save_filters(path, self.filters())


def format_filter_line(m: int, residues: Iterable[int]) -> str:
    return f"{m}: {','.join(str(r) for r in residues)}"


def save_filters(path: Path, filters: Iterable[Filter | ShortenedFilter]) -> Path:
    """Write one line per filter; returns the path actually written.

    Shortened filters always land in a file ending in ``.star``.
    """
    filters = sorted(filters, key=lambda f: f.m)
    kinds = {type(f) for f in filters}
    if len(kinds) > 1:
        raise ValueError("cannot mix filters and shortened filters in one file")
    path = Path(path)
    if kinds == {ShortenedFilter} and path.suffix != SHORTENED_SUFFIX:
        path = path.with_name(path.name + SHORTENED_SUFFIX)
    lines = [format_filter_line(f.m, f.residues) for f in filters]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def parse_filter_line(line: str, lineno: int = 0) -> tuple[int, tuple[int, ...]] | None:
    text = line.split("#", 1)[0].strip()
    if not text:
        return None
    head, sep, body = text.partition(":")
    if not sep:
        raise FilterFormatError(f"line {lineno}: missing ':' in {line.strip()!r}")
    try:
        m = int(head)
        residues = tuple(int(x) for x in body.replace(" ", "").split(",") if x)
    except ValueError:
        raise FilterFormatError(f"line {lineno}: non-integer field in {line.strip()!r}") from None
    if m < 1 or m % 2 == 0:
        raise FilterFormatError(f"line {lineno}: modulus {m} is not odd")
    if any(not 0 <= r < m for r in residues):
        raise FilterFormatError(f"line {lineno}: residue outside [0, {m})")
    if list(residues) != sorted(set(residues)):
        raise FilterFormatError(f"line {lineno}: residues must be strictly ascending")
    return m, residues


def load_filters(path: Path) -> list[Filter] | list[ShortenedFilter]:
    """Filters from a file; a ``.star`` file yields shortened filters."""
    path = Path(path)
    kind = ShortenedFilter if path.suffix == SHORTENED_SUFFIX else Filter
    filters = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            parsed = parse_filter_line(line, lineno)
            if parsed is not None:
                filters.append(kind(*parsed))
    return filters
