"""The verification engine.

Each turn k of the wheel is one numpy block n = R + k*G. Squares are split
off first; the rest meet the MOD filters in order and every trap shrinks the
block. Whatever survives all filters goes to ``fallback_check``.

Work is cut into chunks of ``chunk_size`` turns. Workers return private
counters and the main thread merges them in chunk order, so the report does
not depend on the thread count. Only the main thread writes checkpoints.
"""

import hashlib
import math
import os
import time
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Mapping

import numpy as np

from esverify.arith import is_perfect_square, smallest_prime_factor
from esverify.checkpoint import CheckpointState, load_checkpoint, save_checkpoint
from esverify.constants import (
    DEFAULT_EXHAUSTIVE_LIMIT,
    K_LIMIT_RE,
    SCALING_FACTOR_BOUND,
    SCI_LIMIT_RE,
    THREADS_ENV,
)
from esverify.decomp import (
    UnitFractionTriple,
    brute_force_decompose,
    closed_form_decompose,
    scale_decomposition,
)
from esverify.equations import decompose_all_via_equations, search_equation_decomposition
from esverify.filters import Filter, FilterProvider
from esverify.logging import Log
from esverify.models import FallbackKind, FallbackOutcome, Limit, RunReport
from esverify.runtime import RunContext
from esverify.wheel import Wheel

# Filters whose residues are precomputed per wheel residue, updated by
# adding G % m each turn instead of dividing.
_PRECOMPUTED_FILTERS = 8

# 4/1 has no decomposition; the first turn skips n = 1.
_FIRST_CANDIDATE = 2


class SieveConfigError(ValueError):
    """Inconsistent sieve configuration."""


class SieveInterrupted(RuntimeError):
    """Raised when the stop flag ends a run early; carries the merged
    report of every completed chunk."""

    def __init__(self, report: RunReport, completed_chunks: int):
        super().__init__(f"run interrupted after {completed_chunks} chunk(s)")
        self.report = report
        self.completed_chunks = completed_chunks


def default_threads() -> int:
    value = os.environ.get(THREADS_ENV, "").strip()
    if value:
        try:
            threads = int(value)
        except ValueError:
            Log.w(f"Ignoring non-integer {THREADS_ENV}={value!r}")
        else:
            if threads >= 1:
                return threads
            Log.w(f"Ignoring {THREADS_ENV}={value!r}; must be >= 1")
    return os.cpu_count() or 1


def parse_limit(text: str, G: int) -> Limit:
    """`123456`, `1e12` (exact, integral power of ten) or `K=<turns>`."""
    text = text.strip().replace("_", "")
    match = K_LIMIT_RE.match(text)
    if match:
        return Limit.from_k(int(match.group(1)), G)
    match = SCI_LIMIT_RE.match(text)
    if match:
        return Limit.from_n(int(match.group(1)) * 10 ** int(match.group(2)), G)
    if text.isdigit():
        return Limit.from_n(int(text), G)
    raise ValueError(f"limit must be N, <m>e<k> or K=<int>, got {text!r}")


@dataclass
class SieveConfig:
    wheel: Wheel
    mods: tuple[int, ...]
    filters: Mapping[int, Filter]
    limit: Limit
    threads: int = 1
    chunk_size: int = 4
    checkpoint_path: Path | None = None
    prove_squares: bool = True
    exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT
    progress_interval: float = 10.0
    _hash: bytes | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.mods = tuple(int(m) for m in self.mods)
        if not self.mods:
            raise SieveConfigError("MOD list is empty")
        missing = [m for m in self.mods if m not in self.filters]
        if missing:
            raise SieveConfigError(f"no filter for modulus {missing[0]}")
        if len(set(self.mods)) != len(self.mods):
            raise SieveConfigError("MOD list repeats a modulus")
        if self.limit.k_count < 0:
            raise SieveConfigError("limit must not be negative")
        if self.threads < 1 or self.chunk_size < 1:
            raise SieveConfigError("threads and chunk_size must be >= 1")
        if self.wheel.G * max(self.limit.k_count, 1) >= 2**62:
            raise SieveConfigError("limit exceeds the 64-bit candidate range")

    @property
    def chunk_count(self) -> int:
        return math.ceil(self.limit.k_count / self.chunk_size)

    def config_hash(self) -> bytes:
        """Digest of everything that shapes the report; threads excluded."""
        if self._hash is None:
            h = hashlib.sha256()
            w = self.wheel
            h.update(f"G={w.G};primes={w.primes};policy={w.policy};".encode())
            h.update(np.ascontiguousarray(w.residues, dtype="<i8").tobytes())
            for m in self.mods:
                h.update(f"|{m}:{','.join(map(str, self.filters[m].residues))}".encode())
            h.update(
                f"|K={self.limit.k_count};N={self.limit.max_n};chunk={self.chunk_size};"
                f"squares={self.prove_squares};exhaustive={self.exhaustive_limit}".encode()
            )
            self._hash = h.digest()
        return self._hash


def certify(n: int, mods, filters: Mapping[int, Filter] | FilterProvider) -> int | None:
    lookup = filters.__getitem__ if isinstance(filters, Mapping) else filters
    for m in mods:
        if lookup(m).contains(n):
            return m
    return None


def _quick_triple(x: int, exhaustive_limit: int) -> UnitFractionTriple | None:
    if x < 3:
        return None
    triple = closed_form_decompose(x)
    if triple is not None:
        return triple
    if x <= exhaustive_limit:
        found = brute_force_decompose(x)
        return found[0] if found else None
    outcome = fallback_check(x, exhaustive_limit)
    return outcome.triples[0] if outcome.decomposed else None


def prove_square(n: int, exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT) -> FallbackOutcome:
    """4/r^2 from the decomposition of 4/r scaled by r."""
    square, root = is_perfect_square(n)
    if not square:
        raise ValueError(f"{n} is not a perfect square")
    inner = _quick_triple(root, exhaustive_limit)
    if inner is None:
        return FallbackOutcome(n, FallbackKind.COUNTEREXAMPLE_CANDIDATE)
    return FallbackOutcome(n, FallbackKind.DECOMPOSED_BY_SCALING, (scale_decomposition(inner, root),))


@lru_cache(maxsize=4096)
def fallback_check(n: int, exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT) -> FallbackOutcome:
    """Decompose an n no filter certified.

    Up to `exhaustive_limit` every equation decomposition and the smallest
    brute-force one are collected. Above it the first success among closed
    forms, the square root, a bounded equation search and a small prime
    factor wins.
    """
    if n < 3:
        return FallbackOutcome(n, FallbackKind.COUNTEREXAMPLE_CANDIDATE)
    if n <= exhaustive_limit:
        via_equations = [t for _, _, t in decompose_all_via_equations(n)] if n % 2 else []
        via_brute = brute_force_decompose(n)
        triples = tuple(sorted(set(via_equations) | set(via_brute)))
        if via_equations:
            kind = FallbackKind.DECOMPOSED_BY_EQUATIONS
        elif via_brute:
            kind = FallbackKind.DECOMPOSED_BY_BRUTE_FORCE
        else:
            kind = FallbackKind.COUNTEREXAMPLE_CANDIDATE
        return FallbackOutcome(n, kind, triples)

    triple = closed_form_decompose(n)
    if triple is not None:
        return FallbackOutcome(n, FallbackKind.DECOMPOSED_BY_EQUATIONS, (triple,))
    if is_perfect_square(n)[0]:
        return prove_square(n, exhaustive_limit)
    found = search_equation_decomposition(n)
    if found is not None:
        return FallbackOutcome(n, FallbackKind.DECOMPOSED_BY_EQUATIONS, (found[1],))
    d = smallest_prime_factor(n, SCALING_FACTOR_BOUND)
    if d is not None:
        if d == 2 and n % 4 == 0:
            inner = UnitFractionTriple(4, 2, 3, 6)
            d = 4
        else:
            inner = _quick_triple(d, exhaustive_limit)
        if inner is not None:
            return FallbackOutcome(
                n, FallbackKind.DECOMPOSED_BY_SCALING, (scale_decomposition(inner, n // d),)
            )
    return FallbackOutcome(n, FallbackKind.COUNTEREXAMPLE_CANDIDATE)


def _square_mask(n: np.ndarray) -> np.ndarray:
    root = np.sqrt(n.astype(np.float64)).astype(np.int64)
    return (root * root == n) | ((root + 1) * (root + 1) == n) | ((root - 1) * (root - 1) == n)


@dataclass
class ChunkResult:
    index: int
    checked: int
    squares: int
    counts: np.ndarray
    failures: list[FallbackOutcome]
    unproven: list[int]


class _SievePlan:
    """Read-only tables shared by every worker."""

    def __init__(self, cfg: SieveConfig):
        self.cfg = cfg
        w = cfg.wheel
        self.G = w.G
        self.residues = np.asarray(w.residues, dtype=np.int64)
        self.mods = cfg.mods
        self.tables = [cfg.filters[m].table for m in self.mods]
        # a policy modulus divides G and already removed its residues from R
        policy = set(w.policy)
        self.active = [i for i, m in enumerate(self.mods) if m not in policy]
        self.pre = {}
        for i in self.active[:_PRECOMPUTED_FILTERS]:
            m = self.mods[i]
            self.pre[i] = (self.residues % m, self.G % m)
        Log.d(
            f"sieve plan: {len(self.residues)} residues, {len(self.active)} active filter(s), "
            f"{len(self.pre)} with precomputed residues"
        )

    def run_chunk(self, index: int) -> ChunkResult:
        cfg = self.cfg
        k0 = index * cfg.chunk_size
        k1 = min(k0 + cfg.chunk_size, cfg.limit.k_count)
        counts = np.zeros(len(self.mods), dtype=np.int64)
        checked = squares = 0
        failures: list[FallbackOutcome] = []
        unproven: list[int] = []
        for k in range(k0, k1):
            block = self.residues + np.int64(k) * np.int64(self.G)
            idx = np.arange(block.size)
            if k == 0 or (block.size and block[-1] > cfg.limit.max_n):
                idx = idx[(block >= _FIRST_CANDIDATE) & (block <= cfg.limit.max_n)]
            checked += idx.size
            sq = _square_mask(block[idx])
            if sq.any():
                square_values = block[idx[sq]]
                squares += square_values.size
                if cfg.prove_squares:
                    for v in square_values.tolist():
                        if not prove_square(v, cfg.exhaustive_limit).decomposed:
                            unproven.append(v)
                idx = idx[~sq]
            for i in self.active:
                if idx.size == 0:
                    break
                m = self.mods[i]
                pre = self.pre.get(i)
                if pre is not None:
                    rem = pre[0][idx] + (k * pre[1]) % m
                    rem[rem >= m] -= m
                else:
                    rem = block[idx] % m
                hit = self.tables[i][rem]
                c = int(np.count_nonzero(hit))
                if c:
                    counts[i] += c
                    idx = idx[~hit]
            for v in block[idx].tolist():
                failures.append(fallback_check(v, cfg.exhaustive_limit))
        return ChunkResult(index, checked, squares, counts, failures, unproven)


@dataclass
class _Totals:
    checked: int = 0
    squares: int = 0
    counts: np.ndarray | None = None
    failures: list[FallbackOutcome] = field(default_factory=list)
    unproven: list[int] = field(default_factory=list)

    def add(self, res: ChunkResult) -> None:
        self.checked += res.checked
        self.squares += res.squares
        self.counts += res.counts
        self.failures.extend(res.failures)
        self.unproven.extend(res.unproven)

    def state(self, cfg: SieveConfig, last_chunk: int) -> CheckpointState:
        return CheckpointState(
            cfg.config_hash(),
            last_chunk,
            self.checked,
            self.squares,
            tuple(int(c) for c in self.counts),
            tuple(f.n for f in self.failures),
            tuple(self.unproven),
        )

    def report(self, cfg: SieveConfig, wall_time: float) -> RunReport:
        return RunReport(
            mods=cfg.mods,
            per_mod_counts=tuple(int(c) for c in self.counts),
            checked=self.checked,
            squares=self.squares,
            failures=tuple(sorted(self.failures, key=lambda f: f.n)),
            unproven_squares=tuple(sorted(self.unproven)),
            k_count=cfg.limit.k_count,
            max_n=cfg.limit.max_n,
            G=cfg.wheel.G,
            residue_count=len(cfg.wheel),
            wall_time=wall_time,
        )


def _resume(cfg: SieveConfig, totals: _Totals) -> int:
    path = cfg.checkpoint_path
    if path is None or not Path(path).exists():
        return 0
    state = load_checkpoint(path, cfg.config_hash(), len(cfg.mods))
    totals.checked = state.checked
    totals.squares = state.squares
    totals.counts = np.array(state.per_mod_counts, dtype=np.int64)
    totals.failures = [fallback_check(n, cfg.exhaustive_limit) for n in state.failures]
    totals.unproven = list(state.unproven_squares)
    Log.i(f"Resuming from {path} after chunk {state.last_chunk} ({state.checked} checked)")
    return state.last_chunk + 1


def verify_range(cfg: SieveConfig, ctx: RunContext | None = None) -> RunReport:
    ctx = ctx or RunContext(progress_interval=cfg.progress_interval)
    started = time.monotonic()
    plan = _SievePlan(cfg)
    totals = _Totals(counts=np.zeros(len(cfg.mods), dtype=np.int64))
    next_merge = start = _resume(cfg, totals)
    total_chunks = cfg.chunk_count

    inflight: dict[int, Future] = {}
    next_submit = start
    window = cfg.threads * 2
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        try:
            while next_merge < total_chunks:
                while (
                    next_submit < total_chunks
                    and len(inflight) < window
                    and not ctx.stopped
                ):
                    inflight[next_submit] = pool.submit(plan.run_chunk, next_submit)
                    next_submit += 1
                future = inflight.pop(next_merge, None)
                if future is None:
                    break
                totals.add(future.result())
                Log.d(f"merged chunk {next_merge}: {totals.checked} checked, {len(totals.failures)} failure(s)")
                if cfg.checkpoint_path is not None:
                    save_checkpoint(cfg.checkpoint_path, totals.state(cfg, next_merge))
                next_merge += 1
                done_k = min(next_merge * cfg.chunk_size, cfg.limit.k_count)
                ctx.progress(done_k, cfg.limit.k_count, totals.checked)
        finally:
            for future in inflight.values():
                future.cancel()

    report = totals.report(cfg, time.monotonic() - started)
    if next_merge < total_chunks:
        raise SieveInterrupted(report, next_merge)
    return report


def order_mods(
    candidate_moduli,
    sample: range,
    wheel: Wheel,
    filters: Mapping[int, Filter] | FilterProvider,
    pinned=(),
) -> list[int]:
    """Greedy MOD ordering over the sample turns `sample`.

    `pinned` moduli are emitted first in the given order; the rest are
    picked by most newly trapped sample candidates (ties to the smaller
    modulus) and dropped once they trap nothing.
    """
    if len(sample) == 0:
        raise ValueError("order_mods needs a non-empty sample")
    lookup = filters.__getitem__ if isinstance(filters, Mapping) else filters
    alive = np.concatenate([wheel.block(k) for k in sample])
    alive = alive[~_square_mask(alive)]
    ordered = []
    for m in pinned:
        ordered.append(m)
        alive = alive[~lookup(m).table[alive % m]]
    remaining = sorted(set(candidate_moduli) - set(pinned))
    while remaining and alive.size:
        best, best_hit, best_count = None, None, 0
        for m in remaining:
            hit = lookup(m).table[alive % m]
            count = int(np.count_nonzero(hit))
            if count > best_count:
                best, best_hit, best_count = m, hit, count
        if best is None:
            break
        ordered.append(best)
        remaining.remove(best)
        alive = alive[~best_hit]
    return ordered
