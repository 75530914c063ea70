"""Binary checkpoint of a sieve run.

Layout (little-endian):
    b"ESSV1" | sha256 config hash (32 bytes) | int64 last completed chunk |
    uint32 counter count | int64 counters | uint32 CRC32 of everything before

Counters are: checked, squares, one per MOD entry, then the failure count
followed by the failing n values, then the unproven-square count and values.
"""

import os
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

from esverify.constants import CHECKPOINT_MAGIC
from esverify.logging import Log

_HEADER = struct.Struct(f"<{len(CHECKPOINT_MAGIC)}s32sqI")
_CRC = struct.Struct("<I")


class CheckpointCorrupt(RuntimeError):
    """Bad magic, truncated body or CRC mismatch."""


class ConfigMismatch(RuntimeError):
    """The checkpoint belongs to a different run configuration."""


@dataclass(frozen=True)
class CheckpointState:
    config_hash: bytes
    last_chunk: int
    checked: int
    squares: int
    per_mod_counts: tuple[int, ...]
    failures: tuple[int, ...]
    unproven_squares: tuple[int, ...]

    def counters(self) -> list[int]:
        return [
            self.checked,
            self.squares,
            *self.per_mod_counts,
            len(self.failures),
            *self.failures,
            len(self.unproven_squares),
            *self.unproven_squares,
        ]


def encode_checkpoint(state: CheckpointState) -> bytes:
    counters = state.counters()
    body = _HEADER.pack(CHECKPOINT_MAGIC, state.config_hash, state.last_chunk, len(counters))
    body += struct.pack(f"<{len(counters)}q", *counters)
    return body + _CRC.pack(zlib.crc32(body))


def decode_checkpoint(
    data: bytes, mod_count: int, expected_hash: bytes | None = None
) -> CheckpointState:
    if len(data) < _HEADER.size + _CRC.size:
        raise CheckpointCorrupt(f"checkpoint truncated ({len(data)} bytes)")
    magic, config_hash, last_chunk, count = _HEADER.unpack_from(data, 0)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointCorrupt(f"bad checkpoint magic {magic!r}")
    end = _HEADER.size + 8 * count
    if len(data) != end + _CRC.size:
        raise CheckpointCorrupt(f"checkpoint length {len(data)} != {end + _CRC.size}")
    (crc,) = _CRC.unpack_from(data, end)
    if crc != zlib.crc32(data[:end]):
        raise CheckpointCorrupt("checkpoint CRC mismatch")
    if expected_hash is not None and config_hash != expected_hash:
        raise ConfigMismatch("checkpoint was written for a different configuration")
    counters = list(struct.unpack_from(f"<{count}q", data, _HEADER.size))
    try:
        checked, squares = counters[0], counters[1]
        per_mod = tuple(counters[2 : 2 + mod_count])
        pos = 2 + mod_count
        n_fail = counters[pos]
        failures = tuple(counters[pos + 1 : pos + 1 + n_fail])
        pos += 1 + n_fail
        n_unproven = counters[pos]
        unproven = tuple(counters[pos + 1 : pos + 1 + n_unproven])
        pos += 1 + n_unproven
    except IndexError:
        raise CheckpointCorrupt("checkpoint counter vector too short") from None
    if pos != count or len(per_mod) != mod_count or len(failures) != n_fail or len(unproven) != n_unproven:
        raise CheckpointCorrupt("checkpoint counter vector has the wrong shape")
    return CheckpointState(config_hash, last_chunk, checked, squares, per_mod, failures, unproven)


def save_checkpoint(path: Path, state: CheckpointState) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(encode_checkpoint(state))
    os.replace(tmp, path)
    Log.d(f"checkpoint after chunk {state.last_chunk} written to {path}")


def load_checkpoint(path: Path, expected_hash: bytes, mod_count: int) -> CheckpointState:
    try:
        return decode_checkpoint(Path(path).read_bytes(), mod_count, expected_hash)
    except ConfigMismatch:
        raise ConfigMismatch(f"{path} was written for a different configuration") from None
