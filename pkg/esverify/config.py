import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from esverify.constants import DEFAULT_EXHAUSTIVE_LIMIT, DEFAULT_POLICY_MAX_MODULUS
from esverify.logging import Log
from esverify.wheel import PolicyModulusInvalid, WheelPolicy


class ConfigError(ValueError):
    """Invalid run settings file."""


_INT_RE = re.compile(r"-?\d+")


@dataclass
class RunSettings:
    primes: tuple[int, ...]
    mods: tuple[int, ...]
    policy: WheelPolicy = field(default_factory=WheelPolicy)
    chunk_size: int = 4
    threads: int = 0
    exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT
    prove_squares: bool = True
    progress_interval: float = 10.0

    @classmethod
    def _from_dict(cls, data: dict[str, Any]) -> "RunSettings":
        wheel = data.get("wheel") or {}
        sieve = data.get("sieve") or {}
        if not isinstance(wheel, dict) or not isinstance(sieve, dict):
            raise ConfigError("'wheel' and 'sieve' must be mappings.")

        primes = _int_list(wheel.get("primes", []), "wheel.primes")
        mods = _int_list(data.get("mods"), "mods")
        if not mods:
            raise ConfigError("'mods' must be a non-empty list of odd moduli.")
        if any(m < 3 or m % 2 == 0 for m in mods):
            raise ConfigError("'mods' entries must be odd and >= 3.")

        kind = str(wheel.get("policy", "primes"))
        max_modulus = _int(wheel.get("max_modulus", DEFAULT_POLICY_MAX_MODULUS), "wheel.max_modulus")
        custom = _int_list(wheel.get("custom", []), "wheel.custom")
        try:
            if kind == "custom":
                policy = WheelPolicy("custom", custom, max_modulus)
            else:
                policy = WheelPolicy.parse(kind, max_modulus)
        except PolicyModulusInvalid as exc:
            raise ConfigError(f"wheel.policy: {exc}") from None

        known = {f.name for f in fields(cls)}
        extras = {}
        for key in ("chunk_size", "threads", "exhaustive_limit"):
            if key in sieve:
                extras[key] = _int(sieve[key], f"sieve.{key}")
        if "prove_squares" in sieve:
            extras["prove_squares"] = bool(sieve["prove_squares"])
        if "progress_interval" in sieve:
            try:
                extras["progress_interval"] = float(sieve["progress_interval"])
            except (TypeError, ValueError):
                raise ConfigError("sieve.progress_interval must be a number.") from None
        unknown = set(sieve) - known
        if unknown:
            Log.w(f"Ignoring unknown sieve setting(s): {', '.join(sorted(unknown))}")
        if extras.get("chunk_size", 1) < 1:
            raise ConfigError("sieve.chunk_size must be >= 1.")
        return cls(primes=primes, mods=mods, policy=policy, **extras)

    @classmethod
    def from_yaml(cls, file: Path) -> "RunSettings":
        file = Path(file)
        if not file.is_file():
            raise FileNotFoundError(f"Config file not found: {file}")

        with open(file, encoding="utf-8") as handle:
            data = yaml.safe_load(handle)

        if not isinstance(data, dict):
            raise ConfigError(f"{file}: content is not a valid dictionary.")
        try:
            return cls._from_dict(data)
        except ConfigError as exc:
            raise ConfigError(f"{file}: {exc}") from None


def _int(value: Any, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{key}' must be an integer, got {value!r}.")
    return value


def _int_list(value: Any, key: str) -> tuple[int, ...]:
    if value is None:
        return ()
    if not isinstance(value, list):
        raise ConfigError(f"'{key}' must be a list of integers.")
    return tuple(_int(v, key) for v in value)


def load_moduli(path: Path) -> tuple[int, ...]:
    """Integers from a text file, separated by commas or whitespace; `#`
    starts a comment."""
    values = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            values += [int(x) for x in _INT_RE.findall(line.split("#", 1)[0])]
    return tuple(values)
