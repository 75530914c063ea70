"""Command-line interface: argument parsing and thin adapters over the
library for decompositions, filters, wheels, MOD ordering and runs."""

import argparse
import signal
import sys
from pathlib import Path

from esverify.checkpoint import CheckpointCorrupt, ConfigMismatch
from esverify.config import ConfigError, RunSettings, load_moduli
from esverify.constants import (
    EXIT_FAILURE,
    EXIT_INTERRUPTED,
    EXIT_OK,
    EXIT_USAGE,
    PUBLISHED_WHEEL_SIZES,
)
from esverify.decomp import brute_force_decompose, closed_form_decompose
from esverify.equations import decompose_all_via_equations
from esverify.filters import FilterBank, FilterFormatError, format_filter_line, save_filters
from esverify.logging import Log
from esverify.paths import DEFAULT_CONFIG_PATH, DEFAULT_FILTERS_PATH, ensure_cache_dir
from esverify.report import format_report, write_report
from esverify.runtime import RunContext, install_interrupt_handler, start_watchdog
from esverify.sieve import (
    SieveConfig,
    SieveConfigError,
    SieveInterrupted,
    default_threads,
    order_mods,
    parse_limit,
    verify_range,
)
from esverify.wheel import (
    PolicyModulusInvalid,
    Wheel,
    WheelFormatError,
    WheelPolicy,
    build_wheel_from_policy,
    load_wheel,
    mean_gap,
    save_wheel,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_csv(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _k_interval(text: str) -> range:
    start, sep, stop = text.partition(":")
    try:
        if not sep:
            return range(0, int(start))
        return range(int(start), int(stop))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected <count> or <start>:<stop>, got {text!r}") from None


def _add_filters_file(parser: argparse.ArgumentParser, default: Path | None) -> None:
    parser.add_argument(
        "--filters-file",
        type=Path,
        default=default,
        help="Filter cache to read and extend" + (f" (default: {default})" if default else ""),
    )


def _add_wheel_source(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--wheel-file", type=Path, help="Load a saved wheel instead of building one")
    parser.add_argument("--primes", type=_int_csv, help="Wheel primes, e.g. 5,7,11")
    parser.add_argument("--policy", help="primes | all-odd-divisors[:max] | custom:q1,q2,...")
    parser.add_argument("-c", "--config", type=Path, help=f"Run settings YAML (default: {DEFAULT_CONFIG_PATH})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="esverify", description="Erdős–Straus verification engine")
    parser.add_argument("--debug", action="store_true", help="Enable debugging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="Decompose 4/n into three unit fractions")
    p.add_argument("n", type=int)
    p.add_argument("--all", action="store_true", help="List every decomposition")
    p.add_argument("--method", choices=("closed", "equations", "brute"), default="brute")

    p = sub.add_parser("filter", help="Compute filters S_m (or S*_m)")
    p.add_argument("m", type=int, nargs="+")
    p.add_argument("--shortened", action="store_true", help="Print S*_m instead of S_m")
    p.add_argument("--out", type=Path, help="Write the filters to this file")
    _add_filters_file(p, None)

    p = sub.add_parser("wheel", help="Build a CRT wheel and report its size")
    _add_wheel_source(p)
    p.add_argument("--max-modulus", type=int, help="Cap for all-odd-divisors")
    p.add_argument("--out", type=Path, help="Write the wheel to this file")
    _add_filters_file(p, None)

    p = sub.add_parser("order-mods", help="Greedy ordering of filter moduli")
    _add_wheel_source(p)
    p.add_argument("--candidates-file", type=Path, help="Moduli to rank (default: odd 3..4999)")
    p.add_argument("--sample-k", type=_k_interval, default=range(0, 1), help="Turns sampled: N or A:B")
    p.add_argument("--pin", type=_int_csv, default=(), help="Moduli kept first, in order")
    p.add_argument("--out", type=Path, help="Write the ordered list here")
    _add_filters_file(p, None)

    p = sub.add_parser("verify", help="Sieve every n = 1 (mod 24) up to the limit")
    _add_wheel_source(p)
    p.add_argument("--limit", required=True, help="N, 1e12 or K=<turns>")
    p.add_argument("--mods-file", type=Path, help="MOD list (default: from the config)")
    _add_filters_file(p, DEFAULT_FILTERS_PATH)
    p.add_argument("--threads", type=int, help="Worker threads (default: ESVERIFY_THREADS or CPU count)")
    p.add_argument("--chunk-size", type=int, help="Turns per worker task")
    p.add_argument("--checkpoint", type=Path, help="Checkpoint file to resume from and update")
    p.add_argument("--report", type=Path, help="Write the full report to this file")
    p.add_argument("--no-square-proofs", action="store_true", help="Count squares without proving them")
    p.add_argument("--timeout", type=float, default=0, help="Hard wall-clock limit in seconds")
    return parser


def _validate_args(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.command == "decompose":
        if args.n < 3:
            parser.error("n must be >= 3")
        if args.method == "equations" and args.n % 2 == 0:
            parser.error("--method=equations needs an odd n")
    elif args.command == "filter":
        if any(m < 3 or m % 2 == 0 for m in args.m):
            parser.error("filter moduli must be odd and >= 3")
    elif args.command in ("wheel", "order-mods", "verify"):
        if args.wheel_file and (args.primes is not None or args.policy):
            parser.error("Use either --wheel-file or --primes/--policy, not both.")
        if args.command == "order-mods" and len(args.sample_k) == 0:
            parser.error("--sample-k must cover at least one turn")
        if args.command == "verify":
            if args.threads is not None and args.threads < 1:
                parser.error("--threads must be >= 1")
            if args.chunk_size is not None and args.chunk_size < 1:
                parser.error("--chunk-size must be >= 1")
            if args.timeout < 0:
                parser.error("--timeout must be >= 0")


def _open_bank(path: Path | None) -> FilterBank:
    if path is not None and path.is_file():
        return FilterBank.load(path)
    return FilterBank()


def _store_bank(bank: FilterBank, path: Path | None) -> None:
    if path is None:
        return
    if path == DEFAULT_FILTERS_PATH:
        ensure_cache_dir()
    bank.save(path)


def _settings(args: argparse.Namespace) -> RunSettings:
    return RunSettings.from_yaml(args.config or DEFAULT_CONFIG_PATH)


def _resolve_wheel(args: argparse.Namespace, settings: RunSettings, bank: FilterBank) -> Wheel:
    if args.wheel_file:
        return load_wheel(args.wheel_file)
    primes = args.primes if args.primes is not None else settings.primes
    policy = settings.policy
    if args.policy:
        cap = getattr(args, "max_modulus", None) or policy.max_modulus
        policy = WheelPolicy.parse(args.policy, cap)
    elif getattr(args, "max_modulus", None):
        policy = WheelPolicy(policy.kind, policy.moduli, args.max_modulus)
    return build_wheel_from_policy(primes, policy, bank)


def _cmd_decompose(args: argparse.Namespace) -> int:
    n = args.n
    if args.method == "closed":
        triple = closed_form_decompose(n)
        if triple is None:
            Log.w(f"No closed form applies to n={n} (n % 3 != 2, n % 4 != 3, n % 8 != 5)")
            return EXIT_OK
        Log.raw(str(triple))
        return EXIT_OK
    if args.method == "equations":
        found = decompose_all_via_equations(n)
        if not found:
            Log.w(f"No equation decomposition for n={n}")
            return EXIT_OK
        for cert, _, triple in found if args.all else found[:1]:
            Log.raw(f"{triple}  [{cert}]")
        return EXIT_OK
    triples = brute_force_decompose(n, want_all=args.all)
    if not triples:
        Log.e(f"4/{n} has no decomposition into three distinct unit fractions")
        return EXIT_FAILURE
    for triple in triples:
        Log.raw(str(triple))
    return EXIT_OK


def _cmd_filter(args: argparse.Namespace) -> int:
    bank = _open_bank(args.filters_file)
    results = [bank.shortened(m) if args.shortened else bank.get(m) for m in args.m]
    for f in results:
        Log.raw(format_filter_line(f.m, f.residues))
    if args.out:
        written = save_filters(args.out, results)
        Log.s(f"Wrote {len(results)} filter(s) to {written}")
    _store_bank(bank, args.filters_file)
    return EXIT_OK


def _cmd_wheel(args: argparse.Namespace) -> int:
    bank = _open_bank(args.filters_file)
    wheel = _resolve_wheel(args, _settings(args), bank)
    Log.raw(f"G={wheel.G} primes={','.join(map(str, wheel.primes))} policy={wheel.policy_label}")
    Log.raw(f"#R={len(wheel)} mean_gap={mean_gap(wheel) if len(wheel) else 'n/a'}")
    published = PUBLISHED_WHEEL_SIZES.get(wheel.primes)
    if published is not None and published != len(wheel):
        Log.w(f"#R differs from the published size {published} for these primes")
    elif published is not None:
        Log.s(f"#R matches the published size {published}")
    if args.out:
        save_wheel(args.out, wheel)
        Log.s(f"Wrote wheel to {args.out}")
    _store_bank(bank, args.filters_file)
    return EXIT_OK


def _cmd_order_mods(args: argparse.Namespace) -> int:
    bank = _open_bank(args.filters_file)
    wheel = _resolve_wheel(args, _settings(args), bank)
    if args.candidates_file:
        candidates = load_moduli(args.candidates_file)
    else:
        candidates = tuple(range(3, 5000, 2))
    ordered = order_mods(candidates, args.sample_k, wheel, bank, pinned=args.pin)
    text = ", ".join(str(m) for m in ordered)
    Log.raw(text)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text + "\n", encoding="utf-8")
        Log.s(f"Wrote {len(ordered)} moduli to {args.out}")
    _store_bank(bank, args.filters_file)
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    settings = _settings(args)
    mods = load_moduli(args.mods_file) if args.mods_file else settings.mods
    bank = _open_bank(args.filters_file)
    wheel = _resolve_wheel(args, settings, bank)
    try:
        limit = parse_limit(args.limit, wheel.G)
    except ValueError as exc:
        Log.e(str(exc))
        return EXIT_USAGE
    filters = bank.ensure(mods)
    _store_bank(bank, args.filters_file)

    cfg = SieveConfig(
        wheel=wheel,
        mods=mods,
        filters=filters,
        limit=limit,
        threads=args.threads or settings.threads or default_threads(),
        chunk_size=args.chunk_size or settings.chunk_size,
        checkpoint_path=args.checkpoint,
        prove_squares=settings.prove_squares and not args.no_square_proofs,
        exhaustive_limit=settings.exhaustive_limit,
        progress_interval=settings.progress_interval,
    )
    Log.i(
        f"Verifying up to n={limit.max_n} (K={limit.k_count}, G={wheel.G}, #R={len(wheel)}, "
        f"{len(mods)} filters, {cfg.threads} thread(s))"
    )

    ctx = RunContext(progress_interval=cfg.progress_interval)
    previous_sigint = install_interrupt_handler(ctx)
    watchdog = start_watchdog(ctx, args.timeout)
    try:
        report = verify_range(cfg, ctx)
    except SieveInterrupted as exc:
        Log.w(f"Interrupted after {exc.completed_chunks}/{cfg.chunk_count} chunk(s).")
        if args.checkpoint:
            Log.i(f"Resume with the same flags and --checkpoint {args.checkpoint}")
        return EXIT_INTERRUPTED
    except (CheckpointCorrupt, ConfigMismatch) as exc:
        Log.e(str(exc))
        return EXIT_USAGE
    finally:
        signal.signal(signal.SIGINT, previous_sigint)
        if watchdog is not None:
            watchdog.cancel()

    Log.raw(format_report(report))
    if args.report:
        write_report(args.report, report)
        Log.s(f"Wrote report to {args.report}")
    if not report.ok:
        Log.e(
            f"{len(report.counterexamples)} counterexample candidate(s), "
            f"{len(report.unproven_squares)} unproven square(s)"
        )
        return EXIT_FAILURE
    Log.s(f"No counterexample up to {report.max_n} ({report.wall_time:.1f}s)")
    return EXIT_OK


_COMMANDS = {
    "decompose": _cmd_decompose,
    "filter": _cmd_filter,
    "wheel": _cmd_wheel,
    "order-mods": _cmd_order_mods,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate_args(parser, args)
    Log.set_debug(args.debug)

    try:
        return _COMMANDS[args.command](args)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        Log.e(f"{exc.strerror or exc}: {exc.filename}" if exc.filename else str(exc))
    except (ConfigError, FilterFormatError, WheelFormatError, PolicyModulusInvalid, SieveConfigError) as exc:
        Log.e(str(exc))
    except KeyboardInterrupt:
        Log.w("Interrupted.")
        return EXIT_INTERRUPTED
    return EXIT_USAGE
