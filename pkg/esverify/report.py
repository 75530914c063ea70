"""Plain-text run reports: a human table in MOD order followed by a
``key=value`` block for machines."""

from pathlib import Path

from esverify.models import RunReport


def accounting_line(report: RunReport) -> str:
    status = "ok" if report.accounting_holds else "MISMATCH"
    return (
        f"certified {report.certified} + squares {report.squares} + "
        f"fallback {len(report.failures)} = {report.certified + report.squares + len(report.failures)}"
        f" vs checked {report.checked} [{status}]"
    )


def key_values(report: RunReport) -> dict[str, str]:
    return {
        "checked": str(report.checked),
        "squares": str(report.squares),
        "certified": str(report.certified),
        "failures": str(len(report.failures)),
        "counterexamples": str(len(report.counterexamples)),
        "unproven_squares": str(len(report.unproven_squares)),
        "k_count": str(report.k_count),
        "max_n": str(report.max_n),
        "G": str(report.G),
        "residues": str(report.residue_count),
        "accounting": "ok" if report.accounting_holds else "mismatch",
        "wall_time": f"{report.wall_time:.3f}",
        "mods": ",".join(str(m) for m in report.mods),
        "per_mod_counts": ",".join(str(c) for c in report.per_mod_counts),
        "failure_values": ",".join(str(f.n) for f in report.failures),
    }


def format_report(report: RunReport) -> str:
    lines = [
        f"Checked n = 1 (mod 24) up to {report.max_n}: K = {report.k_count} turns "
        f"of G = {report.G} with {report.residue_count} residues",
        "",
        f"{'modulus':>8}  {'certified':>16}",
    ]
    for m, count in zip(report.mods, report.per_mod_counts):
        lines.append(f"{m:>8}  {count:>16}")
    lines += [
        "",
        f"checked integers : {report.checked}",
        f"squares          : {report.squares}",
        f"fallback         : {len(report.failures)}",
        accounting_line(report),
    ]
    for outcome in report.failures:
        detail = str(outcome.triples[0]) if outcome.triples else "no decomposition found"
        lines.append(f"  fallback {outcome.n}: {outcome.kind.value} ({detail})")
    for n in report.unproven_squares:
        lines.append(f"  unproven square {n}")
    lines += ["", "[summary]"]
    lines += [f"{key}={value}" for key, value in key_values(report).items()]
    return "\n".join(lines) + "\n"


def write_report(path: Path, report: RunReport) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_report(report), encoding="utf-8")


def parse_key_values(text: str) -> dict[str, str]:
    """Read back the ``[summary]`` block of a written report."""
    _, _, block = text.partition("[summary]")
    values = {}
    for line in block.splitlines():
        key, sep, value = line.partition("=")
        if sep:
            values[key.strip()] = value.strip()
    return values
