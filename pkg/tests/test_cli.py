"""End-to-end runs of the command-line entry point."""

import pytest

from esverify import cli
from esverify.report import parse_key_values


def _config(tmp_path, mods="[11, 13, 17, 19, 23, 29, 31, 37, 55, 65]"):
    path = tmp_path / "run.yml"
    path.write_text(
        "wheel:\n"
        "  primes: [5, 7]\n"
        "  policy: custom\n"
        "  custom: [5, 7, 35]\n"
        "sieve:\n"
        "  chunk_size: 2\n"
        "  threads: 1\n"
        "  exhaustive_limit: 3000\n"
        f"mods: {mods}\n",
        encoding="utf-8",
    )
    return path


def test_decompose_equations(capsys):
    assert cli.main(["decompose", "97", "--method", "equations", "--all"]) == 0
    out = capsys.readouterr().out
    assert "4/97 = 1/26 + 1/388 + 1/5044  [(6a) B=1 C=2 D=2]" in out
    assert "4/97 = 1/34 + 1/85 + 1/16490" in out


def test_decompose_brute_and_closed(capsys):
    assert cli.main(["decompose", "25"]) == 0
    assert capsys.readouterr().out.strip() == "4/25 = 1/7 + 1/60 + 1/2100"
    assert cli.main(["decompose", "13", "--method", "closed"]) == 0
    assert "4/13 = 1/4 + 1/26 + 1/52" in capsys.readouterr().out
    assert cli.main(["decompose", "25", "--method", "closed"]) == 0
    assert "No closed form" in capsys.readouterr().out


def test_filter_shortened(tmp_path, capsys):
    assert cli.main(["filter", "55", "--shortened"]) == 0
    assert capsys.readouterr().out.strip() == "55: 24,39"
    assert cli.main(["filter", "55", "--shortened", "--out", str(tmp_path / "s.txt")]) == 0
    assert (tmp_path / "s.txt.star").read_text(encoding="utf-8") == "55: 24,39\n"
    assert not (tmp_path / "s.txt").exists()


def test_filter_writes_and_reuses_cache(tmp_path, capsys):
    cache = tmp_path / "filters.txt"
    out = tmp_path / "s.txt"
    assert cli.main(["filter", "5", "7", "--filters-file", str(cache), "--out", str(out)]) == 0
    assert out.read_text(encoding="utf-8") == "5: 0,2,3\n7: 0,3,5,6\n"
    assert "5: 0,2,3" in cache.read_text(encoding="utf-8")
    capsys.readouterr()
    assert cli.main(["filter", "5", "--filters-file", str(cache)]) == 0
    assert capsys.readouterr().out.strip() == "5: 0,2,3"


def test_wheel_command(tmp_path, capsys):
    out = tmp_path / "r2.wheel"
    rc = cli.main(["wheel", "--primes", "5,7", "--policy", "custom:5,7,35", "--out", str(out)])
    assert rc == 0
    text = capsys.readouterr().out
    assert "#R=6 mean_gap=140" in text
    assert "matches the published size 6" in text
    assert out.read_text(encoding="utf-8").splitlines()[1:] == ["1", "121", "169", "289", "361", "529"]


def test_verify_small_run(tmp_path, capsys):
    report_path = tmp_path / "report.txt"
    cache = tmp_path / "filters.txt"
    rc = cli.main(
        [
            "verify",
            "-c", str(_config(tmp_path)),
            "--limit", "1e5",
            "--filters-file", str(cache),
            "--report", str(report_path),
        ]
    )
    assert rc == 0
    assert cache.exists()
    values = parse_key_values(report_path.read_text(encoding="utf-8"))
    assert values["accounting"] == "ok"
    assert values["counterexamples"] == "0"
    assert values["max_n"] == "100000"
    assert values["G"] == "840" and values["residues"] == "6"
    assert "[summary]" in capsys.readouterr().out


@pytest.mark.slow
def test_verify_desk_scale_with_shipped_config(tmp_path):
    report_path = tmp_path / "report.txt"
    rc = cli.main(
        [
            "verify",
            "--limit", "1e12",
            "--filters-file", str(tmp_path / "filters.txt"),
            "--report", str(report_path),
        ]
    )
    assert rc == 0
    values = parse_key_values(report_path.read_text(encoding="utf-8"))
    assert values["max_n"] == str(10**12)
    assert values["accounting"] == "ok"
    assert values["counterexamples"] == "0"


def test_verify_with_checkpoint_and_saved_wheel(tmp_path):
    cfg = _config(tmp_path)
    wheel = tmp_path / "r2.wheel"
    assert cli.main(["wheel", "-c", str(cfg), "--out", str(wheel)]) == 0
    args = [
        "verify", "-c", str(cfg), "--wheel-file", str(wheel), "--limit", "K=20",
        "--filters-file", str(tmp_path / "f.txt"), "--checkpoint", str(tmp_path / "state.bin"),
        "--threads", "2",
    ]
    assert cli.main(args) == 0
    assert (tmp_path / "state.bin").exists()
    assert cli.main(args) == 0


def test_verify_rejects_foreign_checkpoint(tmp_path, capsys):
    state = tmp_path / "state.bin"
    base = ["verify", "--limit", "K=4", "--filters-file", str(tmp_path / "f.txt"), "--checkpoint", str(state)]
    assert cli.main(base + ["-c", str(_config(tmp_path))]) == 0
    other = _config(tmp_path, mods="[13, 11]")
    assert cli.main(base + ["-c", str(other)]) == 1
    assert "different configuration" in capsys.readouterr().out


def test_order_mods_command(tmp_path, capsys):
    candidates = tmp_path / "candidates.txt"
    candidates.write_text("11, 13, 17, 19\n", encoding="utf-8")
    out = tmp_path / "ordered.txt"
    rc = cli.main(
        [
            "order-mods", "--primes", "5,7", "--policy", "custom:5,7,35",
            "--candidates-file", str(candidates), "--sample-k", "4", "--out", str(out),
        ]
    )
    assert rc == 0
    ordered = [int(x) for x in out.read_text(encoding="utf-8").split(",")]
    assert ordered and set(ordered) <= {11, 13, 17, 19}


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["decompose", "2"],
        ["decompose", "10", "--method", "equations"],
        ["filter", "4"],
        ["verify", "--limit", "100", "--threads", "0"],
        ["wheel", "--wheel-file", "w.txt", "--primes", "5"],
    ],
)
def test_usage_errors_exit_1(argv):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 1


def test_missing_config_is_reported(tmp_path, capsys):
    rc = cli.main(["verify", "-c", str(tmp_path / "nope.yml"), "--limit", "100"])
    assert rc == 1
    assert "nope.yml" in capsys.readouterr().out


def test_bad_limit_is_reported(tmp_path):
    rc = cli.main(["verify", "-c", str(_config(tmp_path)), "--limit", "lots",
                   "--filters-file", str(tmp_path / "f.txt")])
    assert rc == 1
