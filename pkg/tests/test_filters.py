"""Filter tables S_m and S*_m, membership and the line-oriented file format."""

import math

import pytest

from esverify.arith import ResidueClass, crt_combine, divisors
from esverify.decomp import brute_force_decompose
from esverify.filters import (
    EvenModulus,
    Filter,
    FilterBank,
    FilterFormatError,
    ShortenedFilter,
    compute_filter,
    filter_contains,
    load_filters,
    parse_filter_line,
    save_filters,
)

PUBLISHED = {
    5: (0, 2, 3),
    7: (0, 3, 5, 6),
    11: (0, 7, 8, 10),
    13: (0, 5, 6, 8, 11),
    17: (0, 10, 11, 12, 14),
    19: (0, 8, 12, 14, 15, 18),
    23: (0, 7, 10, 11, 15, 17, 19, 20, 21, 22),
    29: (0, 14, 18, 19, 21, 26, 27),
    31: (0, 15, 22, 23, 24, 27, 29, 30),
    37: (0, 5, 15, 18, 22, 23, 29, 32, 35),
    15: (7, 10, 13),
    35: tuple(r for r in range(35) if r not in (1, 4, 9, 11, 16, 29)),
    55: (
        0, 2, 3, 5, 7, 8, 10, 11, 12, 13, 15, 17, 18, 19, 20, 21, 22, 23, 24, 25, 27, 28,
        29, 30, 32, 33, 35, 37, 38, 39, 40, 41, 42, 43, 44, 45, 47, 48, 50, 51, 52, 53, 54,
    ),
}

PUBLISHED_SHORTENED = {
    55: (24, 39),
    65: (54, 59),
    77: (46, 72),
    85: (54, 74),
    95: (29, 59, 79, 89),
    99: (61, 79, 94),
    117: (85, 106),
    119: (23, 39, 57, 58, 71, 88, 107, 109),
}


@pytest.fixture(scope="module")
def bank():
    return FilterBank()


@pytest.mark.parametrize("m", sorted(PUBLISHED))
def test_published_filters(bank, m):
    f = bank.get(m)
    assert f.residues == PUBLISHED[m]
    assert f.a == m * 24 // (3 if m % 3 == 0 else 1)


@pytest.mark.parametrize("m", sorted(PUBLISHED_SHORTENED))
def test_published_shortened_filters(bank, m):
    assert bank.shortened(m).residues == PUBLISHED_SHORTENED[m]


def test_shortened_filter_edge_cases(bank):
    assert bank.shortened(15).residues == ()
    for p in (5, 7, 37, 41):
        assert bank.shortened(p).residues == bank.get(p).residues


def test_compute_filter_rejects_even_or_tiny_moduli():
    with pytest.raises(EvenModulus):
        compute_filter(4)
    with pytest.raises(EvenModulus):
        compute_filter(1)
    with pytest.raises(EvenModulus):
        Filter(10, (1,))


def test_filter_contains(bank):
    assert filter_contains(bank.get(5), 97)
    assert not filter_contains(bank.get(5), 49)
    assert filter_contains(bank.get(7), 601)
    assert not filter_contains(bank.get(7), 1009)
    assert bank.get(7).table.tolist() == [True, False, False, True, False, True, True]


@pytest.mark.slow
def test_lift_of_divisor_filter_is_contained(bank):
    # only residues some n = 1 (mod 24) reaches can be in S_m
    for m in range(3, 501, 2):
        full = set(bank.get(m).residues)
        g = math.gcd(m, 3)
        for q in divisors(m):
            if q in (1, m):
                continue
            sq = set(bank.get(q).residues)
            lifted = {r for r in range(m) if r % q in sq and r % g == 1 % g}
            assert lifted <= full, (q, m)


@pytest.mark.slow
def test_members_really_decompose(bank):
    for m in range(5, 301, 2):
        f = bank.get(m)
        for r in f.residues:
            cls = crt_combine(ResidueClass.of(1, 24), ResidueClass.of(r, m))
            for t in range(10):
                n = cls.residue + t * cls.modulus
                if n < 3:
                    continue
                assert brute_force_decompose(n), (m, r, n)


@pytest.mark.slow
def test_square_classes_never_enter_filters(bank):
    for m in range(3, 301, 2):
        f = bank.get(m)
        for k in range(1, 24 * m, 2):
            if math.gcd(k, 6 * m) == 1:
                assert not f.contains(k * k), (m, k)


def test_bank_ensure_and_membership():
    bank = FilterBank()
    filters = bank.ensure([7, 5, 7])
    assert list(filters) == [7, 5]
    assert 5 in bank and 11 not in bank
    assert bank(5) is bank.get(5)


def test_file_round_trip(tmp_path, bank):
    path = tmp_path / "filters.txt"
    original = [bank.get(5), bank.get(7)]
    save_filters(path, original)
    assert path.read_text(encoding="utf-8") == "5: 0,2,3\n7: 0,3,5,6\n"
    assert load_filters(path) == original

    reloaded = FilterBank.load(path)
    assert 5 in reloaded and 7 in reloaded


def test_shortened_filters_use_star_files(tmp_path, bank):
    written = save_filters(tmp_path / "s.txt", [bank.shortened(65), bank.shortened(55)])
    assert written == tmp_path / "s.txt.star"
    assert written.read_text(encoding="utf-8") == "55: 24,39\n65: 54,59\n"
    assert load_filters(written) == [ShortenedFilter(55, (24, 39)), ShortenedFilter(65, (54, 59))]
    with pytest.raises(FilterFormatError):
        FilterBank.load(written)
    with pytest.raises(ValueError):
        save_filters(tmp_path / "mixed.txt", [bank.get(5), bank.shortened(55)])


def test_parse_filter_line():
    assert parse_filter_line("5: 0,2,3") == (5, (0, 2, 3))
    assert parse_filter_line("  # comment") is None
    assert parse_filter_line("") is None
    assert parse_filter_line("15: 7, 10, 13  # S_15") == (15, (7, 10, 13))
    assert parse_filter_line("3:") == (3, ())


@pytest.mark.parametrize("line", ["4: 1", "5: 7", "5: 3,2", "5 0,2", "x: 1", "5: 2,2"])
def test_parse_filter_line_rejects(line):
    with pytest.raises(FilterFormatError):
        parse_filter_line(line, 1)


def test_load_reports_line_number(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("5: 0,2,3\n\n4: 1\n", encoding="utf-8")
    with pytest.raises(FilterFormatError, match="line 3"):
        load_filters(path)
