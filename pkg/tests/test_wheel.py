"""CRT wheel construction, reduction policies and the wheel file format."""

import math
from fractions import Fraction

import numpy as np
import pytest

from esverify.filters import FilterBank
from esverify.wheel import (
    EmptyWheel,
    PolicyModulusInvalid,
    Wheel,
    WheelFormatError,
    WheelPolicy,
    build_wheel,
    build_wheel_from_policy,
    candidates,
    excluding_modulus,
    load_wheel,
    mean_gap,
    save_wheel,
)

R_2 = [1, 121, 169, 289, 361, 529]


@pytest.fixture(scope="module")
def bank():
    return FilterBank()


def test_small_wheels(bank):
    w = build_wheel((5,), (5,), bank)
    assert w.G == 120 and w.residues.tolist() == [1, 49]
    w = build_wheel((5, 7), (5, 7, 35), bank)
    assert w.G == 840 and w.residues.tolist() == R_2
    w = build_wheel((), (), bank)
    assert w.G == 24 and w.residues.tolist() == [1]


def test_mean_gap(bank):
    assert mean_gap(build_wheel((5,), (5,), bank)) == 60
    assert mean_gap(build_wheel((5, 7), (5, 7, 35), bank)) == 140
    assert mean_gap(build_wheel((), (), bank)) == Fraction(24)


def test_mean_gap_of_empty_wheel():
    empty = Wheel((), 24, np.array([], dtype=np.int64))
    with pytest.raises(EmptyWheel):
        mean_gap(empty)


def test_candidates(bank):
    w5 = build_wheel((5,), (5,), bank)
    assert list(candidates(w5, range(0, 1))) == [1, 49]
    assert list(candidates(w5, range(0, 2))) == [1, 49, 121, 169]
    assert list(candidates(build_wheel((5, 7), (5, 7, 35), bank), range(1))) == R_2
    assert w5.block(3).tolist() == [361, 409]


@pytest.mark.parametrize(
    "primes,policy",
    [((4,), ()), ((5, 5), ()), ((9,), ()), ((5,), (9,)), ((5,), (2,)), ((5,), (1,))],
)
def test_invalid_inputs(bank, primes, policy):
    with pytest.raises(PolicyModulusInvalid):
        build_wheel(primes, policy, bank)


def test_primes_policy_size_is_product_of_complements(bank):
    primes = (5, 7, 11, 13, 17, 19, 23)
    w = build_wheel_from_policy(primes, WheelPolicy("primes"), bank)
    assert len(w) == 2 * 3 * 7 * 8 * 12 * 13 * 13 == 681_408
    assert w.G == 24 * math.prod(primes)
    assert w.policy_label == "primes"


def test_more_reduction_moduli_never_grow_the_wheel(bank):
    primes = (5, 7, 11)
    narrow = build_wheel_from_policy(primes, WheelPolicy("primes"), bank)
    wide = build_wheel_from_policy(primes, WheelPolicy.parse("all-odd-divisors"), bank)
    assert set(wide.residues.tolist()) <= set(narrow.residues.tolist())
    assert np.all(wide.residues % 24 == 1)


@pytest.mark.slow
def test_excluded_integers_are_certified(bank):
    w = build_wheel_from_policy((5, 7, 11), WheelPolicy.parse("all-odd-divisors"), bank)
    rng = np.random.default_rng(7)
    for n in (rng.integers(0, 10**9, size=100_000) * 24 + 1).tolist():
        if not w.contains(n):
            q = excluding_modulus(w, n, bank)
            assert q is not None and bank.get(q).contains(n), n
        else:
            assert excluding_modulus(w, n, bank) is None


def test_squares_are_kept(bank):
    w = build_wheel_from_policy((5, 7, 11), WheelPolicy.parse("all-odd-divisors"), bank)
    for k in range(1, w.G, 2):
        if math.gcd(k, w.G) == 1:
            assert w.contains(k * k), k
    assert all(math.isqrt(r) ** 2 == r for r in R_2)


def test_policy_parse_and_resolve():
    assert WheelPolicy.parse("primes").resolve((5, 7)) == (5, 7)
    all_odd = WheelPolicy.parse("all-odd-divisors")
    assert all_odd.resolve((5, 7)) == (3, 5, 7, 15, 21, 35, 105)
    assert WheelPolicy.parse("all-odd-divisors:30").resolve((5, 7)) == (3, 5, 7, 15, 21)
    custom = WheelPolicy.parse("custom:5,7,35")
    assert custom.resolve((5, 7)) == (5, 7, 35)
    assert custom.describe() == "custom:5,7,35"
    with pytest.raises(PolicyModulusInvalid):
        WheelPolicy.parse("every-other")
    with pytest.raises(PolicyModulusInvalid):
        WheelPolicy.parse("all-odd-divisors:lots")


def test_file_round_trip(tmp_path, bank):
    w = build_wheel_from_policy((5, 7), WheelPolicy.parse("custom:5,7,35"), bank)
    path = tmp_path / "r2.wheel"
    save_wheel(path, w)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "G=840 primes=5,7 policy=custom:5,7,35 moduli=5,7,35"
    assert lines[1:] == [str(r) for r in R_2]
    assert load_wheel(path) == w


@pytest.mark.parametrize(
    "text",
    [
        "primes=5 policy=primes\n1\n",
        "G=100 primes=5 policy=primes\n1\n",
        "G=120 primes=5 policy=primes\n49\n1\n",
        "G=120 primes=5 policy=primes\n2\n",
        "G=120 primes=5 policy=primes\n1\n121\n",
        "G=120 primes=5 policy=primes\n1\nx\n",
    ],
)
def test_load_rejects_bad_files(tmp_path, text):
    path = tmp_path / "bad.wheel"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(WheelFormatError):
        load_wheel(path)
