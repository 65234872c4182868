from fractions import Fraction
from itertools import product
from math import comb

import pytest
from hypothesis import given, strategies as st

from symprune.codes import (
    ClassCode,
    TrailingZero,
    binary_to_code,
    brute_force_sr,
    build_sr,
    classgen,
    code_period,
    code_to_binary,
    code_validity,
    common_divisors,
    count_fp,
    count_fp_nm,
    count_n,
    count_n_direct,
    count_n_nm,
    count_n_nm_direct,
    count_np,
    count_np_nm,
    divisors,
    expand_lower_period,
    ifdp,
    ifdp_fraction,
    iter_sr,
)


def code(*runs):
    return ClassCode(tuple(runs), len(runs) + sum(runs))


def rotations(s):
    return {s[i:] + s[:i] for i in range(len(s))}


def canonical(s):
    return min(rotations(s))


def string_period(s):
    return next(p for p in range(1, len(s) + 1) if s[p:] + s[:p] == s)


def brute_classes(n, m=None):
    """Canonical strings of every rotation class, optionally with m ones."""
    out = set()
    for bits in product("01", repeat=n):
        s = "".join(bits)
        if m is None or s.count("1") == m:
            out.add(canonical(s))
    return out


# --- coding -----------------------------------------------------------------


def test_decode_worked_example():
    assert code_to_binary(code(1, 3, 1, 0, 0)) == "0100010111"


def test_decode_all_zeros():
    assert code_to_binary(ClassCode((), 4)) == "0000"


def test_decode_three_runs():
    c = code(3, 0, 1)
    assert c.n == 7
    assert code_to_binary(c) == "0001101"
    assert binary_to_code("0001101") == c


def test_encode():
    assert binary_to_code("0100010111").runs == (1, 3, 1, 0, 0)
    assert binary_to_code("001001").runs == (2, 2)
    assert binary_to_code("0000").is_all_zeros


def test_encode_trailing_zero():
    with pytest.raises(TrailingZero):
        binary_to_code("0110")


def test_code_text():
    assert code(6, 0, 0).text() == "600"
    assert code(12, 0).text() == "12 0"
    assert ClassCode((), 3).text() == "-"


@given(st.text("01", min_size=1, max_size=40).map(lambda s: s + "1"))
def test_round_trip(s):
    assert code_to_binary(binary_to_code(s)) == s


def test_check_rejects_bad_sum():
    with pytest.raises(ValueError):
        ClassCode((1, 1), 5).check()


# --- period and validity ----------------------------------------------------


def test_period_examples():
    assert code_period(code(2, 2)) == 3
    assert code_period(code(1, 3, 1, 0, 0)) == 10
    assert code_period(ClassCode((), 5)) == 1


@pytest.mark.parametrize("n", range(1, 13))
def test_period_matches_strings(n):
    for bits in product("01", repeat=n):
        s = "".join(bits)
        if s.endswith("1") or "1" not in s:
            assert code_period(binary_to_code(s)) == string_period(s)


def test_validity_examples():
    assert code_validity(code(3, 0, 1))
    assert not code_validity(code(2, 2))
    assert not code_validity(code(1, 3, 1, 0, 0))
    assert code_validity(code(6, 0, 0))


def _valid_by_rotation(runs):
    """Largest rotation of the runs and not periodic."""
    m = len(runs)
    rots = [runs[i:] + runs[:i] for i in range(m)]
    return all(runs > r for r in rots[1:])


@pytest.mark.parametrize("n", range(2, 13))
def test_validity_matches_rotation_oracle(n):
    for bits in product("01", repeat=n - 1):
        c = binary_to_code("".join(bits) + "1")
        assert code_validity(c) == _valid_by_rotation(c.runs), c


# --- generation -------------------------------------------------------------


def test_classgen_nine_three():
    got = [c.text() for c in classgen(9, 3)]
    assert got == ["600", "510", "501", "420", "411", "402", "330", "321", "312"]


def test_classgen_small_cases():
    assert [c.runs for c in classgen(4, 2)] == [(2, 0)]
    assert classgen(4, 4) == []
    for n in range(2, 17):
        assert [c.runs for c in classgen(n, 1)] == [(n - 1,)]


@pytest.mark.parametrize("n", range(2, 15))
def test_classgen_matches_brute_force(n):
    for m in range(1, n + 1):
        got = classgen(n, m)
        want = {s for s in brute_classes(n, m) if string_period(s) == n}
        assert {code_to_binary(c) for c in got} == want
        assert len(got) == count_fp_nm(n, m)
        assert all(code_validity(c) for c in got)
        runs = [c.runs for c in got]
        assert all(a > b for a, b in zip(runs, runs[1:]))


def test_expand_lower_period():
    assert [c.runs for c in expand_lower_period([code(1)], 2)] == [(1, 1)]
    assert code_to_binary(expand_lower_period([code(1)], 2)[0]) == "0101"
    assert [c.runs for c in expand_lower_period([code(0)], 3)] == [(0, 0, 0)]
    doubled = expand_lower_period(classgen(3, 1), 2)
    assert [code_to_binary(c) for c in doubled] == ["001001"]
    assert code_period(doubled[0]) == 3


def test_build_sr_two():
    sr = build_sr(2)
    assert sr.binaries() == ["00", "01", "11"]
    assert [e.period for e in sr] == [1, 2, 1]


def test_build_sr_sizes():
    assert len(build_sr(5)) == 8
    assert len(build_sr(7)) == 20


def test_iter_sr_is_build_sr():
    assert list(iter_sr(10)) == build_sr(10).entries


def test_brute_force_small():
    assert brute_force_sr(2).binaries() == build_sr(2).binaries()
    assert sorted(brute_force_sr(3).binaries()) == ["000", "001", "011", "111"]
    assert len(brute_force_sr(12)) == count_n(12)


@pytest.mark.parametrize("n", range(1, 17))
def test_build_sr_matches_oracle(n):
    sr = build_sr(n)
    canon = [canonical(s) for s in sr.binaries()]
    assert canon == sr.binaries()  # each representative is its class minimum
    assert len(set(canon)) == len(canon)
    assert set(canon) == set(brute_force_sr(n).binaries())
    assert sr.total_period() == 2 ** n
    assert all(e.period == string_period(code_to_binary(e.code)) for e in sr)


def test_build_sr_order():
    sr = build_sr(6)
    ms = [e.code.m for e in sr]
    assert ms == sorted(ms)
    for m in range(1, 7):
        periods = [e.period for e in sr if e.code.m == m]
        assert periods == sorted(periods)


# --- counting ---------------------------------------------------------------


def test_count_fp_examples():
    assert count_fp(1) == 2
    assert count_fp(2) == 1
    assert count_fp(4) == 3


def test_count_n_examples():
    assert count_n(1) == 2
    assert count_n(5) == 8
    assert count_n(7) == 20


@pytest.mark.parametrize("n", range(1, 17))
def test_counts_match_brute_force(n):
    classes = brute_classes(n)
    assert count_n(n) == len(classes) == count_n_direct(n)
    assert count_fp(n) == sum(1 for s in classes if string_period(s) == n)
    for p in divisors(n):
        assert count_np(n, p) == sum(1 for s in classes if string_period(s) == p)
    assert sum(count_np(n, p) for p in divisors(n)) == count_n(n)


def test_count_fp_nm_examples():
    assert count_fp_nm(1, 0) == 1
    assert count_fp_nm(1, 1) == 1
    assert count_fp_nm(9, 3) == 9
    assert count_fp_nm(4, 2) == 1


def test_count_n_nm_examples():
    assert count_n_nm(4, 2) == 2
    assert all(count_n_nm(n, 0) == 1 for n in range(1, 20))


@pytest.mark.parametrize("n", range(1, 17))
def test_count_nm_matches_brute_force(n):
    total = 0
    for m in range(n + 1):
        classes = brute_classes(n, m)
        assert count_n_nm(n, m) == count_n_nm_direct(n, m) == len(classes)
        for p in divisors(n):
            want = sum(1 for s in classes if string_period(s) == p)
            assert count_np_nm(n, m, p) == want
        total += count_n_nm(n, m)
    assert total == count_n(n)


@pytest.mark.parametrize("n", range(1, 25))
def test_popcount_closure(n):
    for m in range(n + 1):
        fs = common_divisors(n, m)
        assert sum((n // f) * count_fp_nm(n // f, m // f) for f in fs) == comb(n, m)


def one_minus_p_form(n, m):
    """Closed form with (1 - p) weights; it overcounts and is kept only to show that.

    p runs over the common divisors of n and m below n; terms whose
    second index m*p/n is not an integer are dropped.
    """
    total = comb(n, m)
    for p in common_divisors(n, m):
        if p < n and (m * p) % n == 0:
            total += (1 - p) * count_fp_nm(p, m * p // n)
    return total


def test_one_minus_p_form_disagrees():
    assert count_n_nm(4, 2) == count_n_nm_direct(4, 2) == 2
    assert one_minus_p_form(4, 2) == 5


def test_count_np_non_divisor():
    assert count_np(6, 3) == count_fp(3) == 2
    assert count_np(6, 4) == 0


def test_ifdp():
    assert ifdp(5) == 4.0
    assert ifdp(7) == 6.4
    assert abs(ifdp(4) - 2.7) <= 0.05
    assert ifdp_fraction(6) == Fraction(64, 14)


def test_large_counts_exact():
    assert count_fp(64) > 2 ** 57
    assert sum(count_n_nm(64, m) for m in range(65)) == count_n(64)


def test_bad_arguments():
    with pytest.raises(ValueError):
        count_fp_nm(3, 4)
    with pytest.raises(ValueError):
        build_sr(0)
    with pytest.raises(ValueError):
        brute_force_sr(21)
