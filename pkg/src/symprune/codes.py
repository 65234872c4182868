"""Rotation classes of the 2^n subboxes of a simultaneously bisected n-cube.

A subbox is a binary string of length n (bit i = 0: lower half of
dimension i, 1: upper half). Two subboxes are symmetric when one is a
circular shift of the other. Each class is represented by its smallest
binary string, stored as a *zero-run code*: the number of zeros before
each 1. ``0100010111`` becomes ``(1, 3, 1, 0, 0)``. Codes are compared
lexicographically, so the representative is the largest code of its class.

Class generation never enumerates the 2^n strings: full-period
representatives with m ones come straight from a bounded recursion
(:func:`classgen`), and lower-period ones are full-period blocks of a
divisor length repeated (:func:`expand_lower_period`).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, gcd
from typing import Iterable, Iterator, List, NamedTuple, Sequence, Tuple

__all__ = [
    "ClassCode",
    "ClassEntry",
    "SRSet",
    "TrailingZero",
    "code_to_binary",
    "binary_to_code",
    "code_period",
    "code_validity",
    "classgen",
    "expand_lower_period",
    "build_sr",
    "iter_sr",
    "brute_force_sr",
    "count_fp",
    "count_n",
    "count_fp_nm",
    "count_n_nm",
    "count_n_nm_direct",
    "count_n_direct",
    "count_np",
    "count_np_nm",
    "ifdp",
    "ifdp_fraction",
    "divisors",
    "common_divisors",
]


class TrailingZero(ValueError):
    """A non-zero binary string ending in 0 has no zero-run code."""


class ClassCode(NamedTuple):
    """Zero-run code ``runs`` of an ``n``-bit string; ``runs == ()`` is 0^n."""

    runs: Tuple[int, ...]
    n: int

    @property
    def m(self) -> int:
        return len(self.runs)

    @property
    def is_all_zeros(self) -> bool:
        return not self.runs

    def check(self) -> "ClassCode":
        if any(r < 0 for r in self.runs) or sum(self.runs) != self.n - len(self.runs):
            raise ValueError(f"runs {self.runs} do not describe a {self.n}-bit string")
        return self

    def text(self) -> str:
        """Digits concatenated (``600``); space-separated if any run exceeds 9."""
        if not self.runs:
            return "-"
        if all(r < 10 for r in self.runs):
            return "".join(map(str, self.runs))
        return " ".join(map(str, self.runs))

    def __str__(self):
        return self.text()


class ClassEntry(NamedTuple):
    code: ClassCode
    period: int


class SRSet(NamedTuple):
    """One representative per rotation class of the n-bit strings."""

    n: int
    entries: List[ClassEntry]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def binaries(self) -> List[str]:
        return [code_to_binary(e.code) for e in self.entries]

    def total_period(self) -> int:
        return sum(e.period for e in self.entries)


# ---------------------------------------------------------------------------
# coding
# ---------------------------------------------------------------------------


def code_to_binary(c: ClassCode) -> str:
    if c.is_all_zeros:
        return "0" * c.n
    return "".join("0" * r + "1" for r in c.runs)


def binary_to_code(s: str) -> ClassCode:
    if not s or set(s) - {"0", "1"}:
        raise ValueError(f"not a binary string: {s!r}")
    if "1" not in s:
        return ClassCode((), len(s))
    if s[-1] != "1":
        raise TrailingZero(f"{s} ends in 0")
    return ClassCode(tuple(len(z) for z in s[:-1].split("1")), len(s))


def code_period(c: ClassCode) -> int:
    """Rotation period of the decoded string, computed on the runs.

    Shifting the runs by d positions corresponds to a binary shift by
    ``n*d/m`` positions whenever the runs are d-periodic.
    """
    runs = c.runs
    m = len(runs)
    if m == 0:
        return 1
    for d in divisors(m):
        if runs[d:] == runs[:-d] if d < m else True:
            return c.n * d // m
    return c.n


def code_validity(c) -> bool:
    """True iff the code is full-period and the largest rotation of its runs.

    Single left-to-right scan: ``ctrol`` indexes the head element the current
    position is matched against while a compatibility decision is pending.
    Accepts a ``ClassCode`` or a bare run sequence.
    """
    A = c.runs if isinstance(c, ClassCode) else tuple(c)
    m = len(A)
    if m == 0:
        return isinstance(c, ClassCode) and c.n == 1
    if m == 1:
        return True
    ctrol = 0
    i = 1
    while i < m - 1:
        if A[i] > A[ctrol]:
            return False
        if A[i] < A[ctrol]:
            ctrol = 0
        else:
            ctrol += 1
        i += 1
    return A[m - 1] < A[ctrol]


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------


def _classgen_runs(n: int, m: int) -> List[Tuple[int, ...]]:
    """Run tuples of all full-period representatives with m ones, decreasing."""
    if m == 1:
        return [(n - 1,)]
    if m < 1 or m > n:
        return []
    out: List[Tuple[int, ...]] = []
    A = [0] * m
    last = m - 1
    append = out.append

    def rec(total: int, pos: int, ctrol: int) -> None:
        if pos == last:
            if total < A[ctrol]:
                A[last] = total
                append(tuple(A))
            return
        limit = A[ctrol]
        upper = total if total < limit else limit
        for i in range(upper, -1, -1):
            A[pos] = i
            if i == limit:
                rec(total - i, pos + 1, ctrol + 1)
            else:
                rec(total - i, pos + 1, 0)

    total = n - m
    lower = -(-total // m)
    for first in range(total, lower - 1, -1):
        A[0] = first
        rec(total - first, 1, 0)
    return out


def classgen(n: int, m: int) -> List[ClassCode]:
    """Full-period class representatives of n bits with m ones.

    Codes come out in decreasing lexicographic order of their runs. Each
    position is bounded above by the control element it is matched against
    (strictly at the last position), and the first run by ``ceil((n-m)/m)``
    from below, so no invalid code is ever completed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return [ClassCode(r, n) for r in _classgen_runs(n, m)]


def expand_lower_period(base: Sequence[ClassCode], f: int) -> List[ClassCode]:
    """Repeat each base code ``f`` times; period stays the base length."""
    if f < 1:
        raise ValueError("repetition factor must be >= 1")
    return [ClassCode(tuple(c.runs) * f, c.n * f) for c in base]


def divisors(n: int) -> List[int]:
    if n < 1:
        raise ValueError("divisors of a non-positive number")
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def common_divisors(n: int, m: int) -> List[int]:
    """Common divisors of n and m; every divisor of n divides m = 0."""
    return divisors(gcd(n, m)) if m else divisors(n)


def iter_sr(n: int) -> Iterator[ClassEntry]:
    """Stream the class representatives of the n-bit strings.

    Order: the all-zeros class, then m = 1..n ascending, within m periods
    ascending, within a period the native generation order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    yield ClassEntry(ClassCode((), n), 1)
    for m in range(1, n + 1):
        for p in divisors(n):
            f = n // p
            if m % f:
                continue
            for runs in _classgen_runs(p, m // f):
                yield ClassEntry(ClassCode(runs * f, n), p)


def build_sr(n: int) -> SRSet:
    """All class representatives of the n-bit strings, in :func:`iter_sr` order."""
    return SRSet(n, list(iter_sr(n)))


def brute_force_sr(n: int) -> SRSet:
    """Naive oracle: canonicalise all 2^n strings by their minimal rotation."""
    if not 1 <= n <= 20:
        raise ValueError("brute force is limited to 1 <= n <= 20")
    mask = (1 << n) - 1
    seen = set()
    entries = []
    # with bit (n-1-i) holding string position i, integer order is string order
    for x in range(1 << n):
        best = x
        y = x
        period = n
        for shift in range(1, n):
            y = ((y << 1) | (y >> (n - 1))) & mask
            if y == x:
                period = shift
                break
            if y < best:
                best = y
        if best in seen:
            continue
        seen.add(best)
        s = format(best, f"0{n}b")
        entries.append(ClassEntry(binary_to_code(s), period))
    return SRSet(n, entries)


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def count_fp(n: int) -> int:
    """Number of full-period classes of n-bit strings."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 2
    rest = sum(p * count_fp(p) for p in divisors(n)[:-1])
    q, r = divmod((1 << n) - rest, n)
    assert r == 0
    return q


@lru_cache(maxsize=None)
def count_n(n: int) -> int:
    """Number of classes of n-bit strings, i.e. ``len(build_sr(n))``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 2
    total = Fraction(1 << n, n) + sum(Fraction(n - p, n) * count_fp(p) for p in divisors(n)[:-1])
    assert total.denominator == 1
    return int(total)


def count_n_direct(n: int) -> int:
    """Sum of full-period counts over the divisors of n."""
    return sum(count_fp(p) for p in divisors(n))


def _check_nm(n: int, m: int) -> None:
    if n < 1 or not 0 <= m <= n:
        raise ValueError(f"need n >= 1 and 0 <= m <= n, got n={n}, m={m}")


@lru_cache(maxsize=None)
def count_fp_nm(n: int, m: int) -> int:
    """Number of full-period classes of n-bit strings with m ones."""
    _check_nm(n, m)
    if m == 0 or m == n:
        return 1 if n == 1 else 0
    rest = sum((n // f) * count_fp_nm(n // f, m // f) for f in common_divisors(n, m)[1:])
    q, r = divmod(comb(n, m) - rest, n)
    assert r == 0
    return q


def count_n_nm_direct(n: int, m: int) -> int:
    """Classes with m ones, summing full-period counts over repetition factors."""
    _check_nm(n, m)
    if m == 0 or m == n:
        return 1
    return sum(count_fp_nm(n // f, m // f) for f in common_divisors(n, m))


def count_n_nm(n: int, m: int) -> int:
    """Classes with m ones: ``C(n,m)/n + sum_{f>1} (1 - 1/f) FP(n/f, m/f)``."""
    _check_nm(n, m)
    if m == 0 or m == n:
        return 1
    total = Fraction(comb(n, m), n) + sum(
        (1 - Fraction(1, f)) * count_fp_nm(n // f, m // f) for f in common_divisors(n, m)[1:]
    )
    assert total.denominator == 1
    return int(total)


def count_np(n: int, p: int) -> int:
    """Classes of n-bit strings with period p."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be >= 1")
    return count_fp(p) if n % p == 0 else 0


def count_np_nm(n: int, m: int, p: int) -> int:
    """Classes of n-bit strings with m ones and period p."""
    _check_nm(n, m)
    if p < 1 or n % p:
        return 0
    f = n // p
    if m % f:
        return 0
    return count_fp_nm(p, m * p // n)


def ifdp_fraction(n: int) -> Fraction:
    """Exact ``2^n / N_n``: total boxes over representatives solved."""
    return Fraction(1 << n, count_n(n))


def ifdp(n: int) -> float:
    return float(ifdp_fraction(n))


def iter_codes(sr: SRSet) -> Iterable[Tuple[ClassCode, int, str]]:
    for e in sr.entries:
        yield e.code, e.period, code_to_binary(e.code)

