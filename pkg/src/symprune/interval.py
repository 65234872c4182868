"""Closed-interval arithmetic and axis-aligned boxes.

Endpoints are Python floats. Every operation returns an enclosure of the
exact real result: error-free transformations (TwoSum, Dekker's product)
detect whether a rounded endpoint is exact, and only inexact endpoints are
pushed one ulp outward. Results are therefore tight whenever the host
arithmetic is exact, e.g. ``[1, 2] + [3, 4] == [4, 6]``.

The empty interval is represented by ``None``; an ``Interval`` instance is
never empty and always satisfies ``lo <= hi``.

The ``_``-prefixed helpers work on raw ``(lo, hi)`` floats and are shared
with the solver's compiled contractor.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, Optional, Sequence, Tuple

from ._jit import jit

INF = math.inf
_SPLITTER = 134217729.0  # 2**27 + 1
_SPLIT_HI = 1e290
_SPLIT_LO = 1e-280

__all__ = [
    "Interval",
    "Box",
    "ZeroWidthDim",
    "DivisionByZeroSpan",
    "iv_add",
    "iv_sub",
    "iv_mul",
    "iv_div",
    "iv_neg",
    "iv_pow",
    "iv_intersect",
    "iv_hull",
    "box_bisect",
]


class ZeroWidthDim(ValueError):
    """Raised when bisecting a degenerate box dimension."""


class DivisionByZeroSpan(ZeroDivisionError):
    """Raised when a divisor interval contains zero."""


# ---------------------------------------------------------------------------
# directed rounding on scalars
# ---------------------------------------------------------------------------


@jit
def _add_dn(a: float, b: float) -> float:
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    if err < 0.0:
        return math.nextafter(s, -INF)
    if s != s:
        return -INF
    return s


@jit
def _add_up(a: float, b: float) -> float:
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    if err > 0.0:
        return math.nextafter(s, INF)
    if s != s:
        return INF
    return s


@jit
def _two_prod_err(a: float, b: float, p: float) -> float:
    """Sign-correct error ``a*b - p`` of the rounded product ``p``."""
    if p == INF or p == -INF:
        return 0.0 if (a == INF or a == -INF or b == INF or b == -INF) else math.nan
    if not (abs(a) < _SPLIT_HI and abs(b) < _SPLIT_HI and _SPLIT_LO < abs(p) < _SPLIT_HI):
        # outside the error-free range; callers round outward
        return math.nan
    t = _SPLITTER * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLITTER * b
    bh = t - (t - b)
    bl = b - bh
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


@jit
def _scaled_err_sign(a: float, b: float, p: float) -> float:
    """Something with the sign of ``a*b - p`` when ``p`` under- or overflowed.

    The mantissas are multiplied error-free and ``p`` is scaled by the same
    power of two, which is exact. NaN when an operand is not finite.
    """
    if a - a != 0.0 or b - b != 0.0 or p - p != 0.0:
        return math.nan
    ma, ea = math.frexp(a)
    mb, eb = math.frexp(b)
    q = ma * mb
    e = _two_prod_err(ma, mb, q)
    # |q| is in [0.25, 1) and the difference below is exact
    return (q - math.ldexp(p, -(ea + eb))) + e


@jit
def _mul_dn(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    p = a * b
    err = _two_prod_err(a, b, p)
    if err != err:
        err = _scaled_err_sign(a, b, p)
    if err < 0.0 or err != err:
        return math.nextafter(p, -INF)
    return p


@jit
def _mul_up(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    p = a * b
    err = _two_prod_err(a, b, p)
    if err != err:
        err = _scaled_err_sign(a, b, p)
    if err > 0.0 or err != err:
        return math.nextafter(p, INF)
    return p


@jit
def _div_dir(a: float, b: float, up: bool) -> float:
    if a == 0.0:
        return 0.0
    if b == INF or b == -INF:
        if a == INF or a == -INF:
            return INF if up else -INF
        return 0.0
    q = a / b
    if q == INF or q == -INF or a == INF or a == -INF:
        return q
    if q == 0.0 or abs(q) < 1e-290:
        # underflow region: step outward unconditionally
        return math.nextafter(q, INF if up else -INF)
    p = q * b
    e = _two_prod_err(q, b, p)
    if e != e:
        return math.nextafter(q, INF if up else -INF)
    # sign of (a - q*b); a - p is exact by Sterbenz
    r = (a - p) - e
    if r == 0.0:
        return q
    above = (r > 0.0) == (b > 0.0)  # true quotient exceeds q
    if up and above:
        return math.nextafter(q, INF)
    if not up and not above:
        return math.nextafter(q, -INF)
    return q


@jit
def _pow_pt(a: float, n: int, up: bool) -> float:
    """Directed-rounded ``a**n`` for a >= 0."""
    lo = hi = 1.0
    blo = bhi = a
    while n:
        if n & 1:
            lo, hi = _mul_dn(lo, blo), _mul_up(hi, bhi)
        n >>= 1
        if n:
            blo, bhi = _mul_dn(blo, blo), _mul_up(bhi, bhi)
    return hi if up else lo


@jit
def _root_pt(z: float, n: int, up: bool) -> float:
    """Directed nth root of z >= 0: result r with r**n on the right side of z."""
    if z == 0.0 or z == INF:
        return z
    r = z ** (1.0 / n)
    if up:
        while _pow_pt(r, n, False) < z:
            r = math.nextafter(r, INF)
    else:
        while _pow_pt(r, n, True) > z:
            r = math.nextafter(r, -INF)
    return r


# ---------------------------------------------------------------------------
# interval operations on raw endpoints
# ---------------------------------------------------------------------------


@jit
def _add(al, ah, bl, bh):
    return _add_dn(al, bl), _add_up(ah, bh)


@jit
def _sub(al, ah, bl, bh):
    return _add_dn(al, -bh), _add_up(ah, -bl)


@jit
def _mul(al, ah, bl, bh):
    if al >= 0.0:
        if bl >= 0.0:
            return _mul_dn(al, bl), _mul_up(ah, bh)
        if bh <= 0.0:
            return _mul_dn(ah, bl), _mul_up(al, bh)
        return _mul_dn(ah, bl), _mul_up(ah, bh)
    if ah <= 0.0:
        if bl >= 0.0:
            return _mul_dn(al, bh), _mul_up(ah, bl)
        if bh <= 0.0:
            return _mul_dn(ah, bh), _mul_up(al, bl)
        return _mul_dn(al, bh), _mul_up(al, bl)
    if bl >= 0.0:
        return _mul_dn(al, bh), _mul_up(ah, bh)
    if bh <= 0.0:
        return _mul_dn(ah, bl), _mul_up(al, bl)
    return (
        min(_mul_dn(al, bh), _mul_dn(ah, bl)),
        max(_mul_up(al, bl), _mul_up(ah, bh)),
    )


@jit
def _div(al, ah, bl, bh):
    """Divide by an interval that excludes zero (caller checks)."""
    if bl > 0.0:
        if al >= 0.0:
            return _div_dir(al, bh, False), _div_dir(ah, bl, True)
        if ah <= 0.0:
            return _div_dir(al, bl, False), _div_dir(ah, bh, True)
        return _div_dir(al, bl, False), _div_dir(ah, bl, True)
    if al >= 0.0:
        return _div_dir(ah, bh, False), _div_dir(al, bl, True)
    if ah <= 0.0:
        return _div_dir(ah, bl, False), _div_dir(al, bh, True)
    return _div_dir(ah, bh, False), _div_dir(al, bh, True)


@jit
def _pow(al, ah, n):
    if n % 2:
        lo = -_pow_pt(-al, n, True) if al < 0 else _pow_pt(al, n, False)
        hi = -_pow_pt(-ah, n, False) if ah < 0 else _pow_pt(ah, n, True)
        return lo, hi
    if al >= 0.0:
        return _pow_pt(al, n, False), _pow_pt(ah, n, True)
    if ah <= 0.0:
        return _pow_pt(-ah, n, False), _pow_pt(-al, n, True)
    return 0.0, _pow_pt(max(-al, ah), n, True)


@jit
def _pow_inverse(zl, zh, xl, xh, n):
    """Project ``z = x**n`` back onto x; returns (lo, hi), empty when lo > hi."""
    if n % 2:
        rl = -_root_pt(-zl, n, True) if zl < 0 else _root_pt(zl, n, False)
        rh = -_root_pt(-zh, n, False) if zh < 0 else _root_pt(zh, n, True)
        return max(xl, rl), min(xh, rh)
    if zh < 0.0:
        return INF, -INF
    rl = _root_pt(max(zl, 0.0), n, False)
    rh = _root_pt(zh, n, True)
    # x in [-rh, -rl] U [rl, rh]; hull of the parts that meet x
    pl, ph = max(xl, rl), min(xh, rh)
    nl, nh = max(xl, -rh), min(xh, -rl)
    if pl <= ph:
        if nl <= nh:
            return min(pl, nl), max(ph, nh)
        return pl, ph
    return nl, nh


# ---------------------------------------------------------------------------
# Interval
# ---------------------------------------------------------------------------


class Interval:
    """Closed real interval ``[lo, hi]`` with ``lo <= hi``."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: float, hi: Optional[float] = None):
        lo = float(lo)
        hi = lo if hi is None else float(hi)
        if not lo <= hi:
            raise ValueError(f"invalid interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def _raw(cls, lo: float, hi: float) -> "Interval":
        iv = object.__new__(cls)
        iv.lo = lo
        iv.hi = hi
        return iv

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        if self.lo == -INF or self.hi == INF:
            if self.lo == -INF and self.hi == INF:
                return 0.0
            return self.hi if self.lo == -INF else self.lo
        return self.lo + 0.5 * (self.hi - self.lo)

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    __contains__ = contains

    def __iter__(self) -> Iterator[float]:
        yield self.lo
        yield self.hi

    def __eq__(self, other):
        if isinstance(other, Interval):
            return self.lo == other.lo and self.hi == other.hi
        if isinstance(other, tuple) and len(other) == 2:
            return self.lo == other[0] and self.hi == other[1]
        return NotImplemented

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __str__(self):
        return f"[{self.lo:g}, {self.hi:g}]"

    def __add__(self, other):
        return iv_add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return iv_sub(self, _coerce(other))

    def __rsub__(self, other):
        return iv_sub(_coerce(other), self)

    def __mul__(self, other):
        return iv_mul(self, _coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return iv_div(self, _coerce(other))

    def __rtruediv__(self, other):
        return iv_div(_coerce(other), self)

    def __neg__(self):
        return iv_neg(self)

    def __pow__(self, n):
        return iv_pow(self, n)

    def __and__(self, other):
        return iv_intersect(self, other)


def _coerce(x) -> Interval:
    if isinstance(x, Interval):
        return x
    return Interval(x)


def iv_add(a: Interval, b: Interval) -> Interval:
    return Interval._raw(*_add(a.lo, a.hi, b.lo, b.hi))


def iv_sub(a: Interval, b: Interval) -> Interval:
    return Interval._raw(*_sub(a.lo, a.hi, b.lo, b.hi))


def iv_mul(a: Interval, b: Interval) -> Interval:
    return Interval._raw(*_mul(a.lo, a.hi, b.lo, b.hi))


def iv_div(a: Interval, b: Interval) -> Interval:
    if b.lo <= 0.0 <= b.hi:
        raise DivisionByZeroSpan(f"divisor {b} contains zero")
    return Interval._raw(*_div(a.lo, a.hi, b.lo, b.hi))


def iv_neg(a: Interval) -> Interval:
    return Interval._raw(-a.hi, -a.lo)


def iv_pow(a: Interval, n: int) -> Interval:
    """Natural power ``a**n``; ``n`` may be an int or a degenerate interval."""
    if isinstance(n, Interval):
        if n.lo != n.hi:
            raise ValueError("exponent interval must be degenerate")
        n = n.lo
    if n != int(n) or n < 0:
        raise ValueError(f"exponent must be a natural number, got {n}")
    n = int(n)
    if n == 0:
        return Interval._raw(1.0, 1.0)
    return Interval._raw(*_pow(a.lo, a.hi, n))


def iv_intersect(a: Interval, b: Interval) -> Optional[Interval]:
    lo = max(a.lo, b.lo)
    hi = min(a.hi, b.hi)
    if lo > hi:
        return None
    return Interval._raw(lo, hi)


def iv_hull(a: Interval, b: Interval) -> Interval:
    return Interval._raw(min(a.lo, b.lo), max(a.hi, b.hi))


# ---------------------------------------------------------------------------
# Box
# ---------------------------------------------------------------------------


class Box(tuple):
    """Ordered tuple of intervals, one per problem variable."""

    __slots__ = ()

    def __new__(cls, dims: Iterable):
        return super().__new__(
            cls, (d if isinstance(d, Interval) else Interval(*d) for d in dims)
        )

    @classmethod
    def from_bounds(cls, lo: Sequence[float], hi: Sequence[float]) -> "Box":
        return super().__new__(cls, (Interval(l, h) for l, h in zip(lo, hi)))

    @classmethod
    def cube(cls, lo: float, hi: float, n: int) -> "Box":
        iv = Interval(lo, hi)
        return super().__new__(cls, (iv,) * n)

    @property
    def lo(self) -> Tuple[float, ...]:
        return tuple(d.lo for d in self)

    @property
    def hi(self) -> Tuple[float, ...]:
        return tuple(d.hi for d in self)

    def widths(self) -> Tuple[float, ...]:
        return tuple(d.hi - d.lo for d in self)

    def max_width(self) -> float:
        return max(d.hi - d.lo for d in self)

    def volume(self) -> float:
        v = 1.0
        for d in self:
            v *= d.hi - d.lo
        return v

    def center(self) -> Tuple[float, ...]:
        return tuple(d.mid for d in self)

    def contains_point(self, x: Sequence[float]) -> bool:
        return all(d.lo <= xi <= d.hi for d, xi in zip(self, x))

    def contains_box(self, other: "Box") -> bool:
        return all(a.contains(b) for a, b in zip(self, other))

    def intersect(self, other: "Box") -> Optional["Box"]:
        out = []
        for a, b in zip(self, other):
            c = iv_intersect(a, b)
            if c is None:
                return None
            out.append(c)
        return Box(out)

    def interior_disjoint(self, other: "Box") -> bool:
        return any(a.hi <= b.lo or b.hi <= a.lo for a, b in zip(self, other))

    def replace(self, dim: int, iv: Interval) -> "Box":
        dims = list(self)
        dims[dim] = iv
        return Box(dims)

    def __repr__(self):
        return "Box(" + " x ".join(str(d) for d in self) + ")"


def box_bisect(b: Box, dim: int) -> Tuple[Box, Box]:
    """Split ``b`` at the midpoint of dimension ``dim``."""
    iv = b[dim]
    if not iv.hi > iv.lo:
        raise ZeroWidthDim(f"dimension {dim} has zero width")
    m = iv.mid
    return b.replace(dim, Interval._raw(iv.lo, m)), b.replace(dim, Interval._raw(m, iv.hi))
