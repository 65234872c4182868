"""Problem model, expression trees, problem-file parser and benchmark generators.

Problem files are line-oriented UTF-8 text; ``#`` starts a comment::

    var x1 in [-1, 1]
    var x2 in [-1, 1]
    var x3 in [-1, 1]
    cycle (x1 x2 x3)
    sigma (1 -> 1, 2 -> 3, 3 -> 4, 4 -> 2)
    constraint x1^2 + x2^2 + x3^2 in [5, 5]
    constraint 2*x1 - x2 in [0, inf]

Variable order defines the index. ``sigma`` uses 1-based constraint indices.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .interval import Box, Interval
from .symmetry import ConstraintPermutation, CycleSymmetry, verify_symmetry

# ---------------------------------------------------------------------------
# expressions
# ---------------------------------------------------------------------------


class Expression:
    """Base class of expression tree nodes."""

    __slots__ = ()
    precedence = 100

    def evaluate(self, x: Sequence[float]) -> float:
        raise NotImplementedError

    def gradient(self, x: Sequence[float]) -> Tuple[float, Dict[int, float]]:
        """Value and sparse gradient at a point (forward mode)."""
        raise NotImplementedError

    def variables(self) -> set:
        raise NotImplementedError

    def __add__(self, other):
        return Add(self, _wrap(other))

    def __radd__(self, other):
        return Add(_wrap(other), self)

    def __sub__(self, other):
        return Sub(self, _wrap(other))

    def __rsub__(self, other):
        return Sub(_wrap(other), self)

    def __mul__(self, other):
        return Mul(self, _wrap(other))

    def __rmul__(self, other):
        return Mul(_wrap(other), self)

    def __truediv__(self, other):
        return Div(self, _wrap(other))

    def __neg__(self):
        return Neg(self)

    def __pow__(self, n):
        return Pow(self, n)


def _wrap(x) -> Expression:
    return x if isinstance(x, Expression) else Const(float(x))


def _format_number(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


@dataclass(frozen=True, eq=True)
class Var(Expression):
    index: int
    name: Optional[str] = field(default=None, compare=False)

    def evaluate(self, x):
        return x[self.index]

    def gradient(self, x):
        return x[self.index], {self.index: 1.0}

    def variables(self):
        return {self.index}

    def to_text(self, names=None):
        if names is not None:
            return names[self.index]
        return self.name or f"x{self.index + 1}"


@dataclass(frozen=True, eq=True)
class Const(Expression):
    value: float

    def evaluate(self, x):
        return self.value

    def gradient(self, x):
        return self.value, {}

    def variables(self):
        return set()

    def to_text(self, names=None):
        s = _format_number(self.value)
        return f"({s})" if self.value < 0 else s


@dataclass(frozen=True, eq=True)
class Neg(Expression):
    arg: Expression
    precedence = 3

    def evaluate(self, x):
        return -self.arg.evaluate(x)

    def gradient(self, x):
        v, g = self.arg.gradient(x)
        return -v, {k: -d for k, d in g.items()}

    def variables(self):
        return self.arg.variables()

    def to_text(self, names=None):
        return "-" + _paren(self.arg, self.precedence, names, strict=True)


@dataclass(frozen=True, eq=True)
class Pow(Expression):
    arg: Expression
    exponent: int
    precedence = 4

    def __post_init__(self):
        if int(self.exponent) != self.exponent or self.exponent < 1:
            raise ValueError(f"exponent must be a natural number >= 1, got {self.exponent}")

    def evaluate(self, x):
        return self.arg.evaluate(x) ** self.exponent

    def gradient(self, x):
        v, g = self.arg.gradient(x)
        n = self.exponent
        d = n * v ** (n - 1)
        return v**n, {k: d * gk for k, gk in g.items()}

    def variables(self):
        return self.arg.variables()

    def to_text(self, names=None):
        return _paren(self.arg, self.precedence, names, strict=True) + f"^{self.exponent}"


@dataclass(frozen=True, eq=True)
class _Binary(Expression):
    left: Expression
    right: Expression
    symbol = "?"

    def variables(self):
        return self.left.variables() | self.right.variables()

    def to_text(self, names=None):
        lhs = _paren(self.left, self.precedence, names, strict=False)
        rhs = _paren(self.right, self.precedence, names, strict=True)
        return f"{lhs} {self.symbol} {rhs}"


class Add(_Binary):
    symbol = "+"
    precedence = 1

    def evaluate(self, x):
        return self.left.evaluate(x) + self.right.evaluate(x)

    def gradient(self, x):
        a, ga = self.left.gradient(x)
        b, gb = self.right.gradient(x)
        g = dict(ga)
        for k, d in gb.items():
            g[k] = g.get(k, 0.0) + d
        return a + b, g


class Sub(_Binary):
    symbol = "-"
    precedence = 1

    def evaluate(self, x):
        return self.left.evaluate(x) - self.right.evaluate(x)

    def gradient(self, x):
        a, ga = self.left.gradient(x)
        b, gb = self.right.gradient(x)
        g = dict(ga)
        for k, d in gb.items():
            g[k] = g.get(k, 0.0) - d
        return a - b, g


class Mul(_Binary):
    symbol = "*"
    precedence = 2

    def evaluate(self, x):
        return self.left.evaluate(x) * self.right.evaluate(x)

    def gradient(self, x):
        a, ga = self.left.gradient(x)
        b, gb = self.right.gradient(x)
        g = {k: d * b for k, d in ga.items()}
        for k, d in gb.items():
            g[k] = g.get(k, 0.0) + a * d
        return a * b, g


class Div(_Binary):
    symbol = "/"
    precedence = 2

    def evaluate(self, x):
        return self.left.evaluate(x) / self.right.evaluate(x)

    def gradient(self, x):
        a, ga = self.left.gradient(x)
        b, gb = self.right.gradient(x)
        g = {k: d / b for k, d in ga.items()}
        for k, d in gb.items():
            g[k] = g.get(k, 0.0) - a * d / (b * b)
        return a / b, g


def _paren(e: Expression, outer: int, names, strict: bool) -> str:
    text = e.to_text(names)
    if e.precedence < outer or (strict and e.precedence == outer):
        return f"({text})"
    return text


def add_all(terms: Sequence[Expression]) -> Expression:
    """Left-deep sum of ``terms``."""
    it = iter(terms)
    acc = next(it)
    for t in it:
        acc = Add(acc, t)
    return acc


def mul_all(terms: Sequence[Expression]) -> Expression:
    """Left-deep product of ``terms``."""
    it = iter(terms)
    acc = next(it)
    for t in it:
        acc = Mul(acc, t)
    return acc


# ---------------------------------------------------------------------------
# constraints and problems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Constraint:
    """``expr(x) in range``; endpoints of ``range`` may be infinite."""

    expr: Expression
    range: Interval

    def satisfied_at(self, x: Sequence[float], tol: float = 0.0) -> bool:
        v = self.expr.evaluate(x)
        return self.range.lo - tol <= v <= self.range.hi + tol

    def residual(self, x: Sequence[float]) -> float:
        """Distance of ``expr(x)`` from the range (0 inside)."""
        v = self.expr.evaluate(x)
        if v < self.range.lo:
            return self.range.lo - v
        if v > self.range.hi:
            return v - self.range.hi
        return 0.0


@dataclass(frozen=True)
class Problem:
    var_names: Tuple[str, ...]
    initial_box: Box
    constraints: Tuple[Constraint, ...]
    symmetry: Optional[CycleSymmetry] = None
    sigma: Optional[ConstraintPermutation] = None

    def __post_init__(self):
        n = len(self.var_names)
        if len(self.initial_box) != n:
            raise ValueError("initial box and variable list differ in length")
        for c in self.constraints:
            if any(i >= n for i in c.expr.variables()):
                raise ValueError("constraint references an unknown variable index")
        if self.symmetry is not None and self.symmetry.n_vars != n:
            raise ValueError("symmetry acts on the wrong number of variables")
        if self.sigma is not None and len(self.sigma) != len(self.constraints):
            raise ValueError("sigma size differs from the constraint count")

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    def with_box(self, box: Box) -> "Problem":
        return Problem(self.var_names, box, self.constraints, self.symmetry, self.sigma)

    def residuals(self, x: Sequence[float]) -> List[float]:
        return [c.residual(x) for c in self.constraints]


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class ProblemParseError(ValueError):
    """Base class for problem-file errors; carries 1-based line/column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}" if line else message)


class ProblemSyntaxError(ProblemParseError):
    pass


class UnknownVariable(ProblemParseError):
    pass


class BadInterval(ProblemParseError):
    pass


class DuplicateVariable(ProblemParseError):
    pass


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>->|[-+*/^(),\[\]]))"
)
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*$")
_KEYWORDS = {"var", "in", "cycle", "sigma", "constraint", "inf"}


class _Tokens:
    def __init__(self, text: str, lineno: int, offset: int):
        self.toks: List[Tuple[str, str, int]] = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                col = offset + pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
                raise ProblemSyntaxError(f"unexpected character {text[pos:].lstrip()[:1]!r}",
                                         lineno, col)
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind), offset + m.start(kind) + 1))
            pos = m.end()
        self.i = 0
        self.lineno = lineno
        self.end_col = offset + len(text) + 1

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, self.end_col)

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, col = self.next()
        if val != value:
            found = "end of line" if val is None else repr(val)
            raise ProblemSyntaxError(f"expected {value!r}, found {found}", self.lineno, col)
        return col

    def at_end(self) -> bool:
        return self.i >= len(self.toks)

    def error(self, message: str):
        _, _, col = self.peek()
        return ProblemSyntaxError(message, self.lineno, col)


def _parse_number(toks: _Tokens, allow_inf: bool = True) -> float:
    sign = 1.0
    kind, val, col = toks.peek()
    if val in ("-", "+"):
        toks.next()
        sign = -1.0 if val == "-" else 1.0
        kind, val, col = toks.peek()
    if kind == "num":
        toks.next()
        return sign * float(val)
    if allow_inf and val == "inf":
        toks.next()
        return sign * math.inf
    raise toks.error("expected a number")


def _parse_interval(toks: _Tokens) -> Interval:
    col = toks.expect("[")
    lo = _parse_number(toks)
    toks.expect(",")
    hi = _parse_number(toks)
    toks.expect("]")
    if math.isnan(lo) or math.isnan(hi) or lo > hi:
        raise BadInterval(f"interval [{lo}, {hi}] has lo > hi", toks.lineno, col)
    return Interval(lo, hi)


class _ExprParser:
    """Recursive descent: sum := term (('+'|'-') term)*, term := unary (('*'|'/') unary)*,
    unary := '-' unary | power, power := atom ('^' natural)?"""

    def __init__(self, toks: _Tokens, index: Dict[str, int]):
        self.toks = toks
        self.index = index

    def parse_sum(self) -> Expression:
        e = self.parse_term()
        while self.toks.peek()[1] in ("+", "-"):
            op = self.toks.next()[1]
            rhs = self.parse_term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def parse_term(self) -> Expression:
        e = self.parse_unary()
        while self.toks.peek()[1] in ("*", "/"):
            op = self.toks.next()[1]
            rhs = self.parse_unary()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def parse_unary(self) -> Expression:
        if self.toks.peek()[1] == "-":
            self.toks.next()
            operand = self.parse_unary()
            if isinstance(operand, Const):
                return Const(-operand.value)
            return Neg(operand)
        if self.toks.peek()[1] == "+":
            self.toks.next()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self) -> Expression:
        base = self.parse_atom()
        if self.toks.peek()[1] == "^":
            self.toks.next()
            kind, val, col = self.toks.next()
            if kind != "num" or not re.fullmatch(r"\d+", val) or int(val) < 1:
                raise ProblemSyntaxError("exponent must be a natural number >= 1",
                                         self.toks.lineno, col)
            base = Pow(base, int(val))
            if self.toks.peek()[1] == "^":
                raise self.toks.error("chained exponents are not supported")
        return base

    def parse_atom(self) -> Expression:
        kind, val, col = self.toks.next()
        if kind == "num":
            return Const(float(val))
        if kind == "name":
            if val == "inf" or val in _KEYWORDS:
                raise ProblemSyntaxError(f"unexpected keyword {val!r}", self.toks.lineno, col)
            if val not in self.index:
                raise UnknownVariable(f"unknown variable {val!r}", self.toks.lineno, col)
            return Var(self.index[val], val)
        if val == "(":
            e = self.parse_sum()
            self.toks.expect(")")
            return e
        found = "end of line" if val is None else repr(val)
        raise ProblemSyntaxError(f"expected an expression, found {found}", self.toks.lineno, col)


def parse_problem(text: str) -> Problem:
    names: List[str] = []
    index: Dict[str, int] = {}
    bounds: List[Interval] = []
    constraints: List[Constraint] = []
    cycle_names: Optional[List[Tuple[str, int, int]]] = None
    sigma_pairs: Optional[List[Tuple[int, int, int, int]]] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        stripped = line.lstrip()
        if not stripped.strip():
            continue
        offset = len(line) - len(stripped)
        keyword = stripped.split(None, 1)[0]
        body_offset = offset + len(keyword)
        toks = _Tokens(stripped[len(keyword):], lineno, body_offset)

        if keyword == "var":
            kind, name, col = toks.next()
            if kind != "name" or name in _KEYWORDS:
                raise ProblemSyntaxError("expected a variable name", lineno, col)
            if name in index:
                raise DuplicateVariable(f"variable {name!r} declared twice", lineno, col)
            toks.expect("in")
            iv = _parse_interval(toks)
            if not toks.at_end():
                raise toks.error("trailing input")
            index[name] = len(names)
            names.append(name)
            bounds.append(iv)
        elif keyword == "cycle":
            if cycle_names is not None:
                raise ProblemSyntaxError("cycle declared twice", lineno, offset + 1)
            toks.expect("(")
            cycle_names = []
            while toks.peek()[1] != ")":
                kind, name, col = toks.next()
                if kind != "name":
                    raise ProblemSyntaxError("expected a variable name in cycle", lineno, col)
                cycle_names.append((name, lineno, col))
            toks.expect(")")
            if not toks.at_end():
                raise toks.error("trailing input")
            if len(cycle_names) < 2:
                raise ProblemSyntaxError("cycle needs at least two variables", lineno, offset + 1)
        elif keyword == "sigma":
            if sigma_pairs is not None:
                raise ProblemSyntaxError("sigma declared twice", lineno, offset + 1)
            toks.expect("(")
            sigma_pairs = []
            while True:
                kind, a, col = toks.next()
                if kind != "num" or not a.isdigit():
                    raise ProblemSyntaxError("expected a constraint index", lineno, col)
                toks.expect("->")
                kind, b, col2 = toks.next()
                if kind != "num" or not b.isdigit():
                    raise ProblemSyntaxError("expected a constraint index", lineno, col2)
                sigma_pairs.append((int(a), int(b), lineno, col))
                if toks.peek()[1] == ",":
                    toks.next()
                    continue
                break
            toks.expect(")")
            if not toks.at_end():
                raise toks.error("trailing input")
        elif keyword == "constraint":
            expr = _ExprParser(toks, index).parse_sum()
            toks.expect("in")
            iv = _parse_interval(toks)
            if not toks.at_end():
                raise toks.error("trailing input")
            constraints.append(Constraint(expr, iv))
        else:
            raise ProblemSyntaxError(f"unknown statement {keyword!r}", lineno, offset + 1)

    symmetry = None
    if cycle_names is not None:
        cyc = []
        for name, ln, col in cycle_names:
            if name not in index:
                raise UnknownVariable(f"unknown variable {name!r}", ln, col)
            cyc.append(index[name])
        if len(set(cyc)) != len(cyc):
            raise ProblemSyntaxError("cycle repeats a variable", cycle_names[0][1], 1)
        symmetry = CycleSymmetry(len(names), tuple(cyc))

    sigma = None
    if sigma_pairs is not None:
        m = len(constraints)
        mapping: Dict[int, int] = {}
        for a, b, ln, col in sigma_pairs:
            if not (1 <= a <= m and 1 <= b <= m):
                raise ProblemSyntaxError(f"sigma index out of range 1..{m}", ln, col)
            if a in mapping:
                raise ProblemSyntaxError(f"sigma maps {a} twice", ln, col)
            mapping[a] = b
        if sorted(mapping) != list(range(1, m + 1)) or sorted(mapping.values()) != list(range(1, m + 1)):
            ln = sigma_pairs[0][2]
            raise ProblemSyntaxError("sigma must be a bijection on all constraints", ln, 1)
        sigma = ConstraintPermutation(tuple(mapping[i + 1] - 1 for i in range(m)))

    return Problem(tuple(names), Box(bounds), tuple(constraints), symmetry, sigma)


def emit_problem(p: Problem) -> str:
    """Render ``p`` in the problem-file grammar; ``parse_problem`` inverts it."""
    lines = []
    for name, iv in zip(p.var_names, p.initial_box):
        lines.append(f"var {name} in [{_format_number(iv.lo)}, {_format_number(iv.hi)}]")
    if p.symmetry is not None:
        lines.append("cycle (" + " ".join(p.var_names[i] for i in p.symmetry.cycle) + ")")
    if p.sigma is not None:
        pairs = ", ".join(f"{i + 1} -> {j + 1}" for i, j in enumerate(p.sigma.sigma))
        lines.append(f"sigma ({pairs})")
    for c in p.constraints:
        text = c.expr.to_text(p.var_names)
        lines.append(f"constraint {text} in [{_format_number(c.range.lo)}, {_format_number(c.range.hi)}]")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def cyclic_n_roots(n: int, domain: Optional[Tuple[float, float]] = None) -> Problem:
    """The cyclic n-roots system.

    For d = 1..n-1 the cyclic sum of all products of d consecutive variables
    vanishes, and the product of all variables equals one. The default domain
    is [-10, 10]^n, or [-5, 5]^8 for n = 8.
    """
    if n < 2:
        raise ValueError("cyclic n-roots needs n >= 2")
    if domain is None:
        domain = (-5.0, 5.0) if n == 8 else (-10.0, 10.0)
    names = tuple(f"x{i + 1}" for i in range(n))
    xs = [Var(i, names[i]) for i in range(n)]
    zero = Interval(0.0, 0.0)
    constraints = []
    for d in range(1, n):
        terms = [mul_all([xs[(i + j) % n] for j in range(d)]) for i in range(n)]
        constraints.append(Constraint(add_all(terms), zero))
    constraints.append(Constraint(Sub(mul_all(xs), Const(1.0)), zero))
    return Problem(
        names,
        Box.cube(domain[0], domain[1], n),
        tuple(constraints),
        CycleSymmetry.full(n),
        ConstraintPermutation.identity(n),
    )


SPHERE_EXAMPLE = """\
var x1 in [-1, 1]
var x2 in [-1, 1]
var x3 in [-1, 1]
cycle (x1 x2 x3)
sigma (1 -> 1, 2 -> 3, 3 -> 4, 4 -> 2)
constraint x1^2 + x2^2 + x3^2 in [5, 5]
constraint 2*x1 - x2 in [0, inf]
constraint 2*x2 - x3 in [0, inf]
constraint 2*x3 - x1 in [0, inf]
"""


def example_sphere() -> Problem:
    """Three variables on [-1, 1]^3, a sphere of squared radius 5 and three
    cyclically permuted half-space constraints. Has no solution."""
    return parse_problem(SPHERE_EXAMPLE)


def check_problem_symmetry(p: Problem, n_samples: int = 100) -> bool:
    """True when ``p`` has no declared symmetry/sigma pair or it verifies."""
    if p.symmetry is None or p.sigma is None:
        return True
    return verify_symmetry(p, p.symmetry, p.sigma, n_samples)
