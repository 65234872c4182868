"""Interval branch-and-prune with HC4 (forward-backward) contraction.

Constraints are compiled once into flat postfix programs over node slots.
A revise step evaluates the program forward over the current box,
intersects the root with the constraint range, and projects the result
back onto the children of every node down to the variable leaves.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._jit import jit
from .interval import (
    Box,
    Interval,
    _add,
    _div,
    _mul,
    _pow,
    _pow_inverse,
    _sub,
    iv_add,
    iv_div,
    iv_mul,
    iv_neg,
    iv_pow,
    iv_sub,
)
from .problems import Add, Const, Constraint, Div, Expression, Mul, Neg, Pow, Problem, Sub, Var

_VAR, _CONST, _ADD, _SUB, _MUL, _DIV, _NEG, _POW = range(8)
INF = math.inf


class BudgetExceeded(RuntimeError):
    """Raised when a solve pops more than ``max_boxes`` boxes.

    ``solutions`` and ``stats`` hold the partial results found so far.
    """

    def __init__(self, message, solutions=None, stats=None):
        super().__init__(message)
        self.solutions = solutions
        self.stats = stats


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 1e-4
    max_boxes: int = 5_000_000
    contraction_rounds: int = 10
    # a round that shrinks no dimension by more than this fraction ends contraction
    min_shrink: float = 0.01
    # equality ranges [c, c] are widened to [c - delta, c + delta]
    equality_delta: float = 0.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_boxes <= 0:
            raise ValueError("max_boxes must be positive")
        if self.contraction_rounds < 1:
            raise ValueError("contraction_rounds must be >= 1")
        if not 0 <= self.min_shrink < 1:
            raise ValueError("min_shrink must be in [0, 1)")
        if not self.equality_delta >= 0:
            raise ValueError("equality_delta must be non-negative")


@dataclass
class SolveStats:
    boxes_processed: int = 0
    boxes_rejected: int = 0
    solution_boxes: int = 0
    wall_time: float = 0.0

    def merge(self, other: "SolveStats") -> "SolveStats":
        return SolveStats(
            self.boxes_processed + other.boxes_processed,
            self.boxes_rejected + other.boxes_rejected,
            self.solution_boxes + other.solution_boxes,
            self.wall_time + other.wall_time,
        )


@dataclass(frozen=True)
class Provenance:
    representative: Optional[int] = None
    shift: int = 0


@dataclass
class SolutionSet:
    boxes: List[Tuple[Box, Provenance]] = field(default_factory=list)

    def __len__(self):
        return len(self.boxes)

    def __iter__(self):
        return iter(self.boxes)

    def just_boxes(self) -> List[Box]:
        return [b for b, _ in self.boxes]

    def centers(self) -> List[Tuple[float, ...]]:
        return [b.center() for b, _ in self.boxes]


# ---------------------------------------------------------------------------
# natural interval extension
# ---------------------------------------------------------------------------


def eval_expr(e: Expression, b: Box) -> Interval:
    """Enclosure of ``e`` over ``b`` by interval evaluation of the tree."""
    if isinstance(e, Var):
        return b[e.index]
    if isinstance(e, Const):
        return Interval(e.value)
    if isinstance(e, Add):
        return iv_add(eval_expr(e.left, b), eval_expr(e.right, b))
    if isinstance(e, Sub):
        return iv_sub(eval_expr(e.left, b), eval_expr(e.right, b))
    if isinstance(e, Mul):
        return iv_mul(eval_expr(e.left, b), eval_expr(e.right, b))
    if isinstance(e, Div):
        return iv_div(eval_expr(e.left, b), eval_expr(e.right, b))
    if isinstance(e, Neg):
        return iv_neg(eval_expr(e.arg, b))
    if isinstance(e, Pow):
        return iv_pow(eval_expr(e.arg, b), e.exponent)
    raise TypeError(f"unsupported expression node {type(e).__name__}")


# ---------------------------------------------------------------------------
# compiled HC4
# ---------------------------------------------------------------------------


class CompiledProblem:
    """Constraints flattened into postfix programs stored in parallel arrays.

    Node ``k`` has opcode ``code[k]`` and operands ``arg_a[k]``/``arg_b[k]``
    (child node indices, a variable index, or a natural exponent); constant
    values live in ``consts``. Constraint ``c`` spans nodes
    ``starts[c]:ends[c]`` and its root is the last of them.
    """

    def __init__(self, constraints: Sequence[Constraint], equality_delta: float = 0.0):
        code, arg_a, arg_b, consts = [], [], [], []
        starts, ends, rlo, rhi = [], [], [], []

        def emit(e: Expression) -> int:
            if isinstance(e, Var):
                row = (_VAR, e.index, 0, 0.0)
            elif isinstance(e, Const):
                row = (_CONST, 0, 0, float(e.value))
            elif isinstance(e, Neg):
                row = (_NEG, emit(e.arg), 0, 0.0)
            elif isinstance(e, Pow):
                row = (_POW, emit(e.arg), int(e.exponent), 0.0)
            else:
                op = {Add: _ADD, Sub: _SUB, Mul: _MUL, Div: _DIV}[type(e)]
                a = emit(e.left)
                row = (op, a, emit(e.right), 0.0)
            code.append(row[0])
            arg_a.append(row[1])
            arg_b.append(row[2])
            consts.append(row[3])
            return len(code) - 1

        for c in constraints:
            starts.append(len(code))
            emit(c.expr)
            ends.append(len(code))
            lo, hi = c.range.lo, c.range.hi
            if lo == hi and equality_delta > 0:
                lo, hi = lo - equality_delta, hi + equality_delta
            rlo.append(lo)
            rhi.append(hi)

        self.code = np.array(code, dtype=np.int64)
        self.arg_a = np.array(arg_a, dtype=np.int64)
        self.arg_b = np.array(arg_b, dtype=np.int64)
        self.consts = np.array(consts, dtype=np.float64)
        self.starts = np.array(starts, dtype=np.int64)
        self.ends = np.array(ends, dtype=np.int64)
        self.rlo = np.array(rlo, dtype=np.float64)
        self.rhi = np.array(rhi, dtype=np.float64)

    def arrays(self):
        return (self.code, self.arg_a, self.arg_b, self.consts,
                self.starts, self.ends, self.rlo, self.rhi)


@jit
def _revise(code, arg_a, arg_b, consts, s, e, rlo, rhi, blo, bhi, lo, hi):
    """One forward-backward pass of the constraint spanning nodes s:e.

    Tightens ``blo``/``bhi`` in place; returns False when infeasible.
    """
    for k in range(s, e):
        op = code[k]
        a = arg_a[k]
        b = arg_b[k]
        if op == _VAR:
            lo[k] = blo[a]
            hi[k] = bhi[a]
        elif op == _MUL:
            lo[k], hi[k] = _mul(lo[a], hi[a], lo[b], hi[b])
        elif op == _ADD:
            lo[k], hi[k] = _add(lo[a], hi[a], lo[b], hi[b])
        elif op == _SUB:
            lo[k], hi[k] = _sub(lo[a], hi[a], lo[b], hi[b])
        elif op == _CONST:
            lo[k] = consts[k]
            hi[k] = consts[k]
        elif op == _NEG:
            lo[k] = -hi[a]
            hi[k] = -lo[a]
        elif op == _POW:
            lo[k], hi[k] = _pow(lo[a], hi[a], b)
        else:
            if lo[b] <= 0.0 <= hi[b]:
                lo[k] = -INF
                hi[k] = INF
            else:
                lo[k], hi[k] = _div(lo[a], hi[a], lo[b], hi[b])

    r = e - 1
    if rlo > lo[r]:
        lo[r] = rlo
    if rhi < hi[r]:
        hi[r] = rhi
    if lo[r] > hi[r]:
        return False

    for k in range(r, s - 1, -1):
        op = code[k]
        a = arg_a[k]
        b = arg_b[k]
        zl = lo[k]
        zh = hi[k]
        if op == _VAR:
            if zl > blo[a]:
                blo[a] = zl
            if zh < bhi[a]:
                bhi[a] = zh
            if blo[a] > bhi[a]:
                return False
            continue
        if op == _CONST:
            if not zl <= consts[k] <= zh:
                return False
            continue
        # candidate projections onto the children; no projection leaves them as is
        al = lo[a]
        ah = hi[a]
        bl = bh = 0.0
        if op != _NEG and op != _POW:
            bl = lo[b]
            bh = hi[b]
        if op == _MUL:
            if bl > 0.0 or bh < 0.0:
                ql, qh = _div(zl, zh, bl, bh)
                al = max(al, ql)
                ah = min(ah, qh)
                if al > ah:
                    return False
            if al > 0.0 or ah < 0.0:
                ql, qh = _div(zl, zh, al, ah)
                bl = max(bl, ql)
                bh = min(bh, qh)
        elif op == _ADD:
            ql, qh = _sub(zl, zh, bl, bh)
            al = max(al, ql)
            ah = min(ah, qh)
            if al > ah:
                return False
            ql, qh = _sub(zl, zh, al, ah)
            bl = max(bl, ql)
            bh = min(bh, qh)
        elif op == _SUB:
            ql, qh = _add(zl, zh, bl, bh)
            al = max(al, ql)
            ah = min(ah, qh)
            if al > ah:
                return False
            ql, qh = _sub(al, ah, zl, zh)
            bl = max(bl, ql)
            bh = min(bh, qh)
        elif op == _NEG:
            al = max(al, -zh)
            ah = min(ah, -zl)
        elif op == _POW:
            al, ah = _pow_inverse(zl, zh, al, ah, b)
        else:
            # z = x / y: x in z*y; y in x/z when z excludes zero
            ql, qh = _mul(zl, zh, bl, bh)
            al = max(al, ql)
            ah = min(ah, qh)
            if al > ah:
                return False
            if zl > 0.0 or zh < 0.0:
                ql, qh = _div(al, ah, zl, zh)
                bl = max(bl, ql)
                bh = min(bh, qh)
        if al > ah:
            return False
        lo[a] = al
        hi[a] = ah
        if op != _NEG and op != _POW:
            if bl > bh:
                return False
            lo[b] = bl
            hi[b] = bh
    return True


@jit
def _contract_kernel(code, arg_a, arg_b, consts, starts, ends, rlo, rhi,
                     blo, bhi, lo, hi, rounds, min_shrink):
    n = blo.shape[0]
    before = np.empty(n)
    for _ in range(rounds):
        for i in range(n):
            before[i] = bhi[i] - blo[i]
        for c in range(starts.shape[0]):
            if not _revise(code, arg_a, arg_b, consts, starts[c], ends[c],
                           rlo[c], rhi[c], blo, bhi, lo, hi):
                return False
        progress = False
        for i in range(n):
            w = before[i]
            if w > 0 and (w - (bhi[i] - blo[i])) > min_shrink * w:
                progress = True
                break
        if not progress:
            break
    return True


@jit
def _midpoint(lo, hi):
    if lo == -INF or hi == INF:
        if lo == -INF and hi == INF:
            return 0.0
        if lo == -INF:
            return -1.0 if hi > 0.0 else hi - 1.0 - abs(hi)
        return 1.0 if lo < 0.0 else lo + 1.0 + abs(lo)
    return lo + 0.5 * (hi - lo)


@jit
def _bnp_kernel(code, arg_a, arg_b, consts, starts, ends, rlo, rhi,
                blo0, bhi0, eps, rounds, min_shrink, max_boxes):
    """Depth-first branch and prune; returns accepted boxes and counters."""
    n = blo0.shape[0]
    lo = np.empty(code.shape[0])
    hi = np.empty(code.shape[0])
    cap = 64
    st_lo = np.empty((cap, n))
    st_hi = np.empty((cap, n))
    top = 0
    st_lo[0, :] = blo0
    st_hi[0, :] = bhi0
    top = 1
    scap = 64
    sol_lo = np.empty((scap, n))
    sol_hi = np.empty((scap, n))
    nsol = 0
    processed = 0
    rejected = 0
    exceeded = False
    while top > 0:
        if processed >= max_boxes:
            exceeded = True
            break
        top -= 1
        blo = st_lo[top].copy()
        bhi = st_hi[top].copy()
        processed += 1
        if not _contract_kernel(code, arg_a, arg_b, consts, starts, ends, rlo, rhi,
                                blo, bhi, lo, hi, rounds, min_shrink):
            rejected += 1
            continue
        widest = 0
        wmax = -1.0
        for i in range(n):
            w = bhi[i] - blo[i]
            if w > wmax:
                wmax = w
                widest = i
        mid = _midpoint(blo[widest], bhi[widest])
        if wmax <= eps or not (blo[widest] < mid < bhi[widest]):
            # accepted, or no representable split point is left
            if nsol == scap:
                scap *= 2
                grown_lo = np.empty((scap, n))
                grown_hi = np.empty((scap, n))
                grown_lo[:nsol] = sol_lo[:nsol]
                grown_hi[:nsol] = sol_hi[:nsol]
                sol_lo = grown_lo
                sol_hi = grown_hi
            sol_lo[nsol, :] = blo
            sol_hi[nsol, :] = bhi
            nsol += 1
            continue
        if top + 2 > cap:
            cap *= 2
            grown_lo = np.empty((cap, n))
            grown_hi = np.empty((cap, n))
            grown_lo[:top] = st_lo[:top]
            grown_hi[:top] = st_hi[:top]
            st_lo = grown_lo
            st_hi = grown_hi
        # right child below left child so the left one is popped first
        st_lo[top, :] = blo
        st_hi[top, :] = bhi
        st_lo[top, widest] = mid
        st_lo[top + 1, :] = blo
        st_hi[top + 1, :] = bhi
        st_hi[top + 1, widest] = mid
        top += 2
    return sol_lo[:nsol].copy(), sol_hi[:nsol].copy(), processed, rejected, exceeded


def compile_problem(problem_or_constraints, equality_delta: float = 0.0) -> CompiledProblem:
    cs = getattr(problem_or_constraints, "constraints", problem_or_constraints)
    return CompiledProblem(cs, equality_delta)


def contract(b: Box, cs, rounds: int = 10, min_shrink: float = 0.01) -> Optional[Box]:
    """HC4 contraction of ``b``; ``None`` when the constraints are infeasible on it.

    ``cs`` is a sequence of constraints or a :class:`CompiledProblem`.
    """
    compiled = cs if isinstance(cs, CompiledProblem) else CompiledProblem(cs)
    blo = np.array([d.lo for d in b], dtype=np.float64)
    bhi = np.array([d.hi for d in b], dtype=np.float64)
    work = np.empty(max(len(compiled.code), 1))
    work2 = np.empty_like(work)
    if not _contract_kernel(*compiled.arrays(), blo, bhi, work, work2, rounds, min_shrink):
        return None
    return Box.from_bounds(blo.tolist(), bhi.tolist())


# ---------------------------------------------------------------------------
# branch and prune
# ---------------------------------------------------------------------------


def branch_and_prune(problem: Problem, b0: Optional[Box] = None,
                     cfg: Optional[SolverConfig] = None,
                     compiled: Optional[CompiledProblem] = None):
    """Depth-first branch and prune over ``b0`` (default: the initial box).

    Each popped box is contracted; empty boxes are rejected, boxes with all
    widths <= epsilon are accepted, others are split at the midpoint of
    their widest dimension (lowest index on ties). Returns
    ``(SolutionSet, SolveStats)``; raises :class:`BudgetExceeded` with the
    partial results once ``max_boxes`` boxes have been popped and work remains.
    """
    cfg = cfg or SolverConfig()
    if b0 is None:
        b0 = problem.initial_box
    if len(b0) != problem.n_vars:
        raise ValueError(f"box has {len(b0)} dimensions, problem has {problem.n_vars}")
    if compiled is None:
        compiled = CompiledProblem(problem.constraints, cfg.equality_delta)
    blo0 = np.array([d.lo for d in b0], dtype=np.float64)
    bhi0 = np.array([d.hi for d in b0], dtype=np.float64)
    start = time.perf_counter()
    sol_lo, sol_hi, processed, rejected, exceeded = _bnp_kernel(
        *compiled.arrays(), blo0, bhi0, float(cfg.epsilon), int(cfg.contraction_rounds),
        float(cfg.min_shrink), int(cfg.max_boxes),
    )
    stats = SolveStats(int(processed), int(rejected), len(sol_lo), time.perf_counter() - start)
    found = _to_solution_set(zip(sol_lo.tolist(), sol_hi.tolist()))
    if exceeded:
        raise BudgetExceeded(f"more than {cfg.max_boxes} boxes processed", found, stats)
    return found, stats


def _to_solution_set(found) -> SolutionSet:
    return SolutionSet([(Box.from_bounds(lo, hi), Provenance()) for lo, hi in found])


# ---------------------------------------------------------------------------
# post-processing helpers
# ---------------------------------------------------------------------------


def cluster_boxes(boxes: Sequence[Box], gap: float) -> List[List[int]]:
    """Group boxes whose hulls come within ``gap`` of each other (union-find)."""
    parent = list(range(len(boxes)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    los = [b.lo for b in boxes]
    his = [b.hi for b in boxes]
    order = sorted(range(len(boxes)), key=lambda i: los[i][0])
    # sweep on the first coordinate
    active: List[int] = []
    for i in order:
        active = [j for j in active if his[j][0] + gap >= los[i][0]]
        for j in active:
            if all(los[i][d] <= his[j][d] + gap and los[j][d] <= his[i][d] + gap
                   for d in range(len(los[i]))):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
        active.append(i)
    groups = {}
    for i in range(len(boxes)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: min(g))


def refine_point(problem: Problem, x: Sequence[float], iterations: int = 1) -> Tuple[float, ...]:
    """Gauss-Newton steps on the equality residuals ``f_i(x) - c_i``."""
    x = np.array(x, dtype=float)
    n = len(x)
    for _ in range(iterations):
        rows, rhs = [], []
        for c in problem.constraints:
            v, g = c.expr.gradient(x)
            target = min(max(v, c.range.lo), c.range.hi)
            row = np.zeros(n)
            for k, d in g.items():
                row[k] = d
            rows.append(row)
            rhs.append(target - v)
        J = np.array(rows)
        step, *_ = np.linalg.lstsq(J, np.array(rhs), rcond=None)
        x = x + step
    return tuple(float(v) for v in x)


def max_residual(problem: Problem, x: Sequence[float]) -> float:
    return max(c.residual(x) for c in problem.constraints)
