"""Solve only one subbox per symmetry class and rebuild the rest by symmetry.

The cycle dimensions of the initial box are bisected at one shared point,
giving 2^k subboxes coded as k-bit strings. Subboxes that are circular
shifts of each other hold symmetric solution sets, so the solver runs on
one representative per class and every solution box it returns is copied
into the other members of the class by permuting its intervals.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from . import codes
from .codes import ClassCode, code_to_binary
from .interval import Box, Interval
from .problems import Problem
from .solver import (
    BudgetExceeded,
    CompiledProblem,
    Provenance,
    SolutionSet,
    SolverConfig,
    SolveStats,
    branch_and_prune,
)
from .symmetry import CycleSymmetry, apply_box, box_period


class NotACube(ValueError):
    """The cycle dimensions of the box do not share one interval."""


class OutOfRange(ValueError):
    """A bisection point is not strictly inside the cube's interval."""


def select_bisection_point(x_l: float, x_h: float, policy: Union[str, float] = "midpoint") -> float:
    if not x_l < x_h:
        raise OutOfRange(f"degenerate interval [{x_l}, {x_h}]")
    if policy == "midpoint":
        x = x_l + 0.5 * (x_h - x_l)
    else:
        x = float(policy)
    if not x_l < x < x_h:
        raise OutOfRange(f"bisection point {x} is not strictly inside ({x_l}, {x_h})")
    return x


def cube_interval(box: Box, sym: CycleSymmetry) -> Interval:
    """The interval shared by all cycle dimensions of ``box``."""
    ivs = {box[i] for i in sym.cycle}
    if len(ivs) != 1:
        raise NotACube("cycle dimensions of the box are not one common interval")
    return box[sym.cycle[0]]


def generate_subbox(code: Union[ClassCode, str], x_l: float, x_h: float, x_star: float,
                    full_box: Box, sym: CycleSymmetry) -> Box:
    """Subbox of ``full_box`` selected by ``code``: cycle position i takes
    ``[x_l, x*]`` for bit 0 and ``[x*, x_h]`` for bit 1."""
    bits = code if isinstance(code, str) else code_to_binary(code)
    if len(bits) != sym.length:
        raise ValueError(f"code has {len(bits)} bits, cycle has length {sym.length}")
    cube = cube_interval(full_box, sym)
    if (cube.lo, cube.hi) != (x_l, x_h):
        raise NotACube(f"cycle dimensions are {cube}, expected [{x_l}, {x_h}]")
    low = Interval(x_l, x_star)
    high = Interval(x_star, x_h)
    dims = list(full_box)
    for bit, var in zip(bits, sym.cycle):
        dims[var] = high if bit == "1" else low
    return Box(dims)


def apply_symmetry(solutions: SolutionSet, sym: CycleSymmetry, times: int) -> SolutionSet:
    return SolutionSet([
        (apply_box(sym, b, times), Provenance(prov.representative, times))
        for b, prov in solutions.boxes
    ])


def process_representative(b: Box, sym: CycleSymmetry, problem: Problem,
                           cfg: Optional[SolverConfig] = None, rep_id: int = 0,
                           compiled: Optional[CompiledProblem] = None,
                           solved: Optional[Tuple[SolutionSet, SolveStats]] = None):
    """Solve ``b`` and copy its solutions into the other boxes of its class.

    Returns ``(total, stats, n_ccs)`` where ``total`` lists the representative's
    own solutions (shift 0) followed by their images under S^1 .. S^(P-1),
    and ``n_ccs`` is the number of solver boxes found in ``b`` itself.
    ``solved`` supplies a precomputed solver result for ``b``.
    """
    if solved is None:
        solved = branch_and_prune(problem, b, cfg, compiled)
    own, stats = solved
    own = SolutionSet([(box, Provenance(rep_id, 0)) for box, _ in own.boxes])
    total = SolutionSet(list(own.boxes))
    for i in range(1, box_period(sym, b)):
        total.boxes.extend(apply_symmetry(own, sym, i).boxes)
    return total, stats, len(own)


@dataclass
class RepresentativeReport:
    code: ClassCode
    period: int
    stats: SolveStats
    n_solutions: int
    n_expanded: int


@dataclass
class CsymReport:
    cycle_length: int
    bisection_point: float
    per_representative: List[RepresentativeReport] = field(default_factory=list)
    totals: SolveStats = field(default_factory=SolveStats)
    wall_time: float = 0.0

    @property
    def representatives_solved(self) -> int:
        return len(self.per_representative)

    @property
    def total_subboxes(self) -> int:
        return 1 << self.cycle_length

    @property
    def fraction_processed(self) -> Fraction:
        return Fraction(self.representatives_solved, self.total_subboxes)

    @property
    def ifdp(self) -> float:
        return codes.ifdp(self.cycle_length)

    @property
    def representative_solutions(self) -> int:
        return sum(r.n_solutions for r in self.per_representative)

    @property
    def total_solutions(self) -> int:
        return sum(r.n_expanded for r in self.per_representative)

    @property
    def expansion_factor(self) -> float:
        rep = self.representative_solutions
        return self.total_solutions / rep if rep else 0.0


def _solve_one(args):
    problem, box, cfg = args
    try:
        return branch_and_prune(problem, box, cfg)
    except BudgetExceeded as exc:
        return exc


def csym1(problem: Problem, cfg: Optional[SolverConfig] = None,
          bisection: Union[str, float] = "midpoint", parallel: int = 1):
    """Solve ``problem`` through its declared cycle symmetry.

    Returns ``(SolutionSet, CsymReport)``. Representatives are visited in
    class-generation order and results are merged in that order, whatever
    ``parallel`` is. ``cfg.max_boxes`` bounds each representative's solve;
    on overflow :class:`BudgetExceeded` carries the solutions found so far
    and, as its ``stats``, the partial :class:`CsymReport`.
    """
    cfg = cfg or SolverConfig()
    sym = problem.symmetry
    if sym is None or sym.length < 2:
        raise ValueError("problem declares no cycle of length >= 2")
    cube = cube_interval(problem.initial_box, sym)
    x_star = select_bisection_point(cube.lo, cube.hi, bisection)
    k = sym.length
    sr = codes.build_sr(k)
    start = time.perf_counter()

    boxes = [generate_subbox(e.code, cube.lo, cube.hi, x_star, problem.initial_box, sym)
             for e in sr.entries]
    compiled = CompiledProblem(problem.constraints, cfg.equality_delta)
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_solve_one, [(problem, b, cfg) for b in boxes]))
    else:
        results = None

    report = CsymReport(k, x_star)
    solutions = SolutionSet()
    for rep_id, (entry, box) in enumerate(zip(sr.entries, boxes)):
        if results is not None:
            res = results[rep_id]
        else:
            try:
                res = branch_and_prune(problem, box, cfg, compiled)
            except BudgetExceeded as exc:
                res = exc
        if isinstance(res, BudgetExceeded):
            partial, _, _ = process_representative(box, sym, problem, rep_id=rep_id,
                                                   solved=(res.solutions, res.stats))
            solutions.boxes.extend(partial.boxes)
            report.totals = report.totals.merge(res.stats)
            report.wall_time = time.perf_counter() - start
            raise BudgetExceeded(
                f"representative {rep_id} ({entry.code.text()}) exceeded the box budget",
                solutions, report,
            )
        total, stats, n_own = process_representative(box, sym, problem, rep_id=rep_id, solved=res)
        solutions.boxes.extend(total.boxes)
        report.per_representative.append(
            RepresentativeReport(entry.code, entry.period, stats, n_own, len(total))
        )
        report.totals = report.totals.merge(stats)
    report.wall_time = time.perf_counter() - start
    return solutions, report


def expanded_subboxes(k: int, x_l: float, x_h: float, x_star: float) -> List[Box]:
    """Every class member of every representative of the bisected k-cube."""
    sym = CycleSymmetry.full(k)
    cube = Box.cube(x_l, x_h, k)
    out = []
    for e in codes.build_sr(k).entries:
        b = generate_subbox(e.code, x_l, x_h, x_star, cube, sym)
        out.extend(apply_box(sym, b, i) for i in range(box_period(sym, b)))
    return out
