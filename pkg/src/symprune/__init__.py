"""Interval branch-and-prune solving that exploits cyclic variable symmetries."""

from .codes import build_sr, classgen, count_n, ifdp
from .csym import CsymReport, NotACube, csym1
from .interval import Box, Interval
from .problems import Problem, cyclic_n_roots, example_sphere, parse_problem
from .solver import BudgetExceeded, SolutionSet, SolverConfig, SolveStats, branch_and_prune
from .symmetry import ConstraintPermutation, CycleSymmetry, verify_symmetry

__version__ = "0.1.0"
