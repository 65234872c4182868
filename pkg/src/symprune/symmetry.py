"""Single-cycle variable permutations acting on points and boxes."""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .interval import Box

SYM_TOLERANCE = 1e-9
DEFAULT_SAMPLES = 100
SEED_ENV = "SYMPRUNE_SEED"


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class CycleSymmetry:
    """The cycle ``(c[0] c[1] ... c[k-1])`` over ``n_vars`` variables.

    One application maps ``x`` to ``y`` with ``y[c[j]] = x[c[(j+1) % k]]``,
    i.e. ``s(x1, x2, x3) = (x2, x3, x1)`` for the cycle ``(0 1 2)``.
    Variables not on the cycle are fixed.
    """

    n_vars: int
    cycle: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "cycle", tuple(int(i) for i in self.cycle))
        if len(set(self.cycle)) != len(self.cycle):
            raise ValueError(f"cycle indices are not distinct: {self.cycle}")
        if any(not 0 <= i < self.n_vars for i in self.cycle):
            raise ValueError(f"cycle index out of range for {self.n_vars} variables")

    @classmethod
    def full(cls, n: int) -> "CycleSymmetry":
        return cls(n, tuple(range(n)))

    @property
    def length(self) -> int:
        return len(self.cycle)

    def permutation(self, times: int = 1) -> List[int]:
        """Source index for each output coordinate after ``times`` shifts."""
        k = len(self.cycle)
        src = list(range(self.n_vars))
        if k:
            t = times % k
            for j, v in enumerate(self.cycle):
                src[v] = self.cycle[(j + t) % k]
        return src


@dataclass(frozen=True)
class ConstraintPermutation:
    """Bijection on constraint indices (0-based) paired with a symmetry."""

    sigma: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(int(i) for i in self.sigma))
        if sorted(self.sigma) != list(range(len(self.sigma))):
            raise ValueError(f"sigma is not a permutation: {self.sigma}")

    @classmethod
    def identity(cls, m: int) -> "ConstraintPermutation":
        return cls(tuple(range(m)))

    def __len__(self):
        return len(self.sigma)

    def __getitem__(self, i: int) -> int:
        return self.sigma[i]


def apply_point(sym: CycleSymmetry, x: Sequence, times: int = 1) -> tuple:
    if len(x) != sym.n_vars:
        raise DimensionMismatch(f"point has {len(x)} coordinates, expected {sym.n_vars}")
    return tuple(x[i] for i in sym.permutation(times))


def apply_box(sym: CycleSymmetry, b: Box, times: int = 1) -> Box:
    if len(b) != sym.n_vars:
        raise DimensionMismatch(f"box has {len(b)} dimensions, expected {sym.n_vars}")
    return Box(b[i] for i in sym.permutation(times))


def box_period(sym: CycleSymmetry, b: Box) -> int:
    """Smallest ``i >= 1`` with ``S^i(b) == b``."""
    k = sym.length
    if k == 0:
        return 1
    dims = [b[i] for i in sym.cycle]
    for p in range(1, k + 1):
        if k % p == 0 and all(dims[j] == dims[(j + p) % k] for j in range(k)):
            return p
    return k


def box_class(sym: CycleSymmetry, b: Box) -> List[Box]:
    return [apply_box(sym, b, i) for i in range(box_period(sym, b))]


def _sampling_rng(seed: Optional[int]) -> random.Random:
    if seed is None:
        env = os.environ.get(SEED_ENV)
        seed = int(env) if env else 0
    return random.Random(seed)


def find_symmetry_violation(problem, sym: CycleSymmetry, sigma: ConstraintPermutation,
                            n_samples: int = DEFAULT_SAMPLES, tol: float = SYM_TOLERANCE,
                            seed: Optional[int] = None):
    """Return ``(constraint_index, point)`` of the first violation, or ``None``.

    Checks ``C_i == C_sigma(i)`` and ``f_i(s(x)) == f_sigma(i)(x)`` up to a
    relative tolerance at random points of the initial box. Sampling is
    seeded from ``seed`` or the ``SYMPRUNE_SEED`` environment variable.
    """
    n = len(problem.initial_box)
    m = len(problem.constraints)
    if sym.n_vars != n:
        raise DimensionMismatch(f"symmetry acts on {sym.n_vars} variables, problem has {n}")
    if len(sigma) != m:
        raise DimensionMismatch(f"sigma has {len(sigma)} entries, problem has {m} constraints")
    cons = problem.constraints
    for i in range(m):
        if cons[i].range != cons[sigma[i]].range:
            return i, None
    rng = _sampling_rng(seed)
    box = problem.initial_box
    for _ in range(n_samples):
        x = [_sample(rng, d.lo, d.hi) for d in box]
        sx = apply_point(sym, x)
        for i in range(m):
            lhs = cons[i].expr.evaluate(sx)
            rhs = cons[sigma[i]].expr.evaluate(x)
            if abs(lhs - rhs) > tol * max(1.0, abs(lhs), abs(rhs)):
                return i, tuple(x)
    return None


def verify_symmetry(problem, sym: CycleSymmetry, sigma: ConstraintPermutation,
                    n_samples: int = DEFAULT_SAMPLES, seed: Optional[int] = None) -> bool:
    return find_symmetry_violation(problem, sym, sigma, n_samples, seed=seed) is None


def _sample(rng: random.Random, lo: float, hi: float) -> float:
    lo = max(lo, -1e6)
    hi = min(hi, 1e6)
    return rng.uniform(lo, hi)
