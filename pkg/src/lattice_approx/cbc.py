"""
Component-by-component construction of generating vectors for general weights.

The target dimension d is fixed up front. Component s is the minimizer of
T_{d,s}(z_1*, ..., z_{s-1}*, z_s) over z_s in {1, ..., n-1}, smallest z_s
on ties. Each step costs O(n^2 + 2^(d-1) n) for general weights and
O(n^2 + n d) for product weights, so general weights are desk scale only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .criterion import s_d, t_ds_candidates
from .errors import BudgetExceededError
from .korobov import CriterionContext
from .lattice import GeneratingVector

__all__ = ["CBCResult", "cbc_construct", "exhaustive_search"]


@dataclass(frozen=True)
class CBCResult:
    """
    Outcome of a CBC run.

    Attributes
    ----------
    z : GeneratingVector
    trace : tuple of np.ndarray
        ``trace[s-1][c-1]`` is T_{d,s} with candidate z_s = c.
    """

    z: GeneratingVector
    trace: tuple

    @property
    def minima(self) -> list[float]:
        return [float(t[zs - 1]) for t, zs in zip(self.trace, self.z.z)]


def cbc_construct(ctx: CriterionContext, d: int | None = None) -> CBCResult:
    """Run the CBC construction up to dimension ``d`` (default: weights' d)."""
    d = ctx.d if d is None else d
    if d < 1:
        raise ValueError("dimension must be at least 1")
    if d > ctx.d:
        raise ValueError(f"weights only cover d={ctx.d} < {d}")
    z: list[int] = []
    trace = []
    for s in range(1, d + 1):
        values = t_ds_candidates(ctx, GeneratingVector(ctx.n, tuple(z)), s, d)
        values.setflags(write=False)
        trace.append(values)
        # argmin returns the first minimum, i.e. the smallest z_s
        z.append(int(np.argmin(values)) + 1)
    return CBCResult(GeneratingVector(ctx.n, tuple(z)), tuple(trace))


def exhaustive_search(ctx: CriterionContext, d: int | None = None, budget: int = 1_000_000) -> GeneratingVector:
    """Global minimizer of S_d over {1..n-1}^d, lexicographically first on ties."""
    d = ctx.d if d is None else d
    total = (ctx.n - 1) ** d
    if total > budget:
        raise BudgetExceededError(f"{total} candidates exceed budget {budget}")
    weights = ctx.weights if d == ctx.d else ctx.weights.restrict(d)
    best, best_z = np.inf, None
    for cand in itertools.product(range(1, ctx.n), repeat=d):
        value = s_d(ctx, GeneratingVector(ctx.n, cand), weights)
        if value < best:
            best, best_z = value, cand
    return GeneratingVector(ctx.n, best_z)
