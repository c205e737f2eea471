"""Exhaustive grid maximization with optional local refinement.

Objectives are vectorized: they receive numpy arrays of grid points and
return values of the same shape, using NaN to mark infeasible points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import ConfigurationError, InfeasibleError

DEFAULT_REFINE = (3, 0.1)


@dataclass(frozen=True)
class GridSpec:
    """Closed interval ``[lo, hi]`` searched at ``lo + i*step``.

    ``refine=(passes, shrink)`` re-searches a window of one step around the
    incumbent with the step multiplied by ``shrink`` on each pass.
    """

    lo: float
    hi: float
    step: float
    refine: Optional[tuple[int, float]] = None

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise ConfigurationError(f"grid needs finite lo < hi, got [{self.lo}, {self.hi}]")
        if not 0 < self.step <= self.hi - self.lo:
            raise ConfigurationError(f"grid step {self.step} not in (0, hi - lo]")
        if self.refine is not None:
            passes, shrink = self.refine
            if passes < 0 or not 0 < shrink < 1:
                raise ConfigurationError(f"bad refine policy {self.refine}")

    def points(self) -> np.ndarray:
        n = int(math.floor((self.hi - self.lo) / self.step + 1e-9))
        pts = self.lo + self.step * np.arange(n + 1)
        return np.minimum(pts, self.hi)

    def with_refine(self, passes=DEFAULT_REFINE[0], shrink=DEFAULT_REFINE[1]) -> "GridSpec":
        return GridSpec(self.lo, self.hi, self.step, (passes, shrink))


class GridMax(NamedTuple):
    argmax: float
    max: float
    feasible_count: int


class GridMax2D(NamedTuple):
    argmax: tuple[float, float]
    max: float
    feasible_count: int


def _evaluate(objective, pts, vectorized):
    if vectorized:
        with np.errstate(all="ignore"):
            vals = np.asarray(objective(pts), dtype=float)
        return np.broadcast_to(vals, np.shape(pts)).copy() if vals.shape != np.shape(pts) else vals
    out = np.empty(len(pts))
    for i, x in enumerate(pts):
        v = objective(float(x))
        out[i] = np.nan if v is None else float(v)
    return out


def _best(vals):
    """Index of the first maximal feasible value, and the feasible count."""
    feasible = ~np.isnan(vals)
    n = int(feasible.sum())
    if n == 0:
        return None, 0
    masked = np.where(feasible, vals, -np.inf)
    i = int(np.argmax(masked))
    # all feasible values are -inf: argmax returns 0, which may be infeasible
    if not feasible[i]:
        i = int(np.flatnonzero(feasible)[0])
    return i, n


def grid_max(objective: Callable, grid: GridSpec, vectorized: bool = True) -> GridMax:
    """Maximize ``objective`` over the grid; ties go to the smallest argument.

    With ``vectorized=False`` the objective is called per point and may
    return ``None`` (or NaN) for infeasible points.
    """
    pts = grid.points()
    vals = _evaluate(objective, pts, vectorized)
    i, count = _best(vals)
    if i is None:
        raise InfeasibleError(f"no feasible point on [{grid.lo}, {grid.hi}] step {grid.step}")
    x_best, v_best = float(pts[i]), float(vals[i])
    if grid.refine:
        passes, shrink = grid.refine
        step = grid.step
        for _ in range(passes):
            lo = max(grid.lo, x_best - step)
            hi = min(grid.hi, x_best + step)
            step *= shrink
            n = int(math.floor((hi - lo) / step + 1e-9))
            local = np.minimum(lo + step * np.arange(n + 1), hi)
            lvals = _evaluate(objective, local, vectorized)
            j, c = _best(lvals)
            count += c
            if j is not None and lvals[j] > v_best:
                x_best, v_best = float(local[j]), float(lvals[j])
    return GridMax(x_best, v_best, count)


def grid_max_2d(objective: Callable, grid_a: GridSpec, grid_b: GridSpec, vectorized: bool = True) -> GridMax2D:
    """Exhaustive product-grid maximization of ``objective(a, b)``.

    A vectorized objective receives broadcastable arrays of shape ``(na, 1)``
    and ``(1, nb)``. Ties resolve lexicographically to the smallest ``(a, b)``.
    Refinement policies on either grid are ignored.
    """
    a = grid_a.points()
    b = grid_b.points()
    if vectorized:
        with np.errstate(all="ignore"):
            vals = np.asarray(objective(a[:, None], b[None, :]), dtype=float)
        vals = np.broadcast_to(vals, (a.size, b.size))
    else:
        vals = np.empty((a.size, b.size))
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                v = objective(float(x), float(y))
                vals[i, j] = np.nan if v is None else float(v)
    flat = vals.ravel()
    k, count = _best(flat)
    if k is None:
        raise InfeasibleError("no feasible point on the product grid")
    i, j = divmod(k, b.size)
    return GridMax2D((float(a[i]), float(b[j])), float(flat[k]), count)
