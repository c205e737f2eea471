"""Figure reproductions as rows of plotted quantities, plus CSV output."""
from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass, fields
from typing import Iterable, Iterator, Optional

import numpy as np

from . import bounds, distributions, oracles
from .optimize import GridSpec, grid_max


@dataclass(frozen=True)
class FigureRow:
    x: float
    jensen_bound: float
    jensen_direction: str
    family_bound: float
    heuristic_bound: Optional[float] = None
    oracle: Optional[float] = None
    oracle_err: Optional[float] = None

    def ordered(self, k=5.0) -> bool:
        """Family bound, oracle and Jensen bound in the expected order."""
        if self.oracle is None:
            return True
        err = k * (self.oracle_err or 0.0)
        if self.jensen_direction == "upper":
            return self.family_bound - err <= self.oracle <= self.jensen_bound + err
        return self.jensen_bound - err <= self.oracle <= self.family_bound + err


@dataclass(frozen=True)
class GapRow:
    t: float
    mu_t: float
    s_star: float


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return format(float(v), ".12g")


def write_csv(rows: Iterable, stream) -> None:
    """Header of field names, then one line per row at 12 significant digits."""
    writer = csv.writer(stream, lineterminator="\n")
    header_written = False
    for row in rows:
        if not header_written:
            writer.writerow([f.name for f in fields(row)])
            header_written = True
        writer.writerow([_fmt(v) for v in astuple(row)])


def fig1(sigma2=1.0, k_max=100, resolution=0.001, samples=1_000_000, seed=1, alpha_max=10.0, oracle=True) -> Iterator[FigureRow]:
    """SIMO capacity: Jensen upper bound, grid lower bound, heuristic, Monte Carlo."""
    grid = GridSpec(0.0, alpha_max, resolution)
    for k in range(1, k_max + 1):
        res = bounds.simo_capacity_lower(k, sigma2, grid)
        est = None
        if oracle:
            est = oracles.mc_expectation(distributions.shifted_chi_square_sum(k, sigma2), np.log, samples, seed)
        yield FigureRow(
            x=k,
            jensen_bound=res.diagnostics["jensen_upper"],
            jensen_direction="upper",
            family_bound=res.value,
            heuristic_bound=res.diagnostics["heuristic_value"],
            oracle=est.value if est else None,
            oracle_err=est.uncertainty if est else None,
        )


def capacity_quadrature(theta: float, gain: float, tol=1e-8, power=1):
    model = distributions.exponential(theta)
    return oracles.quad_expectation(model.density, model.support, lambda z: np.log1p(gain * z) ** power, tol)


def fig2(gain=5.0, theta_grid=GridSpec(0.1, 5.0, 0.05), resolution=0.001, alpha_max=10.0, oracle=True) -> Iterator[FigureRow]:
    """Exponential-SNR capacity versus theta."""
    grid = GridSpec(0.0, alpha_max, resolution)
    for theta in theta_grid.points():
        theta = float(theta)
        res = bounds.exp_snr_capacity_lower(theta, gain, grid)
        est = capacity_quadrature(theta, gain) if oracle else None
        yield FigureRow(
            x=theta,
            jensen_bound=res.diagnostics["jensen_upper"],
            jensen_direction="upper",
            family_bound=res.value,
            oracle=est.value if est else None,
            oracle_err=est.uncertainty if est else None,
        )


def fig3(p=0.2, n_max=100, t=0.5, resolution=0.01, alpha_max=10.0, s_lo=0.5, s_hi=10.0, oracle=True) -> Iterator[FigureRow]:
    """Fractional moment of a binomial count versus n.

    The heuristic column fixes alpha = 1/(np) and optimizes s alone.
    """
    alpha_grid = GridSpec(0.0, alpha_max, resolution)
    s_grid = GridSpec(s_lo, s_hi, resolution)
    for n in range(1, n_max + 1):
        model = distributions.bernoulli_sum(n, p)
        res = bounds.power_moment_lower(model, t, s_grid, alpha_grid)
        objective = bounds.power_moment_objective(model, t)
        heuristic = grid_max(lambda s: objective(1.0 / (n * p), s), s_grid).max
        est = None
        if oracle:
            est = oracles.discrete_expectation(oracles.binomial_pmf(n, p), lambda k: k**t, 0.0)
        yield FigureRow(
            x=n,
            jensen_bound=(n * p) ** t,
            jensen_direction="upper",
            family_bound=res.value,
            heuristic_bound=heuristic,
            oracle=est.value if est else None,
            oracle_err=est.uncertainty if est else None,
        )


def fig4(t_grid=GridSpec(0.1, 2.0, 0.01), s_resolution=0.001, s_max=10.0) -> Iterator[GapRow]:
    """Gap factor mu_t versus t."""
    for t in t_grid.points():
        t = float(t)
        s_grid = GridSpec(1 - t / 2, s_max, s_resolution, bounds.DEFAULT_REFINE)
        mu, s_star = bounds.gap_factor_mu(t, s_grid)
        yield GapRow(t, mu, s_star)


def jensen_gap(row: FigureRow) -> float:
    """Relative distance of the family bound from the oracle."""
    ref = row.oracle if row.oracle is not None else row.jensen_bound
    return (ref - row.family_bound) / abs(ref) if ref else math.nan
