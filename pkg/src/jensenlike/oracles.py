"""Independent expectation oracles: Monte Carlo, quadrature, discrete sums.

These never touch a model's CGF, so they can audit every bound.
"""
from __future__ import annotations

import math
from collections.abc import Sized
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np
from scipy import integrate
from scipy.special import entr

from .distributions import DistributionModel
from .errors import OracleError

METHODS = ("monte_carlo", "quadrature", "discrete_sum", "closed_form")

# Sample stream is split into fixed chunks; chunk j is seeded by (seed, j).
CHUNK = 1 << 16


@dataclass(frozen=True)
class OracleEstimate:
    value: float
    uncertainty: float
    method: str
    samples_or_nodes: int


def _chunk_rng(seed: int, j: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(j,)))


def _chunks(n: int):
    for j, start in enumerate(range(0, n, CHUNK)):
        yield j, min(CHUNK, n - start)


def _summarize(values: np.ndarray) -> OracleEstimate:
    n = values.size
    return OracleEstimate(
        value=float(np.mean(values)),
        uncertainty=float(np.std(values, ddof=1) / math.sqrt(n)),
        method="monte_carlo",
        samples_or_nodes=n,
    )


def mc_expectation(model: DistributionModel, h: Callable, n_samples: int, seed: int) -> OracleEstimate:
    """Sample mean of ``h(X)`` with its standard error.

    ``h`` is applied to arrays of samples. Output is a pure function of
    ``(seed, n_samples)``.
    """
    if n_samples < 2:
        raise OracleError(f"need at least 2 samples, got {n_samples}")
    values = np.empty(n_samples)
    pos = 0
    for j, m in _chunks(n_samples):
        x = model.sample(_chunk_rng(seed, j), m)
        with np.errstate(all="ignore"):
            hx = np.asarray(h(x), dtype=float)
        if not np.all(np.isfinite(hx)):
            bad = x[~np.isfinite(hx)][0]
            raise OracleError(f"h is not finite at sample value {bad!r}")
        values[pos:pos + m] = hx
        pos += m
    return _summarize(values)


def quad_expectation(density: Callable, support: tuple[float, float], h: Callable, tol: float) -> OracleEstimate:
    """Adaptive-quadrature estimate of the integral of ``h * density``."""
    if not tol > 0:
        raise OracleError(f"tol must be positive, got {tol}")
    lo, hi = support
    opts = dict(epsabs=tol / 4, epsrel=0.0, limit=500)
    mass, mass_err = integrate.quad(density, lo, hi, **opts)
    if abs(mass - 1.0) > tol or mass_err > tol:
        raise OracleError(f"density integrates to {mass!r} (err {mass_err:.2e}), not 1 within {tol}")
    value, err = integrate.quad(lambda x: h(x) * density(x), lo, hi, **opts)
    if not math.isfinite(value) or err > tol:
        raise OracleError(f"quadrature did not reach tol={tol}: value {value!r}, error estimate {err:.2e}")
    return OracleEstimate(float(value), float(err), "quadrature", 0)


def discrete_expectation(
    pmf: Iterable[tuple[float, float]],
    h: Callable,
    tail_tol: float,
    tail_bound: Optional[Callable[[int, float], float]] = None,
    max_terms: int = 10_000_000,
) -> OracleEstimate:
    """Sum ``h(x) p(x)`` over an enumerated support.

    For infinite supports ``tail_bound(count, last_value)`` must bound the
    remaining contribution after ``count`` terms; summation stops once it
    drops below ``tail_tol``. Finite supports (any sized iterable) are summed
    in full.
    """
    finite = isinstance(pmf, Sized)
    if not finite and tail_bound is None:
        raise OracleError("infinite support needs a tail bound")
    terms = []
    count = 0
    tail = 0.0
    for x, p in pmf:
        if p < 0:
            raise OracleError(f"negative probability {p!r} at {x!r}")
        count += 1
        if p > 0:
            terms.append(float(h(x)) * p)
        if not finite:
            tail = tail_bound(count, x)
            if tail < tail_tol:
                break
        if count >= max_terms:
            raise OracleError(f"tail bound still {tail:.3e} after {count} terms")
    return OracleEstimate(math.fsum(terms), float(tail), "discrete_sum", count)


def geometric_pmf(p: float):
    """Yield ``(k, p(1-p)^(k-1))`` for k = 1, 2, ..."""
    q = 1.0 - p
    k, mass = 1, p
    while True:
        yield float(k), mass
        k += 1
        mass *= q
        if mass == 0.0:
            return


def geometric_power_tail(p: float, s: float) -> Callable[[int, float], float]:
    """Tail bound for ``sum_{k>K} k^s p q^(k-1)``, with s >= 0.

    Term ratios are at most ``r = ((K+2)/(K+1))^s q`` beyond K+1, so the tail
    is at most ``t_{K+1} / (1 - r)`` once ``r < 1``.
    """
    q = 1.0 - p

    def bound(K: int, _last: float) -> float:
        if q == 0.0:
            return 0.0
        r = ((K + 2.0) / (K + 1.0)) ** s * q
        if r >= 1.0:
            return math.inf
        return (K + 1.0) ** s * p * q**K / (1.0 - r)

    return bound


def binomial_pmf(n: int, p: float):
    """All ``(k, P(K=k))`` for Binomial(n, p), as a list."""
    from scipy.stats import binom

    ks = np.arange(n + 1)
    return list(zip(ks.astype(float), binom.pmf(ks, n, p)))


def simulate_empirical_entropy(probs, N: int, n_trials: int, seed: int) -> OracleEstimate:
    """Mean plug-in entropy (nats) of ``n_trials`` multinomial N-draws."""
    probs = np.asarray(probs, dtype=float)
    values = np.empty(n_trials)
    pos = 0
    for j, m in _chunks(n_trials):
        counts = _chunk_rng(seed, j).multinomial(N, probs, size=m)
        values[pos:pos + m] = entr(counts / N).sum(axis=1)
        pos += m
    return _summarize(values)
