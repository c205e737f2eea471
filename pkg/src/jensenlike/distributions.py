"""Random-variable models with closed-form CGFs and seeded samplers.

A model exposes the cumulant generating function ``psi(s) = ln E[exp(sX)]``
with its first two derivatives on an explicit open interval. Evaluating the
CGF outside that interval raises instead of returning inf/NaN.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class DistributionModel:
    name: str
    mean: float
    variance: float
    psi: Callable
    psi_prime: Callable
    psi_second: Callable
    cgf_domain: tuple[float, float]
    sampler: Callable  # (np.random.Generator, size) -> ndarray
    support: tuple[float, float]
    density: Optional[Callable] = None
    params: tuple = ()

    def in_cgf_domain(self, s):
        lo, hi = self.cgf_domain
        s = np.asarray(s, dtype=float)
        return (s > lo) & (s < hi)

    def _check(self, s):
        if not np.all(self.in_cgf_domain(s)):
            raise DomainError(f"{self.name}: s={s!r} outside CGF domain {self.cgf_domain}")

    def cgf(self, s):
        self._check(s)
        return self.psi(s)

    def cgf_prime(self, s):
        self._check(s)
        return self.psi_prime(s)

    def cgf_second(self, s):
        self._check(s)
        return self.psi_second(s)

    def mgf(self, s):
        return np.exp(self.cgf(s))

    def sample(self, rng: np.random.Generator, size: int):
        return self.sampler(rng, size)


def _positive(name, **values):
    for key, v in values.items():
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ConfigurationError(f"{name}: {key} must be a positive finite number, got {v!r}")


def _count(name, **values):
    for key, v in values.items():
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
            raise ConfigurationError(f"{name}: {key} must be a positive integer, got {v!r}")


def gaussian(mu: float, sigma2: float) -> DistributionModel:
    _positive("gaussian", sigma2=sigma2)
    sd = math.sqrt(sigma2)
    return DistributionModel(
        name="gaussian",
        mean=float(mu),
        variance=float(sigma2),
        psi=lambda s: mu * s + 0.5 * sigma2 * np.square(s),
        psi_prime=lambda s: mu + sigma2 * s,
        psi_second=lambda s: sigma2 + 0.0 * s,
        cgf_domain=(-math.inf, math.inf),
        sampler=lambda rng, size: rng.normal(mu, sd, size),
        support=(-math.inf, math.inf),
        density=lambda x: np.exp(-0.5 * (x - mu) ** 2 / sigma2) / math.sqrt(2 * math.pi * sigma2),
        params=(mu, sigma2),
    )


def degenerate(c: float) -> DistributionModel:
    """Point mass at ``c``; the equality case of every bound."""
    c = float(c)
    return DistributionModel(
        name="degenerate",
        mean=c,
        variance=0.0,
        psi=lambda s: c * s,
        psi_prime=lambda s: c + 0.0 * s,
        psi_second=lambda s: 0.0 * s,
        cgf_domain=(-math.inf, math.inf),
        sampler=lambda rng, size: np.full(size, c),
        support=(c, c),
        params=(c,),
    )


def exponential(theta: float) -> DistributionModel:
    """Exponential law with rate ``theta`` (density theta*exp(-theta*z))."""
    _positive("exponential", theta=theta)
    return DistributionModel(
        name="exponential",
        mean=1.0 / theta,
        variance=1.0 / theta**2,
        psi=lambda s: -np.log1p(-s / theta),
        psi_prime=lambda s: 1.0 / (theta - s),
        psi_second=lambda s: 1.0 / (theta - s) ** 2,
        cgf_domain=(-math.inf, float(theta)),
        sampler=lambda rng, size: rng.exponential(1.0 / theta, size),
        support=(0.0, math.inf),
        density=lambda z: theta * np.exp(-theta * z),
        params=(theta,),
    )


def bernoulli_sum(n: int, p: float) -> DistributionModel:
    """Sum of ``n`` iid Bernoulli(p), i.e. Binomial(n, p)."""
    _count("bernoulli_sum", n=n)
    if not 0 < p < 1:
        raise ConfigurationError(f"bernoulli_sum: p must lie in (0, 1), got {p!r}")
    q = 1.0 - p
    logit_p = math.log(p) - math.log(q)

    def psi(s):
        return n * np.logaddexp(math.log(p) + s, math.log(q))

    def psi_prime(s):
        return n * expit(s + logit_p)

    def psi_second(s):
        w = expit(s + logit_p)
        return n * w * (1.0 - w)

    return DistributionModel(
        name="bernoulli_sum",
        mean=n * p,
        variance=n * p * q,
        psi=psi,
        psi_prime=psi_prime,
        psi_second=psi_second,
        cgf_domain=(-math.inf, math.inf),
        sampler=lambda rng, size: rng.binomial(n, p, size).astype(float),
        support=(0.0, float(n)),
        params=(n, p),
    )


def geometric(p: float) -> DistributionModel:
    """Number of trials up to the first success, pmf p(1-p)^(k-1), k >= 1."""
    if not 0 < p <= 1:
        raise ConfigurationError(f"geometric: p must lie in (0, 1], got {p!r}")
    q = 1.0 - p
    # -ln(1-p) without cancellation for small p
    s_hi = math.inf if q == 0 else -math.log1p(-p)

    def psi(s):
        return math.log(p) + s - np.log1p(-q * np.exp(s))

    def psi_prime(s):
        return 1.0 / (1.0 - q * np.exp(s))

    def psi_second(s):
        u = q * np.exp(s)
        return u / (1.0 - u) ** 2

    return DistributionModel(
        name="geometric",
        mean=1.0 / p,
        variance=q / p**2,
        psi=psi,
        psi_prime=psi_prime,
        psi_second=psi_second,
        cgf_domain=(-math.inf, s_hi),
        sampler=lambda rng, size: rng.geometric(p, size).astype(float),
        support=(1.0, math.inf),
        params=(p,),
    )


def shifted_chi_square_sum(k: int, sigma2: float) -> DistributionModel:
    """X = 1 + sum of k squared iid N(0, sigma2) variables."""
    _count("shifted_chi_square_sum", k=k)
    _positive("shifted_chi_square_sum", sigma2=sigma2)
    return DistributionModel(
        name="shifted_chi_square_sum",
        mean=1.0 + k * sigma2,
        variance=2.0 * k * sigma2**2,
        psi=lambda s: s - 0.5 * k * np.log1p(-2.0 * s * sigma2),
        psi_prime=lambda s: 1.0 + k * sigma2 / (1.0 - 2.0 * s * sigma2),
        psi_second=lambda s: 2.0 * k * sigma2**2 / (1.0 - 2.0 * s * sigma2) ** 2,
        cgf_domain=(-math.inf, 1.0 / (2.0 * sigma2)),
        # sigma2 * chi2_k has the law of the sum of squares; one draw per sample
        sampler=lambda rng, size: 1.0 + sigma2 * rng.chisquare(k, size),
        support=(1.0, math.inf),
        params=(k, sigma2),
    )


def sample_mean_sq_error(n: int, sigma2: float) -> DistributionModel:
    """Squared error of a sample mean of ``n`` draws with variance ``sigma2``.

    The CGF is that of a squared N(0, sigma2/n); the sampler draws exactly that.
    """
    _count("sample_mean_sq_error", n=n)
    _positive("sample_mean_sq_error", sigma2=sigma2)
    v = sigma2 / n
    sd = math.sqrt(v)
    return DistributionModel(
        name="sample_mean_sq_error",
        mean=v,
        variance=2.0 * v**2,
        psi=lambda s: -0.5 * np.log1p(-2.0 * s * v),
        psi_prime=lambda s: v / (1.0 - 2.0 * s * v),
        psi_second=lambda s: 2.0 * v**2 / (1.0 - 2.0 * s * v) ** 2,
        cgf_domain=(-math.inf, 1.0 / (2.0 * v)),
        sampler=lambda rng, size: np.square(rng.normal(0.0, sd, size)),
        support=(0.0, math.inf),
        params=(n, sigma2),
    )


def affine_of(base: DistributionModel, c: float, b: float) -> DistributionModel:
    """Law of ``c + b*Y`` for ``Y ~ base``."""
    if b == 0 or not math.isfinite(b) or not math.isfinite(c):
        raise ConfigurationError(f"affine_of: need finite c and nonzero finite b, got c={c}, b={b}")
    lo, hi = base.cgf_domain
    domain = (lo / b, hi / b) if b > 0 else (hi / b, lo / b)
    slo, shi = base.support
    support = (c + b * slo, c + b * shi) if b > 0 else (c + b * shi, c + b * slo)
    density = None
    if base.density is not None:
        density = lambda x: base.density((x - c) / b) / abs(b)  # noqa: E731
    return DistributionModel(
        name=f"affine({base.name})",
        mean=c + b * base.mean,
        variance=b * b * base.variance,
        psi=lambda s: c * s + base.psi(b * s),
        psi_prime=lambda s: c + b * base.psi_prime(b * s),
        psi_second=lambda s: b * b * base.psi_second(b * s),
        cgf_domain=domain,
        sampler=lambda rng, size: c + b * base.sampler(rng, size),
        support=support,
        density=density,
        params=(base.params, c, b),
    )
