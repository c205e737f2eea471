"""Differentiable scalar functions and the catalog of recurring choices.

Every function carries its open domain and a declared convexity tag. The
bounds are direction-sensitive, so the tag is never inferred.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DomainError

CONVEXITY_TAGS = ("convex", "concave", "neither", "unknown")


@dataclass(frozen=True)
class DifferentiableFunction:
    """A scalar function with its derivative(s) on an open interval.

    ``eval``/``deriv``/``second_deriv`` must accept floats and numpy arrays.
    Calling the object or :meth:`d`/:meth:`d2` checks the domain first.
    """

    eval: Callable
    deriv: Callable
    second_deriv: Optional[Callable] = None
    domain: tuple[float, float] = (-math.inf, math.inf)
    convexity: str = "unknown"
    name: str = "user"

    def __post_init__(self):
        lo, hi = self.domain
        if not lo < hi:
            raise ConfigurationError(f"empty domain {self.domain}")
        if self.convexity not in CONVEXITY_TAGS:
            raise ConfigurationError(f"unknown convexity tag {self.convexity!r}")

    def inside(self, x):
        """Boolean mask of points strictly inside the domain."""
        lo, hi = self.domain
        x = np.asarray(x, dtype=float)
        return (x > lo) & (x < hi)

    def _check(self, x):
        if not np.all(self.inside(x)):
            raise DomainError(f"{self.name}: argument {x!r} outside open domain {self.domain}")

    def __call__(self, x):
        self._check(x)
        return self.eval(x)

    def d(self, x):
        self._check(x)
        return self.deriv(x)

    def d2(self, x):
        if self.second_deriv is None:
            raise ConfigurationError(f"{self.name}: no second derivative supplied")
        self._check(x)
        return self.second_deriv(x)


def tangent_at(f: DifferentiableFunction, a: float) -> DifferentiableFunction:
    """Tangential affine function ``x -> f(a) + f'(a)(x - a)``."""
    fa = float(f(a))
    slope = float(f.d(a))
    return DifferentiableFunction(
        eval=lambda x: fa + slope * (x - a),
        deriv=lambda x: slope + 0.0 * x,
        second_deriv=lambda x: 0.0 * x,
        convexity="convex",
        name=f"tangent({f.name}@{a:g})",
    )


def _neg_log():
    return DifferentiableFunction(
        eval=lambda x: -np.log(x),
        deriv=lambda x: -1.0 / x,
        second_deriv=lambda x: 1.0 / x**2,
        domain=(0.0, math.inf),
        convexity="convex",
        name="neg_log",
    )


def _x_log_x():
    return DifferentiableFunction(
        eval=lambda x: x * np.log(x),
        deriv=lambda x: np.log(x) + 1.0,
        second_deriv=lambda x: 1.0 / x,
        domain=(0.0, math.inf),
        convexity="convex",
        name="x_log_x",
    )


def _power(t):
    if t <= 0 or t >= 1:
        tag = "convex"
    else:
        tag = "concave"
    return DifferentiableFunction(
        eval=lambda x: np.power(x, t),
        deriv=lambda x: t * np.power(x, t - 1.0),
        second_deriv=lambda x: t * (t - 1.0) * np.power(x, t - 2.0),
        domain=(0.0, math.inf),
        convexity=tag,
        name=f"power({t:g})",
    )


def _exp_scale(s):
    return DifferentiableFunction(
        eval=lambda x: np.exp(s * x),
        deriv=lambda x: s * np.exp(s * x),
        second_deriv=lambda x: s * s * np.exp(s * x),
        convexity="convex",
        name=f"exp_scale({s:g})",
    )


def _half_quadratic(s):
    return DifferentiableFunction(
        eval=lambda x: 0.5 * s * np.square(x),
        deriv=lambda x: s * x,
        second_deriv=lambda x: s + 0.0 * x,
        convexity="convex" if s >= 0 else "concave",
        name=f"half_quadratic({s:g})",
    )


def _log1p_gain(g):
    if not g > 0:
        raise ConfigurationError(f"log1p_gain needs g > 0, got {g}")
    return DifferentiableFunction(
        eval=lambda x: np.log1p(g * x),
        deriv=lambda x: g / (1.0 + g * x),
        second_deriv=lambda x: -(g**2) / (1.0 + g * x) ** 2,
        domain=(-1.0 / g, math.inf),
        convexity="concave",
        name=f"log1p_gain({g:g})",
    )


def _log1p_gain_squared(g):
    if not g > 0:
        raise ConfigurationError(f"log1p_gain_squared needs g > 0, got {g}")

    def d2(x):
        u = 1.0 + g * x
        return 2.0 * g**2 * (1.0 - np.log(u)) / u**2

    return DifferentiableFunction(
        eval=lambda x: np.log1p(g * x) ** 2,
        deriv=lambda x: 2.0 * g * np.log1p(g * x) / (1.0 + g * x),
        second_deriv=d2,
        domain=(-1.0 / g, math.inf),
        convexity="neither",
        name=f"log1p_gain_squared({g:g})",
    )


def _scaled_neg_log(s):
    return DifferentiableFunction(
        eval=lambda x: -s * np.log(x),
        deriv=lambda x: -s / x,
        second_deriv=lambda x: s / x**2,
        domain=(0.0, math.inf),
        convexity="convex" if s >= 0 else "concave",
        name=f"scaled_neg_log({s:g})",
    )


_CATALOG = {
    "neg_log": (0, _neg_log),
    "x_log_x": (0, _x_log_x),
    "power": (1, _power),
    "exp_scale": (1, _exp_scale),
    "half_quadratic": (1, _half_quadratic),
    "log1p_gain": (1, _log1p_gain),
    "log1p_gain_squared": (1, _log1p_gain_squared),
    "scaled_neg_log": (1, _scaled_neg_log),
}

CATALOG_NAMES = tuple(_CATALOG)


def catalog(name: str, params=()) -> DifferentiableFunction:
    """Look up a catalog function, e.g. ``catalog("power", [0.5])``."""
    try:
        arity, make = _CATALOG[name]
    except KeyError:
        raise ConfigurationError(f"unknown function {name!r}; known: {', '.join(_CATALOG)}") from None
    params = [float(p) for p in params]
    if len(params) != arity:
        raise ConfigurationError(f"{name} takes {arity} parameter(s), got {len(params)}")
    if any(not math.isfinite(p) for p in params):
        raise ConfigurationError(f"{name}: non-finite parameter {params}")
    return make(*params)


def finite_difference_check(f: DifferentiableFunction, xs, rtol=1e-5):
    """Compare ``f.d`` against central differences at step 1e-6*max(1,|x|).

    Returns the list of ``(x, analytic, numeric)`` triples that disagree by
    more than ``rtol * max(1, |analytic|)``; an empty list means the check passed.
    """
    bad = []
    for x in np.asarray(xs, dtype=float):
        h = 1e-6 * max(1.0, abs(x))
        if not (f.inside(x - h) and f.inside(x + h)):
            continue
        numeric = (float(f.eval(x + h)) - float(f.eval(x - h))) / (2 * h)
        analytic = float(f.d(x))
        if abs(numeric - analytic) > rtol * max(1.0, abs(analytic)):
            bad.append((float(x), analytic, numeric))
    return bad
