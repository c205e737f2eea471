"""Acceptance criteria and invariant checks, shared by ``verify`` and pytest.

Each check returns a :class:`CheckResult`; details are formatted with a
fixed precision so repeated runs give byte-identical reports.
"""
from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bounds, distributions as D, figures, funcs, oracles
from .optimize import DEFAULT_REFINE, GridSpec


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _g(v) -> str:
    return format(float(v), ".10g")


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# Every tolerance below is multiplied by ``scale``; scale = -1 corrupts them
# all, which is how the failure path of ``verify`` is exercised.


def criterion_01_gaussian_exp_square(seed, scale=1.0):
    worst = 0.0
    for mu, sigma2, s in itertools.product(np.linspace(-2, 2, 5), np.linspace(0.1, 2.0, 5), np.linspace(0.05, 0.45, 5)):
        if sigma2 * s >= 1:
            continue
        bound, exact = bounds.gaussian_exp_square(float(mu), float(sigma2), float(s))
        worst = max(worst, _rel(bound / exact, math.sqrt(1 - sigma2 * s)))
    b, e = bounds.gaussian_exp_square(1.0, 0.5, 1.0)
    ok = worst <= 1e-12 * scale and _rel(b, math.e) <= 1e-12 * scale and _rel(e, math.sqrt(2) * math.e) <= 1e-12 * scale
    return ok, f"max rel err {_g(worst)}; bound={_g(b)} exact={_g(e)}"


def _fig1_rows(ks, seed):
    grid = GridSpec(0.0, 10.0, 0.001)
    out = []
    for k in ks:
        res = bounds.simo_capacity_lower(k, 1.0, grid)
        est = oracles.mc_expectation(D.shifted_chi_square_sum(k, 1.0), np.log, 1_000_000, seed)
        out.append((k, res, est))
    return out


def criterion_02a_fig1_ordering(seed, scale=1.0):
    parts, ok = [], True
    for k, res, est in _fig1_rows((1, 10, 100), seed):
        slack = 5 * est.uncertainty * scale
        upper = math.log1p(k)
        ok &= res.value <= est.value + slack <= upper + slack
        parts.append(f"k={k}: {_g(res.value)} <= {_g(est.value)}+-{_g(est.uncertainty)} <= {_g(upper)}")
    return ok, "; ".join(parts)


def criterion_02b_fig1_heuristic(seed, scale=1.0):
    parts, ok = [], True
    grid = GridSpec(0.0, 10.0, 0.001)
    for k in (1, 10, 100):
        res = bounds.simo_capacity_lower(k, 1.0, grid)
        rel = _rel(res.diagnostics["heuristic_value"], res.value)
        ok &= rel <= 0.02 * scale
        parts.append(f"k={k}: heuristic off by {_g(100 * rel)}%")
    return ok, "; ".join(parts)


def criterion_03_fig2(seed, scale=1.0):
    parts, ok = [], True
    for theta in (0.2, 1.0, 5.0):
        low = bounds.exp_snr_capacity_lower(theta, 5.0).value
        est = figures.capacity_quadrature(theta, 5.0, tol=1e-8)
        upper = math.log1p(5.0 / theta)
        ok &= low <= est.value + 1e-8 * scale and est.value <= upper + 1e-8 * scale
        parts.append(f"theta={_g(theta)}: {_g(low)} <= {_g(est.value)} <= {_g(upper)}")
    return ok, "; ".join(parts)


def criterion_04_fig3(seed, scale=1.0):
    parts, ok, gaps = [], True, {}
    for n in (10, 50, 100):
        model = D.bernoulli_sum(n, 0.2)
        low = bounds.power_moment_lower(model, 0.5, bounds.FIG3_S_GRID, bounds.FIG3_ALPHA_GRID).value
        exact = oracles.discrete_expectation(oracles.binomial_pmf(n, 0.2), math.sqrt, 0.0).value
        upper = math.sqrt(n * 0.2)
        ok &= low <= exact + 1e-12 * scale and exact <= upper + 1e-12 * scale
        gaps[n] = (exact - low) / exact
        parts.append(f"n={n}: {_g(low)} <= {_g(exact)} <= {_g(upper)}")
    ok &= gaps[100] < gaps[10]
    parts.append(f"gap n=10 {_g(gaps[10])}, n=100 {_g(gaps[100])}")
    return ok, "; ".join(parts)


def criterion_05_gap_factor(seed, scale=1.0):
    mu2, s2 = bounds.gap_factor_mu(2.0, GridSpec(0.0, 10.0, 0.001, DEFAULT_REFINE))
    worst = max(row.mu_t for row in figures.fig4())
    ok = abs(mu2 - 1.0) <= 1e-3 * scale and worst <= 1.0 + 1e-15 * scale
    return ok, f"mu_2={_g(mu2)} at s={_g(s2)}; max mu_t on default grid {_g(worst)}"


def criterion_06_empirical_entropy(seed, scale=1.0):
    P = bounds.PmfTable((0.3, 0.7))
    b1, b2 = bounds.empirical_entropy_lower(P, 100)
    est = oracles.simulate_empirical_entropy(P.probs, 100, 100_000, seed)
    slack = 3 * est.uncertainty * scale
    ok = (
        est.value >= b1 - slack
        and b1 >= b2
        and b2 == P.entropy - 0.01
        and est.value <= P.entropy + slack
    )
    return ok, f"B2={_g(b2)} <= B1={_g(b1)} <= sim={_g(est.value)}+-{_g(est.uncertainty)} <= H={_g(P.entropy)}"


def criterion_07_guessing(seed, scale=1.0):
    ok, worst_margin = True, math.inf
    for p, s in itertools.product((0.1, 0.3, 0.7), (1.2, 1.5, 1.9)):
        lb = bounds.guessing_moment_lower(p, s)
        est = oracles.discrete_expectation(oracles.geometric_pmf(p), lambda k: k**s, 1e-10, oracles.geometric_power_tail(p, s))
        ok &= lb <= est.value + 1e-10 * scale
        worst_margin = min(worst_margin, est.value - lb)
    eq = max(_rel(bounds.guessing_moment_lower(p, 1.0), 1.0 / p) for p in (0.1, 0.3, 0.7))
    ok &= eq <= 1e-12 * scale
    return ok, f"min(oracle - bound)={_g(worst_margin)}; s=1 rel err {_g(eq)}"


def _random_pairs(seed, count=20):
    rng = np.random.default_rng(seed)
    makers = [
        lambda: funcs.catalog("neg_log"),
        lambda: funcs.catalog("x_log_x"),
        lambda: funcs.catalog("power", [float(rng.choice([-1.0, 2.0, 3.0]))]),
        lambda: funcs.catalog("exp_scale", [float(rng.uniform(-1, 1))]),
        lambda: funcs.catalog("half_quadratic", [float(rng.uniform(0.1, 3))]),
        lambda: funcs.catalog("scaled_neg_log", [float(rng.uniform(0.1, 3))]),
    ]
    models = [
        lambda: D.gaussian(float(rng.uniform(0.5, 3)), float(rng.uniform(0.1, 2))),
        lambda: D.exponential(float(rng.uniform(0.2, 5))),
        lambda: D.bernoulli_sum(int(rng.integers(1, 50)), float(rng.uniform(0.05, 0.95))),
        lambda: D.geometric(float(rng.uniform(0.05, 1))),
        lambda: D.shifted_chi_square_sum(int(rng.integers(1, 20)), float(rng.uniform(0.1, 2))),
        lambda: D.sample_mean_sq_error(int(rng.integers(1, 100)), float(rng.uniform(0.1, 4))),
    ]
    for _ in range(count):
        f = makers[int(rng.integers(len(makers)))]()
        m = models[int(rng.integers(len(models)))]()
        s = float(rng.choice([-1.5, -0.5, 1.0, 2.0, 3.5]))
        yield f, m, s


def criterion_08_jensen_reductions(seed, scale=1.0):
    worst = 0.0
    for f, model, s in _random_pairs(seed):
        jensen = float(f(model.mean))
        r1 = bounds.product_convex_positive(f, 1.0, model.mean).value
        r2 = bounds.exp_tilted(f, model, 0.0).value
        r3 = bounds.moment_two_point(1.0, model.mean, s, 0.0).value
        worst = max(worst, _rel(r1, jensen), _rel(r2, jensen), _rel(r3, model.mean**s))
    return worst <= 1e-12 * scale, f"max rel err {_g(worst)} over 20 pairs"


def criterion_09_point_mass(seed, scale=1.0):
    parts, ok = [], True
    for c in (2.0, math.e, 10.0):
        res = bounds.log_expectation_lower(D.degenerate(c))
        err = abs(res.value - math.log(c))
        ok &= err <= (0.001 * abs(math.log(c)) + 1e-6) * scale
        parts.append(f"c={_g(c)}: err {_g(err)}")
    return ok, "; ".join(parts)


def criterion_10_capacity_variance(seed, scale=1.0):
    c = funcs.catalog("log1p_gain", [5.0])
    U = bounds.product_two_convex(c, c, 1.0, 2.0, "concave_pair").value
    m1 = figures.capacity_quadrature(1.0, 5.0).value
    m2 = figures.capacity_quadrature(1.0, 5.0, power=2).value
    var_bound = bounds.capacity_variance_upper(1.0, 5.0).value
    var = m2 - m1 * m1
    ok = U >= m2 - 1e-8 * scale and var_bound >= var - 1e-8 * scale
    return ok, f"E ln^2: {_g(m2)} <= {_g(U)}; Var: {_g(var)} <= {_g(var_bound)}"


def criterion_11_concentration(seed, scale=1.0):
    f = funcs.catalog("half_quadratic", [1.0])
    grid = GridSpec(-10.0, 10.0, 0.001, DEFAULT_REFINE)
    gaps = []
    for sigma2 in (0.5, 0.05, 0.005):
        lower = bounds.exp_of_convex(f, D.gaussian(1.0, sigma2), grid).value
        _, exact = bounds.gaussian_exp_square(1.0, sigma2, 1.0)
        gaps.append((exact - lower) / exact)
    ok = all(a > b for a, b in zip(gaps, gaps[1:]))
    return ok, "relative gaps " + ", ".join(_g(g) for g in gaps)


def criterion_12_determinism(seed, scale=1.0):
    def render():
        buf = io.StringIO()
        figures.write_csv(figures.fig1(k_max=3, samples=20_000, seed=seed), buf)
        return buf.getvalue()

    same = render() == render()
    return same, "fig1 CSV identical across runs" if same else "fig1 CSV differs between runs"


def invariant_catalog_tangents(seed, scale=1.0):
    bad = []
    xs = np.linspace(0.05, 5.0, 100)
    for name, params in [("neg_log", []), ("x_log_x", []), ("power", [0.5]), ("power", [2.5]), ("power", [-1.0]),
                         ("exp_scale", [0.7]), ("half_quadratic", [2.0]), ("log1p_gain", [5.0]),
                         ("log1p_gain_squared", [5.0]), ("scaled_neg_log", [1.5])]:
        f = funcs.catalog(name, params)
        if funcs.finite_difference_check(f, xs):
            bad.append(f"{f.name}: derivative")
        if f.convexity in ("convex", "concave"):
            sign = 1.0 if f.convexity == "convex" else -1.0
            X, A = np.meshgrid(xs[::7], xs[::7])
            gap = sign * (f(X) - f(A) - f.d(A) * (X - A))
            if np.any(gap < -1e-12 * scale * (1 + np.abs(f(X)))):
                bad.append(f"{f.name}: tangent")
    return not bad, "all catalog entries consistent" if not bad else "; ".join(bad)


def _models():
    return [
        D.gaussian(0.5, 2.0),
        D.exponential(2.0),
        D.bernoulli_sum(10, 0.2),
        D.geometric(0.3),
        D.shifted_chi_square_sum(3, 0.5),
        D.sample_mean_sq_error(4, 2.0),
        D.affine_of(D.exponential(1.0), 1.0, 5.0),
    ]


def invariant_cgf_at_zero(seed, scale=1.0):
    worst = 0.0
    for m in _models():
        worst = max(worst, abs(m.cgf(0.0)), abs(m.cgf_prime(0.0) - m.mean), abs(m.cgf_second(0.0) - m.variance))
    return worst <= 1e-10 * scale, f"max deviation {_g(worst)}"


def invariant_mc_determinism(seed, scale=1.0):
    m = D.gaussian(1.0, 0.25)
    a = oracles.mc_expectation(m, lambda x: x, 100_000, seed)
    b = oracles.mc_expectation(m, lambda x: x, 100_000, seed)
    return a == b, f"estimate {_g(a.value)}+-{_g(a.uncertainty)}"


def invariant_grid_dominance(seed, scale=1.0):
    res = bounds.simo_capacity_lower(10, 1.0)
    obj = bounds.simo_objective(10, 1.0)
    pts = bounds.ALPHA_GRID.points()
    ok = bool(np.all(obj(pts) <= res.value)) and res.diagnostics["heuristic_value"] <= res.value
    mu, s_star = bounds.gap_factor_mu(1.0)
    ok &= float(bounds.gap_factor_objective(1.0)(np.array([s_star]))[0]) == mu
    return ok, f"simo max {_g(res.value)} dominates all grid points"


def invariant_guessing_direction(seed, scale=1.0):
    bad = []
    for p, s in itertools.product((0.1, 0.3, 0.7), (0.5, 1.2, 1.5, 1.9, 2.5)):
        res = bounds.guessing_moment_bound(p, s)
        est = oracles.discrete_expectation(oracles.geometric_pmf(p), lambda k: k**s, 1e-10, oracles.geometric_power_tail(p, s))
        sign = 1.0 if res.direction == "upper" else -1.0
        if sign * (res.value - est.value) < -1e-10 * scale:
            bad.append(f"p={_g(p)} s={_g(s)}")
    return not bad, "directed guessing bound holds on all points" if not bad else "violated at " + ", ".join(bad)


CHECKS: list[tuple[str, Callable]] = [
    ("invariant.catalog_tangents", invariant_catalog_tangents),
    ("invariant.cgf_at_zero", invariant_cgf_at_zero),
    ("invariant.mc_determinism", invariant_mc_determinism),
    ("invariant.grid_dominance", invariant_grid_dominance),
    ("invariant.guessing_direction", invariant_guessing_direction),
    ("acceptance.01_gaussian_exp_square", criterion_01_gaussian_exp_square),
    ("acceptance.02a_fig1_ordering", criterion_02a_fig1_ordering),
    ("acceptance.02b_fig1_heuristic_within_2pct", criterion_02b_fig1_heuristic),
    ("acceptance.03_fig2", criterion_03_fig2),
    ("acceptance.04_fig3", criterion_04_fig3),
    ("acceptance.05_gap_factor", criterion_05_gap_factor),
    ("acceptance.06_empirical_entropy", criterion_06_empirical_entropy),
    ("acceptance.07_guessing", criterion_07_guessing),
    ("acceptance.08_jensen_reductions", criterion_08_jensen_reductions),
    ("acceptance.09_point_mass", criterion_09_point_mass),
    ("acceptance.10_capacity_variance", criterion_10_capacity_variance),
    ("acceptance.11_concentration", criterion_11_concentration),
    ("acceptance.12_determinism", criterion_12_determinism),
]


def run_check(name: str, fn: Callable, seed: int = 1, scale: float = 1.0) -> CheckResult:
    try:
        ok, detail = fn(seed, scale)
    except Exception as exc:  # a crash is a failed check, not a crashed report
        return CheckResult(name, False, f"{type(exc).__name__}: {exc}")
    return CheckResult(name, bool(ok), detail)


def run_all(seed: int = 1, scale: float = 1.0) -> list[CheckResult]:
    return [run_check(name, fn, seed, scale) for name, fn in CHECKS]
