"""Jensen-like bounds obtained by optimizing the tangency point.

Four families are covered:

* ``convex_times_positive``: E[f(X) g(X)] with f convex and g >= 0.
* ``exp_of_convex``: E[exp(f(X))] via the CGF of X.
* ``convex_times_exp_composition``: E[exp(f(X)) g(X)] with f, g convex.
* ``product_of_two_convex``: E[f(X) g(X)] with f, g nonnegative convex
  (or both concave, giving an upper bound).

Every sup-form bound is evaluated on a grid. Grid points where the CGF,
function domain or a sign requirement fails are skipped, and the number of
skipped points is reported in ``notes``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import entr

from .distributions import DistributionModel
from .errors import DomainError, PreconditionError, SingularityError, ValidityError
from .funcs import DifferentiableFunction
from .optimize import DEFAULT_REFINE, GridSpec, grid_max, grid_max_2d

ALPHA_GRID = GridSpec(0.0, 10.0, 0.001)
FIG3_ALPHA_GRID = GridSpec(0.0, 10.0, 0.01)
FIG3_S_GRID = GridSpec(0.5, 10.0, 0.01)


@dataclass(frozen=True)
class BoundResult:
    value: float
    direction: str
    family: str
    optimizer: dict = field(default_factory=dict)
    validity: dict = field(default_factory=dict)
    notes: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return all(self.validity.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["valid"] = self.valid
        return d


@dataclass(frozen=True)
class PmfTable:
    probs: tuple
    letters: tuple = ()

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if not self.letters:
            object.__setattr__(self, "letters", tuple(f"u{i}" for i in range(len(probs))))
        if len(self.letters) != len(probs) or not probs:
            raise PreconditionError("letters and probs must be non-empty and of equal length")
        if any(p < 0 for p in probs) or abs(math.fsum(probs) - 1.0) > 1e-12:
            raise PreconditionError(f"probabilities must be nonnegative and sum to 1: {probs}")

    @property
    def entropy(self) -> float:
        return math.fsum(float(entr(p)) for p in self.probs)


def _require_tag(f: DifferentiableFunction, want: str, role: str, assume: bool):
    if f.convexity == want or (assume and f.convexity == "unknown"):
        return
    raise PreconditionError(
        f"{role} must be {want}; {f.name} is tagged {f.convexity!r}"
        + (" (pass assume_convex=True to accept an untagged function)" if f.convexity == "unknown" else "")
    )


def _masked(x, mask, fn):
    """``fn`` applied where ``mask`` holds, NaN elsewhere."""
    out = np.full(np.shape(x), np.nan)
    if np.any(mask):
        out[mask] = fn(np.asarray(x)[mask])
    return out


def _skip_note(grid: GridSpec, feasible: int) -> str:
    total = grid.points().size
    return f"skipped {max(total - feasible, 0)} of {total} grid points"


def _final_step(grid: GridSpec) -> float:
    if grid.refine:
        passes, shrink = grid.refine
        return grid.step * shrink**passes
    return grid.step


# --- convex times positive ---------------------------------------------------


def product_convex_positive(f: DifferentiableFunction, m_g: float, m_xg: float, assume_convex=False) -> BoundResult:
    """Lower bound ``f(E[Xg]/E[g]) * E[g]`` on E[f(X) g(X)].

    For f and g acting on different variables pass ``m_g = E[g(Y)]`` and
    ``m_xg = E[X g(Y)]``.
    """
    _require_tag(f, "convex", "f", assume_convex)
    if not m_g > 0:
        raise PreconditionError(f"E[g] must be positive, got {m_g}")
    a = m_xg / m_g
    if not f.inside(a):
        raise DomainError(f"optimal tangency point {a} outside domain of {f.name}")
    return BoundResult(
        value=float(f(a)) * m_g,
        direction="lower",
        family="convex_times_positive",
        optimizer={"a": a},
        validity={"m_g_positive": True},
    )


def empirical_entropy_lower(P: Union[PmfTable, Sequence[float]], N: int) -> tuple[float, float]:
    """Two lower bounds ``(B1, B2)`` on the expected plug-in entropy of N draws.

    ``B1 = H - sum_u P(u) ln(1 + (1-P(u))/(N P(u)))`` and the looser
    ``B2 = H - (|U|-1)/N``.
    """
    if not isinstance(P, PmfTable):
        P = PmfTable(tuple(P))
    if N < 1:
        raise PreconditionError(f"N must be a positive integer, got {N}")
    H = P.entropy
    gap = math.fsum(p * math.log1p((1.0 - p) / (N * p)) for p in P.probs if p > 0)
    return H - gap, H - (len(P.probs) - 1) / N


def moment_two_point(m_t: float, m_t1: float, s: float, t: float) -> BoundResult:
    """Lower bound on E[X^s] from ``E[X^t]`` and ``E[X^(t+1)]``, X > 0."""
    d = s - t
    if 0 < d < 1:
        raise PreconditionError(f"s - t = {d} lies in (0, 1), where x^(s-t) is not convex")
    if not (m_t > 0 and m_t1 > 0):
        raise PreconditionError("moments must be positive")
    value = math.exp(d * math.log(m_t1) - (d - 1.0) * math.log(m_t))
    return BoundResult(
        value=value,
        direction="lower",
        family="convex_times_positive",
        optimizer={"a": m_t1 / m_t},
        validity={"exponent_convex": True},
    )


def guessing_moment_lower(p: float, s: float) -> float:
    """Two-moment value ``(2-p)^(s-1) / p^s`` for E[G^s], G geometric, s in [1, 2].

    Exact at s = 1 and s = 2. Strictly inside (1, 2) the tangent argument
    runs through the concave x^(s-1), so the value is an *upper* bound there;
    use :func:`guessing_moment_bound` to get the direction attached.
    """
    if not 0 < p <= 1:
        raise PreconditionError(f"p must lie in (0, 1], got {p}")
    if not 1 <= s <= 2:
        raise PreconditionError(f"s must lie in [1, 2], got {s}")
    return (2.0 - p) ** (s - 1.0) / p**s


def guessing_moment_bound(p: float, s: float) -> BoundResult:
    """``(2-p)^(s-1) / p^s`` with its true direction, for any real s.

    This is the two-moment bound with t = 1 and the geometric mean 1/p and
    second moment (2-p)/p^2: a lower bound when s <= 1 or s >= 2, an upper
    bound when 1 < s < 2.
    """
    if not 0 < p <= 1:
        raise PreconditionError(f"p must lie in (0, 1], got {p}")
    reversed_ = 1 < s < 2
    return BoundResult(
        value=(2.0 - p) ** (s - 1.0) / p**s,
        direction="upper" if reversed_ else "lower",
        family="convex_times_positive",
        optimizer={"a": (2.0 - p) / p},
        validity={"p_in_range": True},
        notes="x^(s-1) is concave for 1 < s < 2, so the tangent bound reverses" if reversed_ else "",
    )


def exp_tilted(f: DifferentiableFunction, model: DistributionModel, s: float, assume_convex=False) -> BoundResult:
    """Lower bound ``f(psi'(s)) exp(psi(s))`` on E[f(X) exp(sX)]."""
    _require_tag(f, "convex", "f", assume_convex)
    if not model.in_cgf_domain(s):
        raise DomainError(f"s={s} outside CGF domain {model.cgf_domain}")
    a = float(model.cgf_prime(s))
    if not f.inside(a):
        raise DomainError(f"psi'(s)={a} outside domain of {f.name}")
    return BoundResult(
        value=float(f(a)) * math.exp(float(model.cgf(s))),
        direction="lower",
        family="convex_times_positive",
        optimizer={"a": a, "s": s},
        validity={"s_in_cgf_domain": True},
    )


# --- exp of convex ------------------------------------------------------------


def _exp_of_convex_exponent(f: DifferentiableFunction, model: DistributionModel):
    def exponent(a):
        a = np.asarray(a, dtype=float)
        out = np.full(a.shape, np.nan)
        m = f.inside(a)
        slope = np.full(a.shape, np.nan)
        slope[m] = f.deriv(a[m])
        m &= model.in_cgf_domain(np.where(m, slope, 0.0))
        out[m] = f.eval(a[m]) - a[m] * slope[m] + model.psi(slope[m])
        return out

    return exponent


def exp_of_convex(f: DifferentiableFunction, model: DistributionModel, grid: GridSpec, assume_convex=False) -> BoundResult:
    """Lower bound ``exp(sup_a f(a) - a f'(a) + psi(f'(a)))`` on E[exp(f(X))]."""
    _require_tag(f, "convex", "f", assume_convex)
    exponent = _exp_of_convex_exponent(f, model)
    best = grid_max(exponent, grid)
    a = best.argmax
    slope = float(f.d(a))
    residual = float(model.psi_prime(slope)) - a
    diagnostics = {"stationarity_residual": residual}
    curvature = None
    if f.second_deriv is not None:
        curvature = float(f.d2(a)) * float(model.psi_second(slope))
        diagnostics["curvature_product"] = curvature
        diagnostics["second_order_ok"] = curvature < 1
    slack = (1.0 + abs(curvature if curvature is not None else 0.0)) * _final_step(grid)
    diagnostics["stationary"] = abs(residual) <= slack
    return BoundResult(
        value=math.exp(best.max),
        direction="lower",
        family="exp_of_convex",
        optimizer={"a": a},
        validity={"feasible_grid": True},
        notes=_skip_note(grid, best.feasible_count),
        diagnostics=diagnostics,
    )


def gaussian_exp_square(mu: float, sigma2: float, s: float) -> tuple[float, float]:
    """Bound and exact value of E[exp(s X^2 / 2)] for X ~ N(mu, sigma2)."""
    if not sigma2 > 0:
        raise PreconditionError(f"sigma2 must be positive, got {sigma2}")
    if s < 0:
        raise PreconditionError(f"s must be nonnegative, got {s}")
    u = 1.0 - sigma2 * s
    if not u > 0:
        raise SingularityError(f"sigma2*s = {sigma2 * s} >= 1: the expectation is infinite")
    bound = math.exp(mu * mu * s / (2.0 * u))
    return bound, bound / math.sqrt(u)


# --- convex times exp-composition --------------------------------------------


def product_exp_composition(
    f: DifferentiableFunction,
    g: DifferentiableFunction,
    model: DistributionModel,
    grid: GridSpec,
    assume_convex=False,
) -> BoundResult:
    """Lower bound ``sup_a exp(f(a) - a f'(a) + psi(f'(a))) g(psi'(f'(a)))``."""
    _require_tag(f, "convex", "f", assume_convex)
    _require_tag(g, "convex", "g", assume_convex)
    exponent = _exp_of_convex_exponent(f, model)

    def objective(a):
        a = np.asarray(a, dtype=float)
        e = exponent(a)
        m = ~np.isnan(e)
        b = np.full(a.shape, np.nan)
        b[m] = model.psi_prime(f.deriv(a[m]))
        m &= g.inside(np.where(m, b, np.nan))
        out = np.full(a.shape, np.nan)
        out[m] = np.exp(e[m]) * g.eval(b[m])
        return out

    best = grid_max(objective, grid)
    b_star = float(model.psi_prime(f.d(best.argmax)))
    return BoundResult(
        value=best.max,
        direction="lower",
        family="convex_times_exp_composition",
        optimizer={"a": best.argmax, "b": b_star},
        validity={"feasible_grid": True},
        notes=_skip_note(grid, best.feasible_count),
    )


def _require_positive_support(model: DistributionModel, strict=True):
    lo = model.support[0]
    if lo < 0 or (strict and lo == 0):
        raise PreconditionError(f"{model.name} support {model.support} is not inside (0, inf)")


def log_expectation_lower(model: DistributionModel, grid: Optional[GridSpec] = None) -> BoundResult:
    """Lower bound ``e sup_alpha alpha exp(psi(-alpha)) psi'(-alpha) ln psi'(-alpha)`` on E[ln X]."""
    _require_positive_support(model)
    grid = grid or ALPHA_GRID

    def objective(alpha):
        alpha = np.asarray(alpha, dtype=float)
        m = model.in_cgf_domain(-alpha)
        d = _masked(-alpha, m, model.psi_prime)
        m &= d > 0
        return _masked(alpha, m, lambda a: math.e * a * np.exp(model.psi(-a)) * model.psi_prime(-a) * np.log(model.psi_prime(-a)))

    best = grid_max(objective, grid)
    return BoundResult(
        value=best.max,
        direction="lower",
        family="convex_times_exp_composition",
        optimizer={"alpha": best.argmax},
        validity={"feasible_grid": True},
        notes=_skip_note(grid, best.feasible_count),
        diagnostics={"jensen_upper": math.log(model.mean)},
    )


def simo_objective(k: int, sigma2: float):
    """Vectorized bracket of the SIMO capacity bound as a function of alpha."""

    def objective(alpha):
        alpha = np.asarray(alpha, dtype=float)
        x = k * sigma2 / (1.0 + 2.0 * alpha * sigma2)
        c = np.log1p(x)
        with np.errstate(divide="ignore"):
            lv = 1.0 + np.log(alpha) - alpha - 0.5 * k * np.log1p(2.0 * alpha * sigma2) + c + np.log(c)
        return np.where(alpha >= 0, np.exp(lv), np.nan)

    return objective


def simo_capacity_lower(k: int, sigma2: float, grid: Optional[GridSpec] = None) -> BoundResult:
    """Lower bound on E[ln(1 + sum_{i<=k} Y_i^2)] for iid Y_i ~ N(0, sigma2)."""
    if k < 1 or not sigma2 > 0:
        raise PreconditionError(f"need k >= 1 and sigma2 > 0, got k={k}, sigma2={sigma2}")
    grid = grid or ALPHA_GRID
    objective = simo_objective(k, sigma2)
    best = grid_max(objective, grid)
    alpha_h = 1.0 / (k * sigma2)
    heuristic = float(objective(np.array([alpha_h]))[0])
    return BoundResult(
        value=best.max,
        direction="lower",
        family="convex_times_exp_composition",
        optimizer={"alpha": best.argmax},
        validity={"feasible_grid": True},
        notes=_skip_note(grid, best.feasible_count),
        diagnostics={
            "jensen_upper": math.log1p(k * sigma2),
            "heuristic_alpha": alpha_h,
            "heuristic_value": heuristic,
        },
    )


def exp_snr_objective(theta: float, gain: float):
    def objective(alpha):
        alpha = np.asarray(alpha, dtype=float)
        y = gain / (theta + gain * alpha)
        c = np.log1p(y)
        with np.errstate(divide="ignore"):
            lv = 1.0 + math.log(theta) + np.log(alpha) - alpha - np.log(theta + gain * alpha) + c + np.log(c)
        return np.where(alpha >= 0, np.exp(lv), np.nan)

    return objective


def exp_snr_capacity_lower(theta: float, gain: float, grid: Optional[GridSpec] = None) -> BoundResult:
    """Lower bound on the ergodic capacity E[ln(1 + gain*Z)], Z ~ Exp(theta).

    Uses psi'(-alpha) = 1 + gain/(theta + gain*alpha) for X = 1 + gain*Z.
    """
    if not (theta > 0 and gain > 0):
        raise PreconditionError(f"need theta > 0 and gain > 0, got {theta}, {gain}")
    grid = grid or ALPHA_GRID
    best = grid_max(exp_snr_objective(theta, gain), grid)
    return BoundResult(
        value=best.max,
        direction="lower",
        family="convex_times_exp_composition",
        optimizer={"alpha": best.argmax},
        validity={"feasible_grid": True},
        notes=_skip_note(grid, best.feasible_count),
        diagnostics={"jensen_upper": math.log1p(gain / theta)},
    )


def _power_convex(t, s):
    return (t + s <= 0) | (t + s >= 1)


def power_moment_objective(model: DistributionModel, t: float):
    """``(alpha e)^s phi(-alpha s) psi'(-alpha s)^(t+s)`` as a function of (alpha, s)."""

    def objective(alpha, s):
        alpha, s = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(s, dtype=float))
        u = -alpha * s
        m = model.in_cgf_domain(u) & (s >= 0) & (alpha >= 0) & _power_convex(t, s)
        d = _masked(u, m, model.psi_prime)
        m &= d > 0
        out = np.full(alpha.shape, np.nan)
        if not np.any(m):
            return out
        a, sv, uv, dv = alpha[m], s[m], u[m], d[m]
        with np.errstate(divide="ignore", invalid="ignore"):
            lead = np.where(sv == 0, 0.0, sv * (np.log(a) + 1.0))
        out[m] = np.exp(lead + model.psi(uv) + (t + sv) * np.log(dv))
        return out

    return objective


def power_moment_lower(
    model: DistributionModel,
    t: float,
    s: Union[float, GridSpec],
    grid: Optional[GridSpec] = None,
) -> BoundResult:
    """Lower bound on E[X^t] for X >= 0, optimized over alpha (and s if gridded).

    ``s`` is either fixed or a :class:`GridSpec`, in which case (alpha, s) are
    searched jointly and points where x^(t+s) is not convex are skipped.
    """
    _require_positive_support(model, strict=False)
    objective = power_moment_objective(model, t)
    if isinstance(s, GridSpec):
        grid = grid or FIG3_ALPHA_GRID
        best = grid_max_2d(objective, grid, s)
        alpha, s_star = best.argmax
        total = grid.points().size * s.points().size
        notes = f"skipped {total - best.feasible_count} of {total} grid points"
    else:
        if s < 0 or not _power_convex(t, s):
            raise PreconditionError(f"s={s} must be >= 0 with t+s <= 0 or t+s >= 1 (t={t})")
        grid = grid or ALPHA_GRID
        best = grid_max(lambda a: objective(a, s), grid)
        alpha, s_star = best.argmax, float(s)
        notes = _skip_note(grid, best.feasible_count)
    return BoundResult(
        value=best.max,
        direction="lower",
        family="convex_times_exp_composition",
        optimizer={"alpha": alpha, "s": s_star},
        validity={"feasible_grid": True},
        notes=notes,
    )


def estimation_error_moment_lower(n: int, sigma2: float, t: float, zeta: float, s: float) -> float:
    """Lower bound on E|sample mean - theta|^t at alpha = zeta*n/sigma2."""
    if n < 1 or not sigma2 > 0:
        raise PreconditionError(f"need n >= 1 and sigma2 > 0, got n={n}, sigma2={sigma2}")
    if not 0 < t <= 2:
        raise PreconditionError(f"t must lie in (0, 2], got {t}")
    if not zeta > 0:
        raise PreconditionError(f"zeta must be positive, got {zeta}")
    if not (s >= 1 - t / 2 or s <= -t / 2):
        raise PreconditionError(f"s={s} must satisfy s >= 1 - t/2 or s <= -t/2")
    if not 1 + 2 * zeta * s > 0:
        raise PreconditionError(f"1 + 2*zeta*s = {1 + 2 * zeta * s} must be positive")
    log_value = (
        0.5 * t * math.log(sigma2 / n)
        + s * (math.log(zeta) + 1.0)
        - (0.5 * (t + 1) + s) * math.log1p(2 * zeta * s)
    )
    return math.exp(log_value)


def gap_factor_objective(t: float):
    """Reduced gap-factor expression with zeta = 1/(t+1) already substituted."""

    def objective(s):
        s = np.asarray(s, dtype=float)
        w = t + 2 * s + 1
        lv = 0.5 * (t + 1) * (math.log(t + 1) - np.log(w)) + s * (1.0 - np.log(w))
        return np.where(s > 1 - t / 2, np.exp(lv), np.nan)

    return objective


def gap_factor_mu(t: float, s_grid: Optional[GridSpec] = None) -> tuple[float, float]:
    """Gap factor ``mu_t`` between the Jensen upper bound and the lower bound.

    The supremum is over the open set s > 1 - t/2; the lower grid endpoint is
    excluded. The default grid refines around the incumbent so a supremum
    approached at the open endpoint is resolved.
    """
    if not 0 < t <= 2:
        raise PreconditionError(f"t must lie in (0, 2], got {t}")
    if s_grid is None:
        s_grid = GridSpec(1 - t / 2, 10.0, 0.001, DEFAULT_REFINE)
    if s_grid.hi <= 1 - t / 2:
        raise PreconditionError(f"s grid [{s_grid.lo}, {s_grid.hi}] lies outside s > {1 - t / 2}")
    best = grid_max(gap_factor_objective(t), s_grid)
    return best.max, best.argmax


# --- product of two convex ----------------------------------------------------


def product_two_convex_joint(
    f: DifferentiableFunction,
    g: DifferentiableFunction,
    m_x: float,
    m_y: float,
    m_xy: float,
    orientation: str = "convex_pair",
    assume_convex=False,
) -> BoundResult:
    """Bound ``f(E[X] g(E[XY]/E[X]) / g(E[Y])) g(E[Y])`` on E[f(X) g(Y)], X, Y >= 0.

    A lower bound for a convex pair, an upper bound for a concave pair.
    """
    if orientation not in ("convex_pair", "concave_pair"):
        raise PreconditionError(f"unknown orientation {orientation!r}")
    want = "convex" if orientation == "convex_pair" else "concave"
    _require_tag(f, want, "f", assume_convex and want == "convex")
    _require_tag(g, want, "g", assume_convex and want == "convex")
    if not m_x > 0:
        raise PreconditionError(f"E[X] must be positive, got {m_x}")
    c = m_xy / m_x
    for name, pt in (("E[Y]", m_y), ("E[XY]/E[X]", c)):
        if not g.inside(pt):
            raise DomainError(f"{name}={pt} outside domain of {g.name}")
    g_y = float(g(m_y))
    g_c = float(g(c))
    if not g_y > 0:
        raise ValidityError(f"g(E[Y]) = {g_y} must be positive", ["g_mean_positive"])
    a = m_x * g_c / g_y
    if not f.inside(a):
        raise DomainError(f"tangency point {a} outside domain of {f.name}")
    fa = float(f(a))
    fpa = float(f.d(a))
    validity = {
        "g_mean_positive": True,
        "intercept_nonnegative": fa - a * fpa >= 0,
        "slope_nonnegative": (a * fpa >= 0) if want == "convex" else (fpa >= 0),
    }
    failed = [k for k, ok in validity.items() if not ok]
    if failed:
        raise ValidityError(f"validity condition(s) failed at a*={a}: {', '.join(failed)}", failed)
    return BoundResult(
        value=fa * g_y,
        direction="lower" if want == "convex" else "upper",
        family="product_of_two_convex",
        optimizer={"a": a, "b": m_y, "c": c},
        validity=validity,
    )


def product_two_convex(
    f: DifferentiableFunction,
    g: DifferentiableFunction,
    m1: float,
    m2: float,
    orientation: str = "convex_pair",
    assume_convex=False,
) -> BoundResult:
    """Bound on E[f(X) g(X)] from the first two moments of X >= 0."""
    if not m1 > 0:
        raise PreconditionError(f"E[X] must be positive, got {m1}")
    if m2 < m1 * m1:
        raise PreconditionError(f"E[X^2]={m2} < E[X]^2={m1 * m1}")
    return product_two_convex_joint(f, g, m1, m1, m2, orientation, assume_convex)


def capacity_variance_upper(theta: float, gain: float, grid: Optional[GridSpec] = None) -> BoundResult:
    """Upper bound on Var[ln(1 + gain*Z)] for Z ~ Exp(theta).

    Combines the concave-pair upper bound on the second moment with the
    capacity lower bound on the first.
    """
    from .funcs import catalog

    c = catalog("log1p_gain", [gain])
    upper = product_two_convex(c, c, 1.0 / theta, 2.0 / theta**2, "concave_pair")
    lower = exp_snr_capacity_lower(theta, gain, grid)
    U, L = upper.value, lower.value
    validity = {"lower_nonnegative": L >= 0, "second_moment_dominates": U >= L * L}
    failed = [k for k, ok in validity.items() if not ok]
    if failed:
        raise ValidityError(f"variance bound is vacuous (U={U}, L={L})", failed)
    return BoundResult(
        value=U - L * L,
        direction="upper",
        family="product_of_two_convex",
        optimizer={"a": upper.optimizer["a"], "alpha": lower.optimizer["alpha"]},
        validity=validity,
        notes=lower.notes,
        diagnostics={"second_moment_upper": U, "capacity_lower": L},
    )
