import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, optimize, special, stats

from jensenlike import bounds as B
from jensenlike import distributions as D
from jensenlike import oracles as O
from jensenlike.errors import (
    DomainError,
    InfeasibleError,
    PreconditionError,
    SingularityError,
    ValidityError,
)
from jensenlike.funcs import DifferentiableFunction, catalog
from jensenlike.optimize import DEFAULT_REFINE, GridSpec

from conftest import rel_err

WIDE = GridSpec(-5.0, 5.0, 0.001)


def geometric_power_exact(p, s):
    return float(p / (1 - p) * mpmath.polylog(-s, 1 - p))


def gauss_quad(h, mu=0.0, sigma=1.0, width=30.0):
    val, _ = integrate.quad(lambda x: h(x) * stats.norm.pdf(x, mu, sigma), mu - width, mu + width, limit=400)
    return val


class TestConvexTimesPositive:
    def test_no_weight_is_jensen(self):
        res = B.product_convex_positive(catalog("power", [2.0]), 1.0, 3.0)
        assert res.value == 9.0
        assert res.direction == "lower" and res.optimizer["a"] == 3.0

    def test_against_joint_expectation(self):
        # X ~ Exp(1), g(x) = x: E[x^2 * x] = 6 >= f(E[X^2]/E[X]) E[X] = 4
        res = B.product_convex_positive(catalog("power", [2.0]), 1.0, 2.0)
        assert res.value == 4.0 <= math.gamma(4)

    def test_rejects_nonconvex(self):
        with pytest.raises(PreconditionError):
            B.product_convex_positive(catalog("power", [0.5]), 1.0, 1.0)

    def test_unknown_tag_needs_override(self):
        f = DifferentiableFunction(eval=np.square, deriv=lambda x: 2 * x)
        with pytest.raises(PreconditionError):
            B.product_convex_positive(f, 1.0, 2.0)
        assert B.product_convex_positive(f, 1.0, 2.0, assume_convex=True).value == 4.0

    def test_zero_weight_mean(self):
        with pytest.raises(PreconditionError):
            B.product_convex_positive(catalog("power", [2.0]), 0.0, 1.0)

    def test_tangency_outside_domain(self, neg_log):
        with pytest.raises(DomainError):
            B.product_convex_positive(neg_log, 1.0, -1.0)


class TestEmpiricalEntropy:
    def test_binary(self):
        b1, b2 = B.empirical_entropy_lower((0.3, 0.7), 100)
        H = -(0.3 * math.log(0.3) + 0.7 * math.log(0.7))
        assert b1 == pytest.approx(H - 0.3 * math.log1p(0.7 / 30) - 0.7 * math.log1p(0.3 / 70), rel=1e-14)
        assert b2 == pytest.approx(H - 0.01, rel=1e-14)
        assert b2 <= b1 <= H

    def test_below_simulation(self):
        b1, _ = B.empirical_entropy_lower((0.1, 0.2, 0.3, 0.4), 50)
        sim = O.simulate_empirical_entropy((0.1, 0.2, 0.3, 0.4), 50, 20_000, seed=3)
        assert b1 <= sim.value + 5 * sim.uncertainty

    def test_zero_probability_letter_ignored_by_b1(self):
        b1, _ = B.empirical_entropy_lower((0.0, 0.5, 0.5), 10)
        assert b1 == pytest.approx(math.log(2) - math.log1p(0.1), rel=1e-14)

    def test_table_validation(self):
        with pytest.raises(PreconditionError):
            B.PmfTable((0.5, 0.6))
        with pytest.raises(PreconditionError):
            B.empirical_entropy_lower((0.5, 0.5), 0)

    @given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8), st.integers(1, 1000))
    def test_ordering(self, w, N):
        P = tuple(np.asarray(w) / sum(w))
        P = P[:-1] + (1.0 - math.fsum(P[:-1]),)
        b1, b2 = B.empirical_entropy_lower(P, N)
        H = B.PmfTable(P).entropy
        assert b2 <= b1 + 1e-12 and b1 <= H


class TestMomentTwoPoint:
    def test_exponential(self):
        # E[X] = 1, E[X^2] = 2 for Exp(1); E[X^3] = 6
        res = B.moment_two_point(1.0, 2.0, 3.0, 1.0)
        assert res.value == pytest.approx(4.0, rel=1e-14)
        assert res.value <= math.gamma(4)

    def test_negative_exponent_side(self):
        # s - t <= 0: E[X^-1] >= E[X]^... checked against Gamma(3) moments
        k = 3.0
        moments = {t: math.gamma(k + t) / math.gamma(k) for t in (-1.0, 0.0, 1.0)}
        res = B.moment_two_point(moments[0.0], moments[1.0], -1.0, 0.0)
        assert res.value <= moments[-1.0]

    def test_forbidden_window(self):
        with pytest.raises(PreconditionError):
            B.moment_two_point(1.0, 2.0, 1.5, 1.0)


class TestGuessing:
    @pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.9])
    def test_exact_at_endpoints(self, p):
        assert B.guessing_moment_lower(p, 1.0) == pytest.approx(1 / p, rel=1e-14)
        assert B.guessing_moment_lower(p, 2.0) == pytest.approx((2 - p) / p**2, rel=1e-14)

    def test_example_value(self):
        assert B.guessing_moment_lower(0.3, 1.5) == pytest.approx(1.7**0.5 / 0.3**1.5, rel=1e-14)

    @pytest.mark.parametrize("p,s", [(0.3, 1.5), (0.1, 1.2), (0.5, 1.8), (0.9, 1.01)])
    def test_interior_is_upper_bound(self, p, s):
        res = B.guessing_moment_bound(p, s)
        exact = geometric_power_exact(p, s)
        assert res.direction == "upper"
        assert res.value >= exact

    @pytest.mark.parametrize("p,s", [(0.3, 2.5), (0.1, 3.0), (0.5, 0.5), (0.7, -1.0)])
    def test_exterior_is_lower_bound(self, p, s):
        res = B.guessing_moment_bound(p, s)
        exact = geometric_power_exact(p, s)
        assert res.direction == "lower"
        assert res.value <= exact * (1 + 1e-12)

    def test_out_of_range(self):
        with pytest.raises(PreconditionError):
            B.guessing_moment_lower(0.3, 2.5)
        with pytest.raises(PreconditionError):
            B.guessing_moment_lower(0.0, 1.5)


class TestExpTilted:
    def test_gaussian_square(self):
        # E[X^2 e^X] = 2 e^(1/2) for N(0,1); bound f(psi'(1)) e^(psi(1)) = e^(1/2)
        res = B.exp_tilted(catalog("power", [2.0]), D.gaussian(0.0, 1.0), 1.0)
        assert res.value == pytest.approx(math.exp(0.5), rel=1e-14)
        assert res.value <= gauss_quad(lambda x: x * x * math.exp(x))

    def test_outside_cgf_domain(self):
        with pytest.raises(DomainError):
            B.exp_tilted(catalog("power", [2.0]), D.exponential(1.0), 2.0)


class TestExpOfConvex:
    @pytest.mark.parametrize("mu,sigma2,s", [(1.0, 0.5, 1.0), (0.0, 1.0, 0.5), (2.0, 0.2, 3.0)])
    def test_matches_closed_form(self, mu, sigma2, s):
        res = B.exp_of_convex(catalog("half_quadratic", [s]), D.gaussian(mu, sigma2), WIDE.with_refine())
        bound, exact = B.gaussian_exp_square(mu, sigma2, s)
        assert rel_err(res.value, bound) <= 1e-6
        assert res.diagnostics["stationary"] and res.diagnostics["second_order_ok"]
        assert res.value <= exact

    def test_example(self):
        bound, exact = B.gaussian_exp_square(1.0, 0.5, 1.0)
        assert bound == pytest.approx(math.e, rel=1e-15)
        assert exact == pytest.approx(math.e * math.sqrt(2), rel=1e-15)
        oracle = gauss_quad(lambda x: math.exp(x * x / 2), 1.0, math.sqrt(0.5))
        assert exact == pytest.approx(oracle, rel=1e-8)

    def test_singular(self):
        with pytest.raises(SingularityError):
            B.gaussian_exp_square(0.0, 1.0, 1.0)
        with pytest.raises(PreconditionError):
            B.gaussian_exp_square(0.0, 1.0, -0.5)

    def test_grid_skips_are_reported(self, neg_log):
        # E[1/X] for X = 1 + chi2_2, with a <= 0 on the grid outside the domain
        res = B.exp_of_convex(neg_log, D.shifted_chi_square_sum(2, 1.0), GridSpec(-5, 20, 0.01))
        assert res.notes == "skipped 501 of 2501 grid points"
        oracle = 0.5 * math.exp(0.5) * special.exp1(0.5)
        assert res.value <= oracle

    def test_all_infeasible(self):
        with pytest.raises(InfeasibleError):
            B.exp_of_convex(catalog("exp_scale", [1.0]), D.exponential(0.1), GridSpec(5, 6, 0.1))


class TestProductExpComposition:
    def test_gaussian_against_quadrature(self):
        f, g = catalog("half_quadratic", [0.5]), catalog("power", [2.0])
        res = B.product_exp_composition(f, g, D.gaussian(1.0, 1.0), WIDE)
        exact = math.sqrt(2) * math.exp(0.5) * 6.0
        assert exact == pytest.approx(gauss_quad(lambda x: math.exp(x * x / 4) * x * x, 1.0), rel=1e-8)
        assert res.value <= exact
        assert res.value == pytest.approx(9.41360405961, rel=1e-10)
        assert res.optimizer["b"] == pytest.approx(float(D.gaussian(1, 1).cgf_prime(0.5 * res.optimizer["a"])))

    def test_reduces_to_exp_of_convex_when_g_is_one(self):
        f = catalog("half_quadratic", [1.0])
        one = catalog("power", [0.0])
        a = B.product_exp_composition(f, one, D.gaussian(1.0, 0.5), WIDE)
        b = B.exp_of_convex(f, D.gaussian(1.0, 0.5), WIDE)
        assert a.value == pytest.approx(b.value, rel=1e-12)


class TestLogExpectation:
    @pytest.mark.parametrize("k", [1, 10, 100])
    def test_simo_equals_generic(self, k):
        a = B.simo_capacity_lower(k, 1.0)
        b = B.log_expectation_lower(D.shifted_chi_square_sum(k, 1.0))
        assert a.value == pytest.approx(b.value, rel=1e-12)

    @pytest.mark.parametrize("theta", [0.2, 1.0, 5.0])
    def test_exp_snr_equals_generic(self, theta):
        a = B.exp_snr_capacity_lower(theta, 5.0)
        b = B.log_expectation_lower(D.affine_of(D.exponential(theta), 1.0, 5.0))
        assert a.value == pytest.approx(b.value, rel=1e-12)

    @pytest.mark.parametrize("theta,lower,exact", [(0.2, 1.88498, 2.79069), (1.0, 1.05729, 1.49335), (5.0, 0.48123, 0.59635)])
    def test_exp_snr_values(self, theta, lower, exact):
        res = B.exp_snr_capacity_lower(theta, 5.0)
        # E ln(1 + gZ) = e^(theta/g) E1(theta/g)
        oracle = math.exp(theta / 5.0) * special.exp1(theta / 5.0)
        assert oracle == pytest.approx(exact, abs=1e-5)
        assert res.value == pytest.approx(lower, abs=1e-5)
        assert res.value <= oracle <= res.diagnostics["jensen_upper"]

    def test_simo_heuristic_diagnostics(self):
        res = B.simo_capacity_lower(100, 1.0)
        assert res.diagnostics["heuristic_alpha"] == 0.01
        assert res.diagnostics["heuristic_value"] <= res.value + 1e-12
        assert res.diagnostics["jensen_upper"] == pytest.approx(math.log(101))

    def test_simo_against_monte_carlo(self):
        res = B.simo_capacity_lower(3, 2.0)
        est = O.mc_expectation(D.shifted_chi_square_sum(3, 2.0), np.log, 400_000, seed=6)
        assert res.value <= est.value + 5 * est.uncertainty

    def test_requires_positive_support(self):
        with pytest.raises(PreconditionError):
            B.log_expectation_lower(D.gaussian(1.0, 1.0))
        with pytest.raises(PreconditionError):
            B.log_expectation_lower(D.exponential(1.0))

    def test_point_mass_exact(self):
        res = B.log_expectation_lower(D.degenerate(3.0), GridSpec(0, 10, 0.001, DEFAULT_REFINE))
        assert res.value == pytest.approx(math.log(3.0), rel=1e-6)


class TestPowerMoment:
    def test_exponential_half_moment(self):
        res = B.power_moment_lower(D.exponential(1.0), 0.5, B.FIG3_S_GRID)
        assert res.value == pytest.approx(0.7572200605, rel=1e-9)
        assert res.value <= math.gamma(1.5)

    def test_fixed_s(self):
        model = D.bernoulli_sum(50, 0.2)
        res = B.power_moment_lower(model, 0.5, 1.0)
        exact = O.discrete_expectation(O.binomial_pmf(50, 0.2), lambda k: k**0.5, 0.0).value
        assert res.optimizer["s"] == 1.0
        assert res.value <= exact

    def test_fixed_s_forbidden(self):
        with pytest.raises(PreconditionError):
            B.power_moment_lower(D.exponential(1.0), 0.5, 0.2)

    def test_objective_zero_s_is_plain_mgf_limit(self):
        obj = B.power_moment_objective(D.exponential(1.0), 1.0)
        assert float(obj(np.array(0.7), np.array(0.0))) == pytest.approx(1.0)

    def test_estimation_error(self):
        v = B.estimation_error_moment_lower(100, 1.0, 1.0, 0.5, 0.5)
        assert v == pytest.approx(0.1 * math.sqrt(math.e / 2) / 1.5**1.5, rel=1e-14)
        # E|mean - theta| = sqrt(2 sigma2 / (pi n))
        assert v <= math.sqrt(2 / (math.pi * 100))

    def test_estimation_error_domain(self):
        with pytest.raises(PreconditionError):
            B.estimation_error_moment_lower(10, 1.0, 1.0, 0.5, 0.2)
        with pytest.raises(PreconditionError):
            B.estimation_error_moment_lower(10, 1.0, 3.0, 0.5, 1.0)


class TestGapFactor:
    @pytest.mark.parametrize("t", [0.25, 0.5, 1.0, 1.5, 2.0])
    def test_against_bounded_minimizer(self, t):
        def neg(s):
            w = t + 2 * s + 1
            return -((t + 1) / w) ** ((t + 1) / 2) * (math.e / w) ** s

        lo = 1 - t / 2
        res = optimize.minimize_scalar(neg, bounds=(lo, 10.0), method="bounded", options={"xatol": 1e-10})
        mu, s_star = B.gap_factor_mu(t)
        assert mu == pytest.approx(-res.fun, abs=1e-5)
        assert lo < s_star <= 10.0

    def test_values(self):
        assert B.gap_factor_mu(1.0)[0] == pytest.approx(0.6345924158, rel=1e-9)
        assert abs(B.gap_factor_mu(2.0)[0] - 1.0) <= 1e-3

    def test_plain_grid_misses_open_endpoint(self):
        mu, _ = B.gap_factor_mu(2.0, GridSpec(0.0, 10.0, 0.001))
        assert 1e-3 < 1.0 - mu < 2e-3

    def test_bad_t(self):
        with pytest.raises(PreconditionError):
            B.gap_factor_mu(2.5)


class TestProductTwoConvex:
    def test_convex_pair(self):
        f, g = catalog("exp_scale", [0.1]), catalog("power", [2.0])
        res = B.product_two_convex(f, g, 1.0, 2.0)
        assert res.optimizer["a"] == pytest.approx(4.0)
        assert res.value == pytest.approx(math.exp(0.4), rel=1e-14)
        # X ~ Exp(1): E[e^(X/10) X^2] = 2 / 0.9^3
        assert res.value <= 2 / 0.9**3

    def test_validity_failure_reports_flags(self):
        sq = catalog("power", [2.0])
        with pytest.raises(ValidityError) as info:
            B.product_two_convex(sq, sq, 1.0, 2.0)
        assert "intercept_nonnegative" in info.value.failed

    def test_concave_pair_is_upper(self):
        c = catalog("log1p_gain", [5.0])
        res = B.product_two_convex(c, c, 1.0, 2.0, "concave_pair")
        exact = integrate.quad(lambda z: math.log1p(5 * z) ** 2 * math.exp(-z), 0, math.inf)[0]
        assert res.direction == "upper"
        assert res.value == pytest.approx(3.655386166888601, rel=1e-12)
        assert res.value >= exact

    def test_orientation_tags_checked(self):
        c = catalog("log1p_gain", [5.0])
        with pytest.raises(PreconditionError):
            B.product_two_convex(c, c, 1.0, 2.0, "convex_pair")
        with pytest.raises(PreconditionError):
            B.product_two_convex(c, c, 1.0, 2.0, "sideways")

    def test_moment_inconsistency(self):
        sq = catalog("power", [2.0])
        with pytest.raises(PreconditionError):
            B.product_two_convex(sq, sq, 2.0, 3.0)

    def test_joint_independent_reduces_to_product_of_jensens(self):
        # X, Y independent: E[XY]/E[X] = E[Y], so a* = E[X]
        f, g = catalog("exp_scale", [0.1]), catalog("exp_scale", [0.2])
        res = B.product_two_convex_joint(f, g, 1.5, 2.0, 3.0)
        assert res.value == pytest.approx(math.exp(0.15) * math.exp(0.4), rel=1e-14)


class TestCapacityVariance:
    def test_example(self):
        res = B.capacity_variance_upper(1.0, 5.0)
        m1 = math.exp(0.2) * special.exp1(0.2)
        m2 = integrate.quad(lambda z: math.log1p(5 * z) ** 2 * math.exp(-z), 0, math.inf)[0]
        assert res.value == pytest.approx(2.537533794908612, rel=1e-12)
        assert res.diagnostics["second_moment_upper"] >= m2
        assert res.value >= m2 - m1 * m1

    @pytest.mark.parametrize("theta", [0.2, 0.5, 2.0, 5.0])
    def test_dominates_true_variance(self, theta):
        res = B.capacity_variance_upper(theta, 5.0)
        m1 = math.exp(theta / 5) * special.exp1(theta / 5)
        f = lambda z: math.log1p(5 * z) ** 2 * theta * math.exp(-theta * z)
        m2 = integrate.quad(f, 0, math.inf)[0]
        assert res.value >= m2 - m1 * m1


class TestBoundResult:
    def test_to_dict_roundtrip(self):
        d = B.guessing_moment_bound(0.3, 1.5).to_dict()
        assert d["direction"] == "upper" and d["valid"] is True
        assert set(d) >= {"value", "family", "optimizer", "validity", "notes", "diagnostics"}
