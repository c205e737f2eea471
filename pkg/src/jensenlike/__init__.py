"""Jensen-like lower bounds from optimized tangency points."""
from .bounds import (
    BoundResult,
    PmfTable,
    capacity_variance_upper,
    empirical_entropy_lower,
    estimation_error_moment_lower,
    exp_of_convex,
    exp_snr_capacity_lower,
    exp_tilted,
    gap_factor_mu,
    gaussian_exp_square,
    guessing_moment_bound,
    guessing_moment_lower,
    log_expectation_lower,
    moment_two_point,
    power_moment_lower,
    product_convex_positive,
    product_exp_composition,
    product_two_convex,
    product_two_convex_joint,
    simo_capacity_lower,
)
from .distributions import (
    DistributionModel,
    affine_of,
    bernoulli_sum,
    degenerate,
    exponential,
    gaussian,
    geometric,
    sample_mean_sq_error,
    shifted_chi_square_sum,
)
from .funcs import DifferentiableFunction, catalog, tangent_at
from .optimize import GridSpec, grid_max, grid_max_2d
from .oracles import OracleEstimate, discrete_expectation, mc_expectation, quad_expectation

__version__ = "0.1.0"
