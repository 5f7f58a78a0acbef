"""Exact and high-precision tools for the Bernoulli clock."""
from .bernstein import (
    BernsteinExpansion,
    DistributionVector,
    bernoulli_in_bernstein,
    bernstein_density,
    classical_bernstein,
    clock_density_coefficients,
    conjecture1_brackets,
    conjecture1_gap,
    conjecture2_probe,
    delta_vector,
    max_multiplier_c,
    monomial_to_bernstein,
    p_vector_exact,
    to_bernstein,
)
from .circular import b1_conv_power, circular_conv, circular_power, monomial_circular_conv, quadrature_conv_oracle
from .clock import (
    ClockBatch,
    ClockSample,
    JointTable,
    MultisetSpec,
    TransitionMatrix,
    enumerate_joint,
    joint_recursion,
    multiset_permutations,
    p_vector_markov,
    q_matrix,
    scan_word,
    simulate_batch,
    simulate_clock,
)
from .errors import ConvergenceError, DomainError, PrecisionError
from .exact import (
    RationalPolynomial,
    bernoulli_number,
    bernoulli_poly,
    normalized_bernoulli_poly,
    poly_antiderivative_zero_mean,
    poly_derivative,
    poly_eval,
)
from .renewal import (
    RootSet,
    WrappedGammaParams,
    expected_longest_run,
    exponential_poly_roots,
    mean_function,
    mean_run_length,
    renewal_mc_oracle,
    root_moments,
    wrapped_gamma_bernoulli_expansion,
    wrapped_gamma_closed_form,
    wrapped_gamma_density_series,
)
from .sumdist import (
    PiecewiseCdf,
    a_count,
    cdf_beta12_sum,
    cdf_general,
    complete_count,
    dist_D,
    prob_L_ge,
)

__version__ = "0.1.0"
