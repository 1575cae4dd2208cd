"""CBC lattice rules for L2 approximation in weighted Korobov spaces with general weights."""

from .approximation import (
    KernelProductFunction,
    aliased_coefficients,
    apply_lattice_algorithm,
    exact_l2_error,
    grid_l2_error,
    kernel_product_l2_error,
    lattice_dft,
    make_test_function,
    random_polynomial,
    sample_lattice,
)
from .bounds import (
    approx_error_bound,
    approx_error_envelope,
    auto_M,
    bound_report,
    cbc_bound_final,
    lambda_grid,
    theta_average_bound,
    simplified_bound,
    tau,
    weight_sum,
    zeta_power_inequality,
)
from .cbc import CBCResult, cbc_construct, exhaustive_search
from .criterion import (
    OracleResult,
    class_sums,
    e_d,
    e_d_oracle,
    s_d,
    s_d_oracle,
    t_ds,
    t_ds_candidates,
    theta_s,
    theta_s_oracle,
    worst_case_integration_error,
    worst_case_integration_error_oracle,
)
from .errors import BudgetExceededError
from .index_set import IndexSet, box_scan_index_set, cardinality_bound, enumerate_index_set
from .korobov import CriterionContext, FourierPolynomial, SpaceParams, kernel_phi, r, zeta
from .lattice import GeneratingVector, is_prime, primes_between
from .vectorfile import read_vector, write_vector
from .weights import WeightModel, check_decay_condition

__version__ = "0.1.0"
