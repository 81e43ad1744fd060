"""Suspension flows over Diophantine circle rotations, with prime-time orbit statistics."""

from .cf import (
    ContinuedFraction,
    DiophantineParams,
    construct_alpha_in_D,
    convergents,
    is_prime,
    nearest_integer_distance,
    verify_diophantine,
)
from .charsums import (
    BoundFit,
    char_bound_report,
    char_sum_closed_form,
    char_sum_direct,
    deviation_qn,
    fit_exponential_bound,
    horizon_multiplier,
    uniform_sup_check,
)
from .equi import (
    box_discrepancy,
    default_start_grid,
    default_test_functions,
    integer_orbit_average,
    prime_orbit_average,
    residue_class_average,
    run_experiment,
)
from .errors import (
    AmbiguousBoundaryError,
    BudgetExhaustedError,
    ConfigError,
    FitError,
    PositivityError,
    PrecisionError,
    PrimeflowError,
    QuadratureError,
    ValidationError,
)
from .flow import (
    FlowPoint,
    FlowSampler,
    FlowStep,
    TorusFunction,
    flow_metric,
    flow_time_t,
    near_return_check,
    normalize_roof,
    roof_from_reparam,
)
from .primes import PrimeTable, li_x, pi_x, pi_x_q_a, sieve, sw_ratio
from .roof import AnalyticRoof, constant_roof, default_roof, load_roof, save_roof
from .rotation import (
    CirclePoint,
    OrbitErrorBudget,
    birkhoff_sum,
    cocycle_check,
    default_grid,
    rotate_n,
)

__version__ = "0.1.0"
