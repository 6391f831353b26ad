"""msslab: desk-scale experiments on short-interval statistics of Hecke eigenvalue sequences."""

__version__ = "0.1.0"

from .satake import (  # noqa: F401
    FormSpec,
    HeckeTable,
    SatakeParams,
    build_coefficient_table,
    complete_homogeneous,
    ingest_ap_file,
    multi_index_prime_power,
    prime_power_eigenvalue,
    sample_tempered_satake,
    satake_from_gl2_lift,
    schur_determinant,
)
from .rankin import (  # noqa: F401
    H_f_one,
    empirical_rs_slope,
    local_Pn_value,
    local_rs_factor,
    rs_multi_index_sum,
    weighted_sin_sum,
)
from .shortsum import (  # noqa: F401
    admissible_params,
    bf_constant,
    error_term_E,
    interval_sum,
    main_term_P,
    mean_square,
    theorem1_experiment,
    theorem2_experiment,
)
from .specfn import (  # noqa: F401
    bessel_j,
    log_gamma_complex,
    omega_main_term,
    omega_quadrature,
    sine_square_integral,
)
