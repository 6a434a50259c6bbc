"""udwchain: chain-mapped emitter-field dynamics with certified truncation error.

A localized detector (two-level system or harmonic oscillator) coupled to a
1+1D massless scalar field is mapped onto a nearest-neighbor bosonic chain;
the joint state is evolved non-perturbatively (covariance propagation or
TEBD) and field energy densities are reconstructed from the chain-mode
second moments, for vacuum, thermal and uniformly-accelerated scenarios.
"""

from ._version import __version__
from .chain import (
    ChainCoefficients,
    ModelParams,
    MomentVector,
    chain_coefficients,
    free_excitation_amplitudes,
    thermal_chain_coefficients,
    thermal_moments,
    thermal_poly_coeffs,
    vacuum_coefficients,
    vacuum_poly_coeffs,
)
from .gaussian import (
    CovarianceState,
    build_generator,
    covariance_error_bound,
    detector_occupation_ho,
    evolve_covariance,
    initial_covariance,
    run_gaussian,
    second_moments,
)
from .highprec import (
    PrecisionConfig,
    cholesky_lower,
    hurwitz_zeta,
    integrate_weight_moment_numeric,
    invert_lower_triangular,
    matrix_exponential,
    polygamma,
)
from .mps import (
    MPSState,
    TEBDConfig,
    build_gates,
    dt_diagnostic,
    measure_correlators,
    measure_sigma_z,
    run_mps,
    state_error_bound,
    tebd_evolve,
)
from .observables import (
    DensityProfile,
    SecondMoments,
    boost_resting_density,
    default_rest_grid,
    default_unruh_grid,
    quiet_zone_statistic,
    source_term,
    thermal_background,
    thermal_density,
    thermal_reconstruction_table,
    total_density_at_rest,
    unruh_density,
    unruh_reconstruction_table,
    vacuum_density,
)
from .perturbative import perturbative_density

__all__ = [name for name in dir() if not name.startswith("_")]
