"""Resonances of randomly coupled half-line Jacobi operators.

The package samples tridiagonal beta ensembles, couples them to the free
half-line operator, and studies the resulting finite-rank perturbation
through a polynomial recursion: eigenvalues and resonances appear as the
zeros of a single monic polynomial, inside or outside the unit disk under
the Joukowsky map z + 1/z.  Supporting modules verify the coefficient
identities, the change-of-variables Jacobian, and the closed-form joint
zero density against direct Monte Carlo.
"""

from .density import (
    DensityParams,
    LogDensityValue,
    NormalizationConstants,
    SingularConfigurationError,
    log_density_kappa1,
    log_density_random_kappa,
    normalization_constants,
    wedge_factor,
)
from .ensembles import (
    EnsembleParams,
    KappaDistribution,
    RandomStream,
    TridiagonalSample,
    UnsupportedVariantError,
    chi_sample,
    householder_tridiagonalize,
    normal_sample,
    sample_de_tridiagonal,
    sample_dense_gaussian,
    sample_kappa,
)
from .experiments import (
    ExperimentReport,
    SamplingResult,
    dense_vs_tridiagonal_test,
    density_mc_compare_n1,
    density_normalization_n1,
    identity_suite,
    jacobian_suite,
    ks_test,
    membership_suite,
    random_coefficients,
    roundtrip_suite,
    run_resonance_sampling,
    semicircle_moment_test,
    sum_zeros_test,
)
from .geronimo_case import (
    GCSequence,
    InversionError,
    RealPolynomial,
    gc_forward,
    gc_inverse,
    k_from_lstar,
    k_from_lstar_odd,
    reversal,
)
from .identities import (
    IdentityReport,
    check_zero_coefficient_identities,
    stepwise_jacobian_fd,
    total_jacobian_fd,
)
from .jacobi import (
    JacobiCoefficients,
    TruncatedOperator,
    assemble_coupled,
    eigenvalues_in_range,
    eigenvalues_outside_band,
    perturbation_order,
    tridiag_eigenvalues,
    truncate,
)
from .spectra import (
    EIGENVALUE,
    RESONANCE,
    ConjugationError,
    RootFindingError,
    SMembership,
    SpectrumConfiguration,
    canonicalize_conjugates,
    classify,
    inverse_joukowsky,
    is_in_S,
    joukowsky,
    polynomial_roots,
)

__version__ = "0.1.0"

__all__ = [
    "ConjugationError",
    "DensityParams",
    "EIGENVALUE",
    "EnsembleParams",
    "ExperimentReport",
    "GCSequence",
    "IdentityReport",
    "InversionError",
    "JacobiCoefficients",
    "KappaDistribution",
    "LogDensityValue",
    "NormalizationConstants",
    "RESONANCE",
    "RandomStream",
    "RealPolynomial",
    "RootFindingError",
    "SMembership",
    "SamplingResult",
    "SingularConfigurationError",
    "SpectrumConfiguration",
    "TridiagonalSample",
    "TruncatedOperator",
    "UnsupportedVariantError",
    "assemble_coupled",
    "canonicalize_conjugates",
    "check_zero_coefficient_identities",
    "chi_sample",
    "classify",
    "dense_vs_tridiagonal_test",
    "density_mc_compare_n1",
    "density_normalization_n1",
    "eigenvalues_in_range",
    "eigenvalues_outside_band",
    "gc_forward",
    "gc_inverse",
    "householder_tridiagonalize",
    "identity_suite",
    "inverse_joukowsky",
    "is_in_S",
    "jacobian_suite",
    "joukowsky",
    "k_from_lstar",
    "k_from_lstar_odd",
    "ks_test",
    "log_density_kappa1",
    "log_density_random_kappa",
    "membership_suite",
    "normal_sample",
    "normalization_constants",
    "perturbation_order",
    "polynomial_roots",
    "random_coefficients",
    "reversal",
    "roundtrip_suite",
    "run_resonance_sampling",
    "sample_de_tridiagonal",
    "sample_dense_gaussian",
    "sample_kappa",
    "semicircle_moment_test",
    "stepwise_jacobian_fd",
    "sum_zeros_test",
    "total_jacobian_fd",
    "tridiag_eigenvalues",
    "truncate",
    "wedge_factor",
]
