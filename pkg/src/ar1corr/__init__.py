"""Exact moments, density approximations, and normality diagnostics for the
empirical correlation of two AR(1) processes."""

__version__ = "0.1.0"

from .asymptotics import (
    ChaosConstants,
    RateFit,
    chaos_constants,
    fit_loglog,
    kolmogorov_distance,
    mc_power,
    power_lower_bound,
    rate_fit,
    scaling_constant,
    wasserstein1_distance,
)
from .charpoly import (
    d_n,
    d_n_asymptotic,
    d_n_prime,
    d_n_sign_log,
    derivative_ratio,
    det_oracle,
)
from .density_approx import (
    DensityApprox,
    density_minimum,
    evaluate_density,
    legendre_from_moments,
    reintegrated_moments,
)
from .kernel_spectrum import (
    KernelMatrix,
    SpectrumSummary,
    build_kernel,
    eigen_sym,
)
from .mgf_moments import (
    MgfInputs,
    MomentResult,
    limit_second_moment,
    moment,
    phi_n,
    second_moment_scaled,
)
from .quadrature import (
    IntegrationError,
    QuadResult,
    integrate_quadrant,
    integrate_triangle_symmetric,
)
from .simulation import (
    DegenerateSampleError,
    ModelSpec,
    PathPair,
    ThetaSampleSet,
    empirical_stats,
    sample_theta,
    simulate_pair,
    substream,
)
from .taylor_jet import Jet, constant, extract_derivative, jet_sqrt, variable

__all__ = [
    "ChaosConstants",
    "DegenerateSampleError",
    "DensityApprox",
    "IntegrationError",
    "Jet",
    "KernelMatrix",
    "MgfInputs",
    "ModelSpec",
    "MomentResult",
    "PathPair",
    "QuadResult",
    "RateFit",
    "SpectrumSummary",
    "ThetaSampleSet",
    "build_kernel",
    "chaos_constants",
    "constant",
    "d_n",
    "d_n_asymptotic",
    "d_n_prime",
    "d_n_sign_log",
    "density_minimum",
    "derivative_ratio",
    "det_oracle",
    "eigen_sym",
    "empirical_stats",
    "evaluate_density",
    "extract_derivative",
    "fit_loglog",
    "integrate_quadrant",
    "integrate_triangle_symmetric",
    "jet_sqrt",
    "kolmogorov_distance",
    "legendre_from_moments",
    "limit_second_moment",
    "mc_power",
    "moment",
    "phi_n",
    "power_lower_bound",
    "rate_fit",
    "reintegrated_moments",
    "sample_theta",
    "scaling_constant",
    "second_moment_scaled",
    "simulate_pair",
    "substream",
    "variable",
    "wasserstein1_distance",
]
