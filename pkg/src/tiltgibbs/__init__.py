"""Exponential tilting of light-tailed densities on the positive half-line.

Modules
-------
model      density families, the inverse ``psi`` of ``h`` and regularity checks
tilt       log-MGF, tilted moments and their large-``t`` asymptotics
edgeworth  Edgeworth approximation of tilted sums and a Fourier-inversion oracle
gibbs      chains of tilts approximating conditional densities given the sum
mc         Monte Carlo oracles (tilted sampling, slab conditioning)
cli        command-line validation runs
"""

__version__ = "0.1.0"

from .errors import (BelowMeanError, InfeasibleChainError, InsufficientAcceptanceError,
                     InvalidParameterError, NonIntegrableError, OracleFailureError,
                     OutOfDomainError, TiltError)
from .model import (DensityModel, RBeta, RInfinity, RegularityReport, classify, epsilon_of,
                    from_functions, growth_schedule, make_builtin, normalize, psi)
from .tilt import (Moments, TiltState, diagnostics, log_mgf_laplace, log_mgf_quadrature,
                   moments_asymptotic, moments_exact, psi_moment_integral, skewness, t1_term,
                   tilt_solve, tilt_state)
from .edgeworth import (EdgeworthResult, charfn, convolution_density_oracle,
                        doubling_discrepancy, edgeworth_density, normalized_tilted_pdf,
                        parseval_sides, sup_error_scan, tilted_pdf)
from .gibbs import GibbsChain, GrowthReport, build_chain, growth_condition, z_smallness_check
from .mc import McEstimate, conditional_density_mc, independence_check, sample_tilted

__all__ = [
    "BelowMeanError", "DensityModel", "EdgeworthResult", "GibbsChain", "GrowthReport",
    "InfeasibleChainError", "InsufficientAcceptanceError", "InvalidParameterError",
    "McEstimate", "Moments", "NonIntegrableError", "OracleFailureError", "OutOfDomainError",
    "RBeta", "RInfinity", "RegularityReport", "TiltError", "TiltState", "build_chain",
    "charfn", "classify", "conditional_density_mc", "convolution_density_oracle",
    "diagnostics", "doubling_discrepancy", "edgeworth_density", "epsilon_of",
    "from_functions", "growth_condition", "growth_schedule", "independence_check",
    "log_mgf_laplace", "log_mgf_quadrature", "make_builtin", "moments_asymptotic",
    "moments_exact", "normalize", "normalized_tilted_pdf", "parseval_sides", "psi",
    "psi_moment_integral", "sample_tilted", "skewness", "sup_error_scan", "t1_term",
    "tilt_solve", "tilt_state", "tilted_pdf", "z_smallness_check",
]
