"""Random-feature ridge regression and its effective-ridge theory.

Fitting linear regression on P features sampled from a Gaussian process with
covariance K approximates kernel ridge regression, but with a larger
*effective* ridge: finite feature sampling regularizes implicitly.  This
package implements the predictors, the fixed-point theory of the effective
ridge, the Stieltjes-transform machinery behind it, and a seeded Monte Carlo
harness plus CLI that verify the theory numerically at desk scale.
"""

from .errors import (
    AtThresholdError,
    CsvParseError,
    DuplicateRowError,
    EffridgeError,
    InfeasibleTargetError,
    InvalidInputError,
    NumericError,
    SingularGramError,
)
from .kernels import (
    Dataset,
    GramMatrix,
    GramSpectrum,
    KernelSpec,
    gram_matrix,
    inv_kernel_norm_sq,
    spectral_decompose,
    sqrt_gram,
)
from .features import (
    FeatureMatrix,
    SeedPolicy,
    derive_stream_seed,
    empirical_kernel,
    sample_fourier_features,
    sample_gaussian_features,
)
from .predictors import (
    KRRModel,
    RFModel,
    conditional_moments,
    fit_krr,
    fit_rf,
    posterior_kernel,
    posterior_kernel_diag,
    predict_krr,
    predict_rf,
)
from .effective_ridge import (
    EffectiveRidge,
    SpectrumInput,
    calibrate_ridge,
    effective_dimension,
    effective_ridge_derivative,
    ridgeless_limit,
    solve_effective_ridge,
    theoretical_variance_term,
    theta_norm_theory,
)
from .stieltjes import (
    StieltjesSolution,
    WishartSample,
    empirical_expected_A,
    empirical_stieltjes,
    expected_A_theoretical,
    sample_wishart,
    stieltjes_moments,
    theoretical_stieltjes,
)
from .montecarlo import (
    RiskReport,
    TrialStats,
    bias_variance_decompose,
    compare_average_to_krr,
    estimate_risk,
    monte_carlo_band,
    run_trials,
    theta_norm_check,
)
from .datasets import (
    generate_clusters,
    generate_sinusoid,
    generate_spectrum,
    load_dataset_csv,
)

__version__ = "0.1.0"
