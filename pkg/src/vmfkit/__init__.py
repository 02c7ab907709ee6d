"""vmfkit: von Mises-Fisher modelling on the unit hypersphere.

Numerically stable log-Bessel evaluation, exact sampling, maximum-
likelihood estimation (closed-form and stochastic), mixture learning
(EM and SGD), and clustering metrics for unit-norm feature vectors.
"""

from ._version import __version__
from .bessel import BesselEvalConfig, bessel_ratio, invert_bessel_ratio, log_bessel_i
from .cluster import adjusted_rand_index, assign, kmeans, normalized_mutual_information
from .errors import (
    BesselConvergenceError,
    ComponentCollapseError,
    ConcentrationOverflowError,
    DegenerateDataError,
    DivergenceError,
    NumericalError,
    SamplingBudgetError,
    VmfkitError,
)
from .estimators import FitReport, SgdConfig, fit_batch, fit_sgd, vmf_gradient, vmf_objective
from .experiments import ExperimentSpec, reference_mixture, run_mixture_synth, run_table1
from .mixture import (
    EmConfig,
    MixtureParams,
    PermutationMatch,
    e_step,
    fit_em,
    fit_mix_sgd,
    log_marginal,
    m_step,
    permutation_matched_error,
)
from .sampler import (
    HouseholderMap,
    SamplerConfig,
    sample_mixture,
    sample_tangent,
    sample_vmf,
    sample_w,
)
from .vmf import VmfParams, as_unit_rows, log_density, log_norm_const, normalize

__all__ = [
    "__version__",
    "BesselEvalConfig",
    "log_bessel_i",
    "bessel_ratio",
    "invert_bessel_ratio",
    "VmfParams",
    "normalize",
    "as_unit_rows",
    "log_norm_const",
    "log_density",
    "SamplerConfig",
    "HouseholderMap",
    "sample_tangent",
    "sample_w",
    "sample_vmf",
    "sample_mixture",
    "SgdConfig",
    "FitReport",
    "fit_batch",
    "fit_sgd",
    "vmf_objective",
    "vmf_gradient",
    "MixtureParams",
    "EmConfig",
    "log_marginal",
    "e_step",
    "m_step",
    "fit_em",
    "fit_mix_sgd",
    "PermutationMatch",
    "permutation_matched_error",
    "assign",
    "kmeans",
    "adjusted_rand_index",
    "normalized_mutual_information",
    "ExperimentSpec",
    "reference_mixture",
    "run_table1",
    "run_mixture_synth",
    "VmfkitError",
    "NumericalError",
    "BesselConvergenceError",
    "ConcentrationOverflowError",
    "DegenerateDataError",
    "SamplingBudgetError",
    "DivergenceError",
    "ComponentCollapseError",
]
