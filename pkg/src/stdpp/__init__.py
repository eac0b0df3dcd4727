"""stdpp: spatio-temporal determinantal point processes.

Kernel and spectral-density catalog with existence validation, exact moment
formulas (product densities, pair correlation, space-time K-function),
spectral simulation on a space-time box, nonparametric estimation and
minimum-contrast fitting.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .specialfn import bessel_k, x_times_k1
from .kernels import (
    SeparableGaussExpParams,
    MaternSeparableParams,
    MaternNonSeparableParams,
    FuentesSpectralParams,
    InversionGrid,
    kernel_value,
    kernel_value_numeric,
    spectral_density,
    validate_existence,
    intensity,
    model_from_dict,
    model_to_dict,
)
from .moments import (
    LagGrid,
    SummaryCurve,
    product_density,
    pcf_theoretical,
    kfun_theoretical,
    pcf_ordering_check,
)
from .simulate import (
    Box,
    SpaceTimePoint,
    PointPattern,
    SpectralApproximation,
    build_spectral_approx,
    sample_stdpp,
    sample_poisson,
    replicate_seeds,
)
from .estimate import (
    BandwidthSpec,
    FitResult,
    estimate_intensity,
    estimate_kfun,
    estimate_pcf,
    fit_min_contrast,
)

__all__ = [
    "BACKEND",
    "__version__",
    "bessel_k",
    "x_times_k1",
    "SeparableGaussExpParams",
    "MaternSeparableParams",
    "MaternNonSeparableParams",
    "FuentesSpectralParams",
    "InversionGrid",
    "kernel_value",
    "kernel_value_numeric",
    "spectral_density",
    "validate_existence",
    "intensity",
    "model_from_dict",
    "model_to_dict",
    "LagGrid",
    "SummaryCurve",
    "product_density",
    "pcf_theoretical",
    "kfun_theoretical",
    "pcf_ordering_check",
    "Box",
    "SpaceTimePoint",
    "PointPattern",
    "SpectralApproximation",
    "build_spectral_approx",
    "sample_stdpp",
    "sample_poisson",
    "replicate_seeds",
    "BandwidthSpec",
    "FitResult",
    "estimate_intensity",
    "estimate_kfun",
    "estimate_pcf",
    "fit_min_contrast",
]
