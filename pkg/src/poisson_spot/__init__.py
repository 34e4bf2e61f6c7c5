"""Matter-wave Poisson spot behind a Gaussian obstacle.

Closed-form coherent and partially coherent screen intensities built from
the Babinet difference of a free and a slit-filtered Gaussian packet,
their Gouy phases, brute-force quadrature checks, and detector fitting.
"""
from .coherent import coherent_gouy_difference, coherent_intensity, coherent_profile
from .core import (
    HBAR,
    ConsistencyError,
    PhysicalConfig,
    PoissonSpotError,
    characteristic_time,
    free_params,
    obstacle_plane_params,
    psi_free,
    psi_slit,
    slit_params,
)
from .decoherent import (
    CoherenceMode,
    CoherenceModel,
    coherence_length,
    decoherent_intensity,
    decoherent_params,
    decoherent_profile,
    gouy_partial,
)
from .detector_fit import (
    DataSet,
    DetectorSpec,
    FitResult,
    affine_fit,
    convolve_detector,
    model_profile,
    nonlinear_fit,
)
from .profiles import IntensityProfile, Normalization, normalize

__all__ = [
    "HBAR", "ConsistencyError", "PhysicalConfig", "PoissonSpotError", "characteristic_time",
    "free_params", "obstacle_plane_params", "psi_free", "psi_slit", "slit_params",
    "coherent_gouy_difference", "coherent_intensity", "coherent_profile",
    "CoherenceMode", "CoherenceModel", "coherence_length", "decoherent_intensity",
    "decoherent_params", "decoherent_profile", "gouy_partial",
    "DataSet", "DetectorSpec", "FitResult", "affine_fit", "convolve_detector", "model_profile",
    "nonlinear_fit", "IntensityProfile", "Normalization", "normalize",
]
