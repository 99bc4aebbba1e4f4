"""Simulator of ponderomotive entanglement between two optical carriers.

Two orthogonally polarized carriers share a detuned cavity with a movable
cantilever mirror. The package computes the output quadrature covariance
matrix, Gaussian entanglement measures, parameter sweeps, optical-spring
stability and the effect of measurement noise on the negativity.
"""
from ._kernels import BACKEND
from .duan import duan_check, duan_R, duan_standard_form, duan_substandard
from .gaussian import (
    CovarianceMatrix,
    Normalization,
    log_negativity,
    ppt_symplectic_eigenvalue,
    rescale,
    tmsv,
    validate_cm,
)
from .model import (
    CarrierConfig,
    SimConfig,
    build_transfer,
    effective_susceptibility,
    half_linewidth,
    mech_susceptibility,
    optical_spring,
    output_covariance,
    quantum_thermal_ratio,
    stability_check,
    thermal_force_psd,
)
from .modes import MechanicalMode, ModeTable, default_modes, load_modes
from .noise_mc import McConfig, en_distribution, perturb_cm, required_precision
from .sweep import SweepAxis, cavity_length_profile, find_peak, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CarrierConfig",
    "CovarianceMatrix",
    "McConfig",
    "MechanicalMode",
    "ModeTable",
    "Normalization",
    "SimConfig",
    "SweepAxis",
    "build_transfer",
    "cavity_length_profile",
    "default_modes",
    "duan_R",
    "duan_check",
    "duan_standard_form",
    "duan_substandard",
    "effective_susceptibility",
    "en_distribution",
    "find_peak",
    "half_linewidth",
    "load_modes",
    "log_negativity",
    "mech_susceptibility",
    "optical_spring",
    "output_covariance",
    "perturb_cm",
    "ppt_symplectic_eigenvalue",
    "quantum_thermal_ratio",
    "required_precision",
    "rescale",
    "run_sweep",
    "stability_check",
    "thermal_force_psd",
    "tmsv",
    "validate_cm",
]
