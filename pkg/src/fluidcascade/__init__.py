"""Exact spectral analysis of forward energy transfer for Euler and Navier-Stokes data on the torus."""

__version__ = "0.1.0"

from .constructions import EulerInitParams, NseDatum, NseInitParams, euler_u0, make_blocks, nse_U, validate_gaps
from .errors import (
    AliasingError,
    BandError,
    ConfigError,
    FluidCascadeError,
    InfeasibleError,
    InfeasibleShellError,
    NumericalError,
)
from .littlewood_paley import BesovParams, ResolutionPolicy, besov_norm, chi, phi_q, shell_project
from .spectral import BlockField, GridField, SparseSpectralField, leray_project, trilinear

__all__ = [
    "AliasingError", "BandError", "BesovParams", "BlockField", "ConfigError", "EulerInitParams",
    "FluidCascadeError", "GridField", "InfeasibleError", "InfeasibleShellError", "NseDatum",
    "NseInitParams", "NumericalError", "ResolutionPolicy", "SparseSpectralField", "besov_norm", "chi",
    "euler_u0", "leray_project", "make_blocks", "nse_U", "phi_q", "shell_project", "trilinear",
    "validate_gaps",
]
