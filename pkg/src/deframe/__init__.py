"""Semi-blind image deblurring with a framelet and fractional-order TV prior."""
from .degrade import DegradationSpec, degrade, psf_gaussian, psf_motion
from .errors import ConfigError, DimensionError, DomainError, ImageIOError, NumericError
from .framelet import framelet_analyze, framelet_synthesize
from .fracgrad import frac_adjoint, frac_coeffs, frac_gradient, frac_spectral_symbol
from .grid import SpectralOperator, conv_circular, fft2, ifft2, psf_to_spectral
from .io import load_image, read_sidecar, save_image, write_sidecar
from .metrics import QualityReport, fsim, psnr, quality_report, relative_change, ssim
from .solver import HEAVY_NOISE_CONFIG, SolverConfig, solve

__all__ = [
    "DegradationSpec",
    "degrade",
    "psf_gaussian",
    "psf_motion",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "ImageIOError",
    "NumericError",
    "framelet_analyze",
    "framelet_synthesize",
    "frac_adjoint",
    "frac_coeffs",
    "frac_gradient",
    "frac_spectral_symbol",
    "SpectralOperator",
    "conv_circular",
    "fft2",
    "ifft2",
    "psf_to_spectral",
    "load_image",
    "read_sidecar",
    "save_image",
    "write_sidecar",
    "QualityReport",
    "fsim",
    "psnr",
    "quality_report",
    "relative_change",
    "ssim",
    "HEAVY_NOISE_CONFIG",
    "SolverConfig",
    "solve",
]

__version__ = "0.1.0"
