"""Dense 2D grids, Fourier transforms and circulant operators.

Images are plain 2D ``float64`` arrays indexed ``[row, col]``. All operators
assume periodic boundaries so that they are diagonalised by the 2D DFT.
The forward transform is unnormalised and the inverse divides by ``h * w``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericError

#: imaginary parts up to this size are rounding noise and dropped silently
IMAG_DISCARD_TOL = 1e-10
#: imaginary parts above this indicate a non-Hermitian spectrum upstream
IMAG_ERROR_TOL = 1e-6


def as_image(img, name="image"):
    """Return ``img`` as a 2D float64 array, rejecting empty grids."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} has zero-sized dimension {arr.shape}")
    return arr


def fft2(img) -> np.ndarray:
    """Unnormalised forward 2D DFT of a real image."""
    return np.fft.fft2(as_image(img))


def ifft2(spectrum) -> np.ndarray:
    """Normalised inverse 2D DFT, returning the real part.

    Raises
    ------
    NumericError
        If the largest imaginary residue exceeds ``IMAG_ERROR_TOL`` relative
        to the peak magnitude of the result (a spectrum that is not the
        transform of a real grid).
    """
    g = np.asarray(spectrum)
    if g.ndim != 2 or g.shape[0] < 1 or g.shape[1] < 1:
        raise DimensionError(f"spectrum must be a non-empty 2D grid, got {g.shape}")
    out = np.fft.ifft2(g)
    resid = np.max(np.abs(out.imag))
    scale = max(1.0, float(np.max(np.abs(out.real))))
    if resid > IMAG_ERROR_TOL * scale:
        raise NumericError(
            f"inverse FFT left imaginary residue {resid:.3e}; spectrum is not Hermitian"
        )
    return np.ascontiguousarray(out.real)


@dataclass(frozen=True)
class SpectralOperator:
    """A circular-convolution operator stored as its DFT eigenvalues."""

    response: np.ndarray

    @property
    def shape(self):
        return self.response.shape

    def apply(self, img) -> np.ndarray:
        img = as_image(img)
        self._check(img.shape)
        return ifft2(self.response * np.fft.fft2(img))

    def adjoint(self, img) -> np.ndarray:
        img = as_image(img)
        self._check(img.shape)
        return ifft2(np.conj(self.response) * np.fft.fft2(img))

    def conj(self) -> "SpectralOperator":
        return SpectralOperator(np.conj(self.response))

    def power(self) -> np.ndarray:
        """``|response|**2``, the symbol of ``H* H``."""
        return (self.response * np.conj(self.response)).real

    def __add__(self, other):
        if not isinstance(other, SpectralOperator):
            return NotImplemented
        self._check(other.shape)
        return SpectralOperator(self.response + other.response)

    def _check(self, shape):
        if tuple(shape) != self.response.shape:
            raise DimensionError(
                f"operator is {self.response.shape}, argument is {tuple(shape)}"
            )

    @classmethod
    def identity(cls, h, w):
        return cls(np.ones((h, w), dtype=np.complex128))

    @classmethod
    def zeros(cls, h, w):
        return cls(np.zeros((h, w), dtype=np.complex128))


def pad_kernel(k, h, w) -> np.ndarray:
    """Embed ``k`` in an ``h x w`` grid with its centre element at the origin.

    The centre of an ``r x s`` kernel is ``(r // 2, s // 2)``.
    """
    k = as_image(k, "kernel")
    r, s = k.shape
    if r > h or s > w:
        raise DimensionError(f"kernel {k.shape} larger than grid {(h, w)}")
    big = np.zeros((h, w))
    big[:r, :s] = k
    return np.roll(big, (-(r // 2), -(s // 2)), axis=(0, 1))


def psf_to_spectral(k, h, w) -> SpectralOperator:
    """Frequency response of circular convolution with ``k`` on an ``h x w`` grid."""
    return SpectralOperator(np.fft.fft2(pad_kernel(k, h, w)))


def conv_circular(img, k) -> np.ndarray:
    """Wrap-around 2D convolution of ``img`` with kernel ``k``."""
    img = as_image(img)
    return psf_to_spectral(k, *img.shape).apply(img)
