"""Grünwald–Letnikov fractional-order gradient with periodic wrap.

    D_h x[i, j] = sum_{l<q} phi[l] * x[i - l, j]
    D_v x[i, j] = sum_{l<q} phi[l] * x[i, j - l]

with ``phi[l] = (-1)^l * binom(alpha, l)``. Gradient fields are arrays of
shape ``(2, h, w)`` holding the horizontal then vertical component.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError
from .grid import SpectralOperator, as_image

DEFAULT_Q = 15


@dataclass(frozen=True)
class FracCoeffs:
    alpha: float
    q: int
    phi: np.ndarray


def frac_coeffs(alpha, q=DEFAULT_Q) -> FracCoeffs:
    """G-L weights by the recurrence ``phi[i] = phi[i-1] * (i - 1 - alpha) / i``.

    The recurrence never forms a Gamma function, so it cannot overflow for
    long windows.
    """
    alpha = float(alpha)
    if not alpha > 0 or not np.isfinite(alpha):
        raise DomainError(f"alpha must be positive, got {alpha}")
    q = int(q)
    if q < 1:
        raise DomainError(f"window length q must be >= 1, got {q}")
    phi = np.empty(q)
    phi[0] = 1.0
    for i in range(1, q):
        phi[i] = phi[i - 1] * (i - 1 - alpha) / i
    phi.setflags(write=False)
    return FracCoeffs(alpha, q, phi)


def _check_window(c, shape):
    if c.q > min(shape):
        raise DimensionError(f"window q={c.q} exceeds grid dimensions {shape}")


def frac_gradient(img, c: FracCoeffs) -> np.ndarray:
    """Horizontal and vertical fractional differences, shape ``(2, h, w)``."""
    x = as_image(img)
    _check_window(c, x.shape)
    out = np.zeros((2,) + x.shape)
    for l, w in enumerate(c.phi):
        if w == 0.0:
            continue
        out[0] += w * np.roll(x, l, axis=0)
        out[1] += w * np.roll(x, l, axis=1)
    return out


def frac_adjoint(field, c: FracCoeffs) -> np.ndarray:
    """Apply ``(D_h)^T`` to the first component and ``(D_v)^T`` to the second, then sum."""
    f = np.asarray(field, dtype=np.float64)
    if f.ndim != 3 or f.shape[0] != 2:
        raise DimensionError(f"gradient field must have shape (2, h, w), got {f.shape}")
    _check_window(c, f.shape[1:])
    out = np.zeros(f.shape[1:])
    for l, w in enumerate(c.phi):
        if w == 0.0:
            continue
        out += w * (np.roll(f[0], -l, axis=0) + np.roll(f[1], -l, axis=1))
    return out


def frac_spectral_symbol(c: FracCoeffs, h, w):
    """Frequency responses of ``D_h`` and ``D_v`` on an ``h x w`` grid."""
    _check_window(c, (h, w))
    col = np.zeros(h)
    col[: c.q] = c.phi
    row = np.zeros(w)
    row[: c.q] = c.phi
    sym_h = np.broadcast_to(np.fft.fft(col)[:, None], (h, w)).copy()
    sym_v = np.broadcast_to(np.fft.fft(row)[None, :], (h, w)).copy()
    return SpectralOperator(sym_h), SpectralOperator(sym_v)
