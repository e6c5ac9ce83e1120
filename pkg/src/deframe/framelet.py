"""Single-level undecimated tight framelet built from the piecewise-linear B-spline.

The 1D masks are

    h0 = [1, 2, 1] / 4,   h1 = sqrt(2) / 4 * [1, 0, -1],   h2 = [-1, 2, -1] / 4

and the 2D system is their tensor product (9 bands). Band ``(a, b)`` filters
axis 0 with ``h_a`` and axis 1 with ``h_b``; boundaries are periodic. The masks
satisfy ``sum_a |H_a(w)|^2 = 1``, so synthesis inverts analysis exactly.
"""
from __future__ import annotations

import numpy as np

from .grid import as_image
from .errors import DimensionError

MASKS = np.array(
    [
        [0.25, 0.5, 0.25],
        [np.sqrt(2) / 4, 0.0, -np.sqrt(2) / 4],
        [-0.25, 0.5, -0.25],
    ]
)
N_BANDS = 3


def _filter(x, mask, axis):
    # convolution: out[i] = sum_t mask[t] * x[i - (t - 1)]
    out = mask[1] * x
    if mask[0]:
        out = out + mask[0] * np.roll(x, -1, axis=axis)
    if mask[2]:
        out = out + mask[2] * np.roll(x, 1, axis=axis)
    return out


def _filter_adjoint(x, mask, axis):
    out = mask[1] * x
    if mask[0]:
        out = out + mask[0] * np.roll(x, 1, axis=axis)
    if mask[2]:
        out = out + mask[2] * np.roll(x, -1, axis=axis)
    return out


def framelet_analyze(img) -> np.ndarray:
    """Framelet coefficients of ``img`` as an array of shape ``(3, 3, h, w)``.

    ``coeffs[0, 0]`` is the low-pass band; the other eight are detail bands.
    """
    x = as_image(img)
    coeffs = np.empty((N_BANDS, N_BANDS) + x.shape)
    for a in range(N_BANDS):
        rows = _filter(x, MASKS[a], axis=0)
        for b in range(N_BANDS):
            coeffs[a, b] = _filter(rows, MASKS[b], axis=1)
    return coeffs


def framelet_synthesize(coeffs) -> np.ndarray:
    """Adjoint of :func:`framelet_analyze`; reconstructs the image exactly."""
    try:
        c = np.asarray(coeffs, dtype=np.float64)
    except ValueError as exc:
        raise DimensionError(f"subbands have mismatched sizes: {exc}") from None
    if c.ndim != 4 or c.shape[:2] != (N_BANDS, N_BANDS):
        raise DimensionError(f"expected coefficients of shape (3, 3, h, w), got {c.shape}")
    if c.shape[2] < 1 or c.shape[3] < 1:
        raise DimensionError(f"empty subbands {c.shape[2:]}")
    out = np.zeros(c.shape[2:])
    for a in range(N_BANDS):
        rows = np.zeros(c.shape[2:])
        for b in range(N_BANDS):
            rows += _filter_adjoint(c[a, b], MASKS[b], axis=1)
        out += _filter_adjoint(rows, MASKS[a], axis=0)
    return out
