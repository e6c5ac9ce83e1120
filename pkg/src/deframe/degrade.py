"""Synthetic degradation: PSFs, kernel error, circular blur and dBm noise.

Randomness comes from :func:`make_rng`, a Philox counter-based generator,
and Gaussian samples are produced by the Box–Muller transform on its
uniform doubles. Both steps are fully specified, so a seed reproduces the
same arrays on every platform.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .grid import as_image, conv_circular

#: sub-pixel samples per axis used when rasterising motion blur
MOTION_SUPERSAMPLE = 16


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def standard_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Box–Muller normal deviates drawn from ``rng``'s uniform stream."""
    if isinstance(shape, (int, np.integer)):
        shape = (int(shape),)
    n = int(np.prod(shape))
    m = (n + 1) // 2
    u1 = 1.0 - rng.random(m)  # (0, 1], keeps log finite
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])
    return z[:n].reshape(shape)


def psf_gaussian(rows, cols, sigma) -> np.ndarray:
    """Normalised Gaussian PSF centred on the middle of a ``rows x cols`` grid."""
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if rows < 1 or cols < 1:
        raise DomainError(f"PSF size must be positive, got {(rows, cols)}")
    y = np.arange(rows) - (rows - 1) / 2
    x = np.arange(cols) - (cols - 1) / 2
    k = np.exp(-(y[:, None] ** 2 + x[None, :] ** 2) / (2.0 * sigma**2))
    return k / k.sum()


def rasterize_segment(length, theta_deg, supersample):
    """Coverage of a ``length x 1`` bar through the origin at ``theta_deg``.

    Each pixel receives the fraction of its ``supersample**2`` sub-pixel
    centres that fall inside the bar. The result is cropped to its non-zero
    bounding box and is not normalised.
    """
    theta = np.deg2rad(theta_deg)
    c, s = np.cos(theta), np.sin(theta)
    half = length / 2.0
    # extent of the bar along columns (x) and rows (y); rounded so that
    # axis-aligned bars do not pick up a spurious extra pixel
    ext_x = round(half * abs(c) + 0.5 * abs(s), 9)
    ext_y = round(half * abs(s) + 0.5 * abs(c), 9)
    nx = int(np.ceil(ext_x + 0.5)) - 1
    ny = int(np.ceil(ext_y + 0.5)) - 1
    sub = (np.arange(supersample) + 0.5) / supersample - 0.5
    cols = (np.arange(-nx, nx + 1)[:, None] + sub[None, :]).ravel()
    rows = (np.arange(-ny, ny + 1)[:, None] + sub[None, :]).ravel()
    X = cols[None, :]
    Y = -rows[:, None]  # image rows grow downwards
    along = X * c + Y * s
    across = -X * s + Y * c
    inside = (np.abs(along) <= half) & (np.abs(across) <= 0.5)
    cover = inside.reshape(2 * ny + 1, supersample, 2 * nx + 1, supersample).mean(axis=(1, 3))
    nz_r = np.flatnonzero(cover.any(axis=1))
    nz_c = np.flatnonzero(cover.any(axis=0))
    # crop symmetrically so the centre pixel stays in the middle
    tr = min(nz_r[0], cover.shape[0] - 1 - nz_r[-1])
    tc = min(nz_c[0], cover.shape[1] - 1 - nz_c[-1])
    return cover[tr : cover.shape[0] - tr, tc : cover.shape[1] - tc]


def psf_motion(length, theta_deg) -> np.ndarray:
    """Linear motion blur of ``length`` pixels at ``theta_deg`` counter-clockwise."""
    if not length >= 1:
        raise DomainError(f"motion length must be >= 1, got {length}")
    k = rasterize_segment(float(length), float(theta_deg), MOTION_SUPERSAMPLE)
    return k / k.sum()


def make_psf(kind, **params) -> np.ndarray:
    if kind == "gaussian":
        rows, cols = params.get("size", (15, 15))
        return psf_gaussian(int(rows), int(cols), float(params.get("sigma", 1.5)))
    if kind == "motion":
        return psf_motion(float(params.get("length", 10)), float(params.get("angle", 45)))
    if kind == "identity":
        return np.ones((1, 1))
    raise DomainError(f"unknown PSF kind {kind!r}")


def perturb_kernel(k, std, rng):
    """Draw ``e ~ N(0, std^2)`` of the kernel's shape and return ``(k - e, e)``."""
    if std < 0:
        raise DomainError(f"std must be non-negative, got {std}")
    k = as_image(k, "kernel")
    e = std * standard_normal(rng, k.shape)
    return k - e, e


def dbm_to_std(power_dbm) -> float:
    """Noise standard deviation for ``power_dbm`` into a 1 ohm load."""
    return float(10.0 ** ((power_dbm - 30.0) / 20.0))


def wgn_noise(h, w, power_dbm, rng) -> np.ndarray:
    """White Gaussian noise whose variance is ``10**((power_dbm - 30) / 10)``."""
    return dbm_to_std(power_dbm) * standard_normal(rng, (h, w))


@dataclass(frozen=True)
class DegradationSpec:
    """Parameters of one synthetic degradation.

    ``noise_dbm=None`` disables the noise; ``psf_params`` is passed to
    :func:`make_psf`.
    """

    psf_kind: str = "gaussian"
    psf_params: dict = field(default_factory=lambda: {"size": (15, 15), "sigma": 1.5})
    std: float = 0.001
    noise_dbm: float | None = 4.0
    seed: int = 0

    def __post_init__(self):
        if self.std < 0:
            raise DomainError(f"std must be non-negative, got {self.std}")

    def kernel(self):
        return make_psf(self.psf_kind, **self.psf_params)


@dataclass
class DegradationTruth:
    kernel: np.ndarray
    error: np.ndarray
    noise: np.ndarray


def degrade(img, spec: DegradationSpec):
    """Blur ``img`` with the true kernel and add noise.

    Returns ``(y, k0, truth)``. ``y`` is left unclipped. The solver should only
    ever see ``y`` and the perturbed kernel ``k0``; ``truth`` is for evaluation.
    """
    x = as_image(img)
    rng = make_rng(spec.seed)
    k = spec.kernel()
    k0, e = perturb_kernel(k, spec.std, rng)
    blurred = conv_circular(x, k)
    if spec.noise_dbm is None or spec.noise_dbm == -np.inf:
        noise = np.zeros_like(x)
    else:
        noise = wgn_noise(*x.shape, spec.noise_dbm, rng)
    return blurred + noise, k0, DegradationTruth(k, e, noise)
