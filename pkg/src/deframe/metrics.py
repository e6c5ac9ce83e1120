"""Image quality scores: PSNR, SSIM, FSIM and the relative-change error.

Inputs are grayscale images on [0, 1].

SSIM uses an 11x11 Gaussian window (sigma 1.5) with ``C1 = 0.01**2`` and
``C2 = 0.03**2``, averaged over the valid region. FSIM rescales the images to
[0, 255], builds phase congruency from a log-Gabor bank (4 scales,
4 orientations) and gradient magnitude from the Scharr operator, with
``T1 = 0.85`` and ``T2 = 160``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage, signal

from .errors import DimensionError, NumericError
from .grid import as_image

PSNR_CAP = 999.0


def _pair(x, ref):
    x = as_image(x)
    ref = as_image(ref, "reference")
    if x.shape != ref.shape:
        raise DimensionError(f"image shapes differ: {x.shape} vs {ref.shape}")
    return x, ref


def psnr(x, ref) -> float:
    """Peak signal-to-noise ratio in dB with peak 1; ``inf`` for identical images."""
    x, ref = _pair(x, ref)
    mse = np.mean((x - ref) ** 2)
    if mse == 0:
        return float("inf")
    return float(10.0 * np.log10(1.0 / mse))


def _gaussian_window(size=11, sigma=1.5):
    t = np.arange(size) - (size - 1) / 2
    g = np.exp(-(t[:, None] ** 2 + t[None, :] ** 2) / (2 * sigma**2))
    return g / g.sum()


def ssim(x, ref) -> float:
    x, ref = _pair(x, ref)
    win = _gaussian_window()
    if min(x.shape) < win.shape[0]:
        raise DimensionError(f"SSIM needs images of at least 11x11, got {x.shape}")
    c1 = 0.01**2
    c2 = 0.03**2

    def filt(a):
        return signal.correlate(a, win, mode="valid", method="direct")

    mu1, mu2 = filt(x), filt(ref)
    m11, m22, m12 = mu1 * mu1, mu2 * mu2, mu1 * mu2
    s11 = filt(x * x) - m11
    s22 = filt(ref * ref) - m22
    s12 = filt(x * ref) - m12
    smap = ((2 * m12 + c1) * (2 * s12 + c2)) / ((m11 + m22 + c1) * (s11 + s22 + c2))
    return float(smap.mean())


def _fft_radius(rows, cols):
    """Normalised frequency radius and angle, with the DC term at [0, 0]."""

    def axis(n):
        if n % 2:
            return np.arange(-(n - 1) / 2, (n - 1) / 2 + 1) / (n - 1)
        return np.arange(-n / 2, n / 2) / n

    xx, yy = np.meshgrid(axis(cols), axis(rows))
    radius = np.fft.ifftshift(np.sqrt(xx**2 + yy**2))
    theta = np.fft.ifftshift(np.arctan2(-yy, xx))
    return radius, theta


@lru_cache(maxsize=8)
def _log_gabor_bank(rows, cols, nscale, norient, min_wavelength, mult, sigma_onf, d_theta_on_sigma):
    """Image-independent filters and noise-model constants for each orientation."""
    radius, theta = _fft_radius(rows, cols)
    lowpass = 1.0 / (1.0 + (radius / 0.45) ** (2 * 15))
    radius = radius.copy()
    radius[0, 0] = 1.0
    sin_t, cos_t = np.sin(theta), np.cos(theta)
    theta_sigma = np.pi / norient / d_theta_on_sigma

    log_gabor = []
    for s in range(nscale):
        fo = 1.0 / (min_wavelength * mult**s)
        lg = np.exp(-(np.log(radius / fo) ** 2) / (2 * np.log(sigma_onf) ** 2)) * lowpass
        lg[0, 0] = 0.0
        log_gabor.append(lg)

    bank = []
    for o in range(norient):
        angle = o * np.pi / norient
        ds = sin_t * np.cos(angle) - cos_t * np.sin(angle)
        dc = cos_t * np.cos(angle) + sin_t * np.sin(angle)
        spread = np.exp(-np.arctan2(ds, dc) ** 2 / (2 * theta_sigma**2))
        filters = [lg * spread for lg in log_gabor]
        spatial = [np.real(np.fft.ifft2(f)) * np.sqrt(rows * cols) for f in filters]
        sum_an2 = sum(np.sum(f**2) for f in spatial)
        sum_aiaj = sum(np.sum(spatial[i] * spatial[j])
                       for i in range(nscale - 1) for j in range(i + 1, nscale))
        bank.append((filters, np.sum(filters[0] ** 2), sum_an2, sum_aiaj))
    return bank


def phase_congruency(img, nscale=4, norient=4, min_wavelength=6, mult=2.0,
                     sigma_onf=0.55, d_theta_on_sigma=1.2, k=2.0, eps=1e-4):
    """Kovesi phase congruency summed over orientations, values in [0, 1]."""
    rows, cols = img.shape
    spectrum = np.fft.fft2(img)
    bank = _log_gabor_bank(rows, cols, nscale, norient, min_wavelength, mult,
                           sigma_onf, d_theta_on_sigma)
    energy_all = np.zeros((rows, cols))
    an_all = np.zeros((rows, cols))
    for filters, em_n, sum_an2, sum_aiaj in bank:
        eo_list = [np.fft.ifft2(spectrum * f) for f in filters]
        sum_e = sum(eo.real for eo in eo_list)
        sum_o = sum(eo.imag for eo in eo_list)
        sum_an = sum(np.abs(eo) for eo in eo_list)

        x_energy = np.sqrt(sum_e**2 + sum_o**2) + eps
        mean_e, mean_o = sum_e / x_energy, sum_o / x_energy
        energy = np.zeros((rows, cols))
        for eo in eo_list:
            e, od = eo.real, eo.imag
            energy += e * mean_e + od * mean_o - np.abs(e * mean_o - od * mean_e)

        # noise threshold from the smallest scale's response (Rayleigh model)
        median_e2n = np.median(np.abs(eo_list[0]) ** 2)
        noise_power = -median_e2n / np.log(0.5) / em_n
        tau = np.sqrt((2 * noise_power * sum_an2 + 4 * noise_power * sum_aiaj) / 2)
        est_noise_energy = tau * np.sqrt(np.pi / 2)
        est_noise_sigma = np.sqrt((2 - np.pi / 2) * tau**2)
        threshold = (est_noise_energy + k * est_noise_sigma) / 1.7

        energy_all += np.maximum(energy - threshold, 0.0)
        an_all += sum_an
    return energy_all / an_all


def _downsample(img):
    f = max(1, int(round(min(img.shape) / 256)))
    if f == 1:
        return img
    avg = ndimage.convolve(img, np.full((f, f), 1.0 / f**2), mode="constant")
    return avg[::f, ::f]


_SCHARR_X = np.array([[3, 0, -3], [10, 0, -10], [3, 0, -3]]) / 16.0


def _gradient_magnitude(img):
    gx = ndimage.convolve(img, _SCHARR_X, mode="constant")
    gy = ndimage.convolve(img, _SCHARR_X.T, mode="constant")
    return np.sqrt(gx**2 + gy**2)


def fsim(x, ref) -> float:
    x, ref = _pair(x, ref)
    if min(x.shape) < 32:
        raise DimensionError(f"FSIM needs images of at least 32x32, got {x.shape}")
    y1 = _downsample(255.0 * ref)
    y2 = _downsample(255.0 * x)
    pc1, pc2 = phase_congruency(y1), phase_congruency(y2)
    g1, g2 = _gradient_magnitude(y1), _gradient_magnitude(y2)
    t1, t2 = 0.85, 160.0
    pc_sim = (2 * pc1 * pc2 + t1) / (pc1**2 + pc2**2 + t1)
    g_sim = (2 * g1 * g2 + t2) / (g1**2 + g2**2 + t2)
    pcm = np.maximum(pc1, pc2)
    return float(np.sum(g_sim * pc_sim * pcm) / np.sum(pcm))


def relative_change(x_new, x_old) -> float:
    """``||x_new - x_old|| / ||x_new||`` in the Frobenius norm."""
    x_new, x_old = _pair(x_new, x_old)
    denom = np.linalg.norm(x_new)
    if denom == 0:
        raise NumericError("relative change undefined for an all-zero iterate")
    return float(np.linalg.norm(x_new - x_old) / denom)


@dataclass(frozen=True)
class QualityReport:
    psnr: float
    ssim: float
    fsim: float

    HEADER = "psnr,ssim,fsim"

    def csv_row(self) -> str:
        p = min(self.psnr, PSNR_CAP)
        return f"{p:.6f},{self.ssim:.6f},{self.fsim:.6f}"


def quality_report(x, ref) -> QualityReport:
    return QualityReport(psnr(x, ref), ssim(x, ref), fsim(x, ref))
