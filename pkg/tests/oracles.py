"""Brute-force reference implementations used as independent test oracles."""
import math

import numpy as np


def circular_convolve_direct(img, k):
    """out[i, j] = sum_{p, s} k[p, s] * img[i - (p - r//2), j - (s - c//2)] with wrap."""
    h, w = img.shape
    r, c = k.shape
    out = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for p in range(r):
                for s in range(c):
                    acc += k[p, s] * img[(i - (p - r // 2)) % h, (j - (s - c // 2)) % w]
            out[i, j] = acc
    return out


def circulant_matrix(k, h, w):
    """Dense (hw x hw) matrix of circular convolution with ``k`` (row-major vectorisation)."""
    n = h * w
    m = np.zeros((n, n))
    for idx in range(n):
        e = np.zeros(n)
        e[idx] = 1.0
        m[:, idx] = circular_convolve_direct(e.reshape(h, w), k).ravel()
    return m


def gl_coeffs_gamma(alpha, n):
    """(-1)^i Gamma(a+1) / (Gamma(i+1) Gamma(a+1-i)) via the reflection-free binomial."""
    out = []
    for i in range(n):
        # Gamma(a+1-i) has poles at non-positive integers; binomial is then 0
        if float(alpha).is_integer() and i > alpha:
            out.append(0.0)
            continue
        val = math.gamma(alpha + 1) / (math.gamma(i + 1) * math.gamma(alpha + 1 - i))
        out.append((-1) ** i * val)
    return np.array(out)


def frac_gradient_direct(img, phi):
    h, w = img.shape
    q = len(phi)
    out = np.zeros((2, h, w))
    for i in range(h):
        for j in range(w):
            out[0, i, j] = sum(phi[l] * img[(i - l) % h, j] for l in range(q))
            out[1, i, j] = sum(phi[l] * img[i, (j - l) % w] for l in range(q))
    return out


def framelet_matrix(h, w):
    """Dense (9hw x hw) analysis matrix built band by band from the 1D masks."""
    from deframe.framelet import MASKS

    blocks = []
    for a in range(3):
        for b in range(3):
            k = np.outer(MASKS[a], MASKS[b])
            blocks.append(circulant_matrix(k, h, w))
    return np.vstack(blocks)


def frac_matrix(phi, h, w):
    """Dense (2hw x hw) matrix of the periodic fractional gradient."""
    n = h * w
    m = np.zeros((2 * n, n))
    for idx in range(n):
        e = np.zeros(n)
        e[idx] = 1.0
        m[:, idx] = frac_gradient_direct(e.reshape(h, w), phi).ravel()
    return m


def golden_section(f, a, b, tol=1e-10):
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    while abs(b - a) > tol:
        if f(c) < f(d):
            b = d
        else:
            a = c
        c, d = b - g * (b - a), a + g * (b - a)
    return (a + b) / 2


def prox_norm_numeric(v, t):
    """argmin_eta t*||eta|| + 1/2 ||eta - v||^2, minimising over eta = s * v/||v||."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    nv = np.linalg.norm(v)
    if nv == 0:
        return np.zeros_like(v)
    s = golden_section(lambda s: t * abs(s) + 0.5 * (s - nv) ** 2, -1.0, nv + 1.0)
    return s * v / nv


def motion_supersampled(length, theta_deg, factor):
    from deframe.degrade import rasterize_segment

    k = rasterize_segment(float(length), float(theta_deg), factor)
    return k / k.sum()


def framelet_synthesize_direct(coeffs):
    """sum_ab sum_pq m_a[p] m_b[q] c_ab[i + p - 1, j + q - 1] with wrap (adjoint of convolution)."""
    from deframe.framelet import MASKS

    _, _, h, w = coeffs.shape
    out = np.zeros((h, w))
    for a in range(3):
        for b in range(3):
            for p in range(3):
                for q in range(3):
                    wgt = MASKS[a, p] * MASKS[b, q]
                    for i in range(h):
                        for j in range(w):
                            out[i, j] += wgt * coeffs[a, b, (i + p - 1) % h, (j + q - 1) % w]
    return out


def kernel_basis_matrix(x):
    """M with M @ e.ravel() = circular convolution of x with the full-grid kernel e.

    The kernel is centred like any PSF of the grid's size (index (h//2, w//2)
    is the zero shift).
    """
    h, w = x.shape
    cols = []
    for p in range(h):
        for s in range(w):
            k = np.zeros((h, w))
            k[p, s] = 1.0
            cols.append(circular_convolve_direct(x, k).ravel())
    return np.stack(cols, axis=1)
