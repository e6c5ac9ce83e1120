"""Semi-blind deblurring with a framelet + fractional-TV prior.

The restored image ``x`` and the kernel-error operator ``E`` minimise

    1/2 ||(K0 + E) x - y||^2 + lambda1 ||W x||_1 + lambda2 ||grad^alpha x||_{2,1}
        + lambda3/2 ||e||^2 + indicator_[0,1](x)

by alternating two sub-problems. The ``x`` step (with proximal weight
``beta1``) is solved by ADMM with splits ``eta1 = W x``,
``eta2 = grad^alpha x`` and ``eta3 = x`` (penalty ``beta3``); the ``E`` step
has a closed form in the Fourier domain (proximal weight ``beta2``).

``E`` is kept as a full-grid frequency response. Its energy ``||e||^2`` is the
squared norm of the generating kernel, i.e. ``sum |E_hat|^2 / (h w)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DimensionError, NumericError
from .framelet import framelet_analyze, framelet_synthesize
from .fracgrad import frac_adjoint, frac_coeffs, frac_gradient, frac_spectral_symbol
from .grid import SpectralOperator, as_image, ifft2, psf_to_spectral
from .metrics import fsim, psnr, relative_change, ssim

log = logging.getLogger(__name__)

# parameter grids used for the published experiments; values outside them
# are allowed but noted in the history
LAMBDA_GRID = (1e-6, 1e-5, 1e-4, 1e-3, 1e3, 1e5)
BETA12_GRID = (0.1, 1.0, 10.0)
BETA3_GRID = tuple(10.0**i for i in range(-6, 1))
ALPHA_GRID = (0.25, 0.5, 0.75, 1.0, 1.5, 1.75)


@dataclass(frozen=True)
class SolverConfig:
    lambda1: float = 1e-4
    lambda2: float = 1e-4
    lambda3: float = 1e5
    beta1: float = 0.1
    beta2: float = 1.0
    beta3: float = 1e-2
    alpha: float = 0.75
    q: int = 15
    tol: float = 1e-3
    max_outer: int = 100
    inner_iters: int = 10
    inner_tol: float = 1e-4

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3", "beta1", "beta2", "beta3",
                     "alpha", "tol", "inner_tol"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be a positive finite number, got {v}")
        for name in ("q", "max_outer", "inner_iters"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v}")

    def range_warnings(self):
        """Messages for parameters outside the published search grids."""
        out = []

        def check(name, grid):
            v = getattr(self, name)
            if not any(np.isclose(v, g, rtol=1e-9, atol=0) for g in grid):
                out.append(f"{name}={v:g} is outside the documented grid")

        for name in ("lambda1", "lambda2", "lambda3"):
            check(name, LAMBDA_GRID)
        check("beta1", BETA12_GRID)
        check("beta2", BETA12_GRID)
        check("beta3", BETA3_GRID)
        check("alpha", ALPHA_GRID)
        return out

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


#: preset for strong noise (e.g. 4 dBm on [0, 1] images)
HEAVY_NOISE_CONFIG = SolverConfig(lambda1=1e-3, lambda2=1e-3, lambda3=1e5,
                                  beta1=1.0, beta2=1.0, beta3=1.0, alpha=1.0)


@dataclass
class HistoryRow:
    iter: int
    error: float
    psnr: float | None = None
    ssim: float | None = None
    fsim: float | None = None


@dataclass
class History:
    rows: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    stop_reason: str = ""
    #: per inner iteration: (outer, inner, ||Wx-eta1||, ||Dx-eta2||, ||x-eta3||)
    residuals: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    @property
    def errors(self):
        return np.array([r.error for r in self.rows])

    def to_csv(self) -> str:
        def fmt(v):
            return "" if v is None else f"{min(v, 999.0):.6f}"

        lines = ["iter,error,psnr,ssim,fsim"]
        for r in self.rows:
            lines.append(f"{r.iter},{r.error:.6f},{fmt(r.psnr)},{fmt(r.ssim)},{fmt(r.fsim)}")
        return "\n".join(lines) + "\n"


@dataclass
class SolverState:
    x: np.ndarray
    anchor: np.ndarray  # outer iterate x^k, centre of the beta1 proximal term
    e_op: SpectralOperator
    eta1: np.ndarray
    eta2: np.ndarray
    eta3: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray
    theta3: np.ndarray
    outer_iter: int = 0
    history: History = field(default_factory=History)

    @classmethod
    def initial(cls, y, config: SolverConfig):
        """``x = clip(y)``, ``E = 0``, multipliers zero, splits consistent with ``x``."""
        x0 = np.clip(as_image(y), 0.0, 1.0)
        c = frac_coeffs(config.alpha, config.q)
        eta1 = framelet_analyze(x0)
        eta2 = frac_gradient(x0, c)
        return cls(
            x=x0,
            anchor=x0.copy(),
            e_op=SpectralOperator.zeros(*x0.shape),
            eta1=eta1,
            eta2=eta2,
            eta3=x0.copy(),
            theta1=np.zeros_like(eta1),
            theta2=np.zeros_like(eta2),
            theta3=np.zeros_like(x0),
        )


@dataclass(frozen=True)
class Objective:
    data_term: float
    framelet_term: float
    fractv_term: float
    kernel_term: float

    @property
    def total(self):
        return self.data_term + self.framelet_term + self.fractv_term + self.kernel_term


@lru_cache(maxsize=32)
def _frac_power(alpha, q, h, w):
    sym_h, sym_v = frac_spectral_symbol(frac_coeffs(alpha, q), h, w)
    return sym_h.power() + sym_v.power()


def _check_finite(step, iteration, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericError(f"non-finite values after {step} (iteration {iteration})",
                               step=step, iteration=iteration)


def x_update(state: SolverState, config: SolverConfig, k0_op: SpectralOperator, y) -> np.ndarray:
    """Minimise the augmented Lagrangian over ``x`` by one Fourier division."""
    y = as_image(y)
    if y.shape != state.x.shape:
        raise DimensionError(f"y is {y.shape} but the state is {state.x.shape}")
    b1, b3 = config.beta1, config.beta3
    h = k0_op.response + state.e_op.response
    c = frac_coeffs(config.alpha, config.q)
    rhs = (
        b1 * state.anchor
        + framelet_synthesize(b3 * state.eta1 - state.theta1)
        + frac_adjoint(b3 * state.eta2 - state.theta2, c)
        + (b3 * state.eta3 - state.theta3)
    )
    num = np.conj(h) * np.fft.fft2(y) + np.fft.fft2(rhs)
    den = (h * np.conj(h)).real + b1 + 2 * b3 + b3 * _frac_power(config.alpha, config.q, *y.shape)
    if den.min() <= 0:
        raise NumericError("non-positive denominator in the x update", step="x_update")
    return ifft2(num / den)


def eta_shrink(w, theta, lam, beta3, group_axis=None) -> np.ndarray:
    """Soft-threshold ``v = w + theta / beta3`` by ``lam / beta3``.

    With ``group_axis=None`` every entry is shrunk on its own; otherwise the
    magnitude is taken across ``group_axis`` (isotropic shrinkage of the
    per-pixel gradient vector).
    """
    v = np.asarray(w, dtype=np.float64) + np.asarray(theta, dtype=np.float64) / beta3
    t = lam / beta3
    if group_axis is None:
        return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)
    mag = np.sqrt(np.sum(v * v, axis=group_axis, keepdims=True))
    scale = np.maximum(mag - t, 0.0) / np.where(mag > 0, mag, 1.0)
    return scale * v


def eta3_project(x, theta3, beta3) -> np.ndarray:
    """Projection of ``x + theta3 / beta3`` onto the box [0, 1]."""
    return np.clip(np.asarray(x) + np.asarray(theta3) / beta3, 0.0, 1.0)


def theta_update(state: SolverState, config: SolverConfig, transforms=None):
    """Multiplier ascent ``theta_i += beta3 * (varpi_i x - eta_i)``; updates ``state`` in place.

    ``transforms`` may pass precomputed ``(W x, grad^alpha x)`` for ``state.x``.
    Returns the three primal residual norms.
    """
    if transforms is None:
        transforms = (framelet_analyze(state.x),
                      frac_gradient(state.x, frac_coeffs(config.alpha, config.q)))
    wx, dx = transforms
    b3 = config.beta3
    r1 = wx - state.eta1
    r2 = dx - state.eta2
    r3 = state.x - state.eta3
    state.theta1 = state.theta1 + b3 * r1
    state.theta2 = state.theta2 + b3 * r2
    state.theta3 = state.theta3 + b3 * r3
    return np.linalg.norm(r1), np.linalg.norm(r2), np.linalg.norm(r3)


def inner_solve(state: SolverState, config: SolverConfig, k0_op: SpectralOperator, y) -> np.ndarray:
    """ADMM loop for the ``x`` sub-problem with ``E`` held fixed.

    Runs until the relative change of ``x`` drops to ``config.inner_tol`` or
    ``config.inner_iters`` passes are done. Mutates ``state`` and returns
    the new ``x``.
    """
    c = frac_coeffs(config.alpha, config.q)
    it = state.outer_iter
    for j in range(config.inner_iters):
        x_prev = state.x
        state.x = x_update(state, config, k0_op, y)
        _check_finite("x_update", it, state.x)

        wx = framelet_analyze(state.x)
        dx = frac_gradient(state.x, c)
        state.eta1 = eta_shrink(wx, state.theta1, config.lambda1, config.beta3)
        state.eta2 = eta_shrink(dx, state.theta2, config.lambda2, config.beta3, group_axis=0)
        _check_finite("eta_shrink", it, state.eta1, state.eta2)
        state.eta3 = eta3_project(state.x, state.theta3, config.beta3)
        _check_finite("eta3_project", it, state.eta3)

        res = theta_update(state, config, transforms=(wx, dx))
        _check_finite("theta_update", it, state.theta1, state.theta2, state.theta3)
        state.history.residuals.append((it, j + 1) + tuple(float(r) for r in res))

        if np.linalg.norm(state.x) > 0 and relative_change(state.x, x_prev) <= config.inner_tol:
            break
    return state.x


def e_update(state: SolverState, config: SolverConfig, k0_op: SpectralOperator, y, x_new) -> SpectralOperator:
    """Closed-form kernel-error step, computed bin by bin in frequency."""
    xf = np.fft.fft2(as_image(x_new))
    resid = np.fft.fft2(as_image(y)) - k0_op.response * xf
    num = np.conj(xf) * resid + config.beta2 * state.e_op.response
    den = (xf * np.conj(xf)).real + config.lambda3 + config.beta2
    return SpectralOperator(num / den)


def objective(x, e_op: SpectralOperator, k0_op: SpectralOperator, y, config: SolverConfig) -> Objective:
    """The four terms of the joint objective at ``(x, E)`` (box indicator excluded)."""
    x = as_image(x)
    h = k0_op + e_op
    r = h.apply(x) - as_image(y)
    wx = framelet_analyze(x)
    dx = frac_gradient(x, frac_coeffs(config.alpha, config.q))
    return Objective(
        data_term=0.5 * float(np.sum(r * r)),
        framelet_term=config.lambda1 * float(np.sum(np.abs(wx))),
        fractv_term=config.lambda2 * float(np.sum(np.sqrt(np.sum(dx * dx, axis=0)))),
        kernel_term=0.5 * config.lambda3 * float(np.sum(e_op.power()) / x.size),
    )


@dataclass
class SolveResult:
    x: np.ndarray
    e_op: SpectralOperator
    history: History
    state: SolverState


def solve(y, k0, config: SolverConfig | None = None, reference=None, callback=None) -> SolveResult:
    """Restore ``y`` given the inexact kernel ``k0``.

    Alternates :func:`inner_solve` and :func:`e_update` until the relative
    change of ``x`` between outer iterations is at most ``config.tol`` or
    ``config.max_outer`` iterations have run. When ``reference`` is given,
    PSNR/SSIM/FSIM of each (clipped) outer iterate are stored in the history.
    ``callback(state)`` is invoked after every outer iteration.
    """
    config = config or SolverConfig()
    y = as_image(y)
    k0_op = psf_to_spectral(k0, *y.shape)
    if reference is not None:
        reference = as_image(reference, "reference")
        if reference.shape != y.shape:
            raise DimensionError(f"reference {reference.shape} does not match y {y.shape}")

    state = SolverState.initial(y, config)
    hist = state.history
    hist.warnings.extend(config.range_warnings())
    for msg in hist.warnings:
        log.info("config: %s", msg)

    hist.stop_reason = "max_outer"
    for k in range(1, config.max_outer + 1):
        state.outer_iter = k
        x_old = state.anchor
        x_new = inner_solve(state, config, k0_op, y)
        state.e_op = e_update(state, config, k0_op, y, x_new)
        _check_finite("e_update", k, state.e_op.response)
        err = relative_change(x_new, x_old)
        state.anchor = x_new

        row = HistoryRow(k, err)
        if reference is not None:
            xc = np.clip(x_new, 0.0, 1.0)
            row.psnr, row.ssim = psnr(xc, reference), ssim(xc, reference)
            if min(xc.shape) >= 32:
                row.fsim = fsim(xc, reference)
        hist.rows.append(row)
        log.debug("outer %d: error %.3e", k, err)
        if callback is not None:
            callback(state)
        if err <= config.tol:
            hist.stop_reason = "tol"
            break

    return SolveResult(np.clip(state.anchor, 0.0, 1.0), state.e_op, hist, state)
