"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the verdicts are printed in
the "acceptance criteria" section of the terminal summary. The long
end-to-end checks are marked ``slow``.

Set ``DEFRAME_IMAGE_5210`` to the path of the USC-SIPI aerial image 5.2.10
to enable the check against its reference PSNR; without it only the
restoration-gain half of that criterion runs (on the bundled camera crop).
"""
import dataclasses
import os
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from deframe.degrade import degrade, make_rng, psf_gaussian, standard_normal
from deframe.fracgrad import frac_coeffs, frac_gradient, frac_spectral_symbol
from deframe.framelet import framelet_analyze, framelet_synthesize
from deframe.grid import conv_circular, psf_to_spectral
from deframe.harness import cmd_deblur, cmd_degrade, cmd_sweep, load_manifest
from deframe.io import load_image
from deframe.metrics import fsim, psnr, ssim
from deframe.solver import SolverConfig, SolverState, e_update, eta3_project, eta_shrink, solve, x_update

from oracles import (
    circular_convolve_direct,
    circulant_matrix,
    frac_gradient_direct,
    frac_matrix,
    framelet_matrix,
    framelet_synthesize_direct,
    gl_coeffs_gamma,
    golden_section,
    kernel_basis_matrix,
    prox_norm_numeric,
)

MANIFESTS = Path(__file__).resolve().parents[1] / "manifests"
ALPHA_GRID = (0.25, 0.5, 0.75, 1.0, 1.5, 1.75)
REFERENCE_PSNR_5210 = 27.9004


def verdict(name, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_parseval_tight_frame():
    rng = np.random.default_rng(100)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        x = rng.random((64, 64))
        worst = max(worst, np.abs(framelet_synthesize(framelet_analyze(x)) - x).max())
    dt = time.perf_counter() - t0
    verdict("tight frame", worst <= 1e-10 and dt < 5.0,
            f"max |W^T W x - x| = {worst:.2e} (<= 1e-10) over 100 images in {dt:.2f} s (< 5 s)")


def test_fractional_reduction():
    x = np.random.default_rng(101).random((64, 64))
    g1 = frac_gradient(x, frac_coeffs(1.0, 15))
    d1 = np.stack([x - np.roll(x, 1, 0), x - np.roll(x, 1, 1)])
    err1 = np.abs(g1 - d1).max()
    g2 = frac_gradient(x, frac_coeffs(2.0, 15))
    d2 = np.stack([x - 2 * np.roll(x, 1, 0) + np.roll(x, 2, 0),
                   x - 2 * np.roll(x, 1, 1) + np.roll(x, 2, 1)])
    err2 = np.abs(g2 - d2).max()
    verdict("fractional reduction", err1 <= 1e-14 and err2 <= 1e-14,
            f"alpha=1 vs first differences {err1:.1e}, alpha=2 vs second differences {err2:.1e} (<= 1e-14)")


def test_coefficient_oracle():
    worst = max(np.abs(frac_coeffs(a, 21).phi - gl_coeffs_gamma(a, 21)).max() for a in ALPHA_GRID)
    verdict("coefficient oracle", worst <= 1e-10,
            f"recurrence vs Gamma formula, i <= 20, alpha in {ALPHA_GRID}: {worst:.1e} (<= 1e-10)")


def test_spectral_vs_spatial():
    rng = np.random.default_rng(102)
    n = 16
    x = rng.random((n, n))
    k = rng.random((5, 5))
    k /= k.sum()
    blur = np.abs(psf_to_spectral(k, n, n).apply(x) - circular_convolve_direct(x, k)).max()
    blur = max(blur, np.abs(conv_circular(x, k) - circular_convolve_direct(x, k)).max())
    frac = 0.0
    for a in ALPHA_GRID:
        c = frac_coeffs(a, 15)
        sh, sv = frac_spectral_symbol(c, n, n)
        ref = frac_gradient_direct(x, c.phi)
        frac = max(frac, np.abs(sh.apply(x) - ref[0]).max(), np.abs(sv.apply(x) - ref[1]).max())
    coeffs = rng.standard_normal((3, 3, n, n))
    adj = np.abs(framelet_synthesize(coeffs) - framelet_synthesize_direct(coeffs)).max()
    worst = max(blur, frac, adj)
    verdict("spectral vs spatial", worst <= 1e-10,
            f"16x16 blur {blur:.1e}, fractional gradient {frac:.1e}, framelet adjoint {adj:.1e} (<= 1e-10)")


def test_dense_oracle_equivalence():
    n = 8
    rng = np.random.default_rng(103)
    cfg = SolverConfig(lambda3=0.5, beta1=0.7, beta2=1.3, beta3=0.3, q=6)
    c = frac_coeffs(cfg.alpha, cfg.q)
    k0 = rng.random((3, 3))
    k0 /= k0.sum()
    e_kernel = 0.01 * rng.standard_normal((n, n))
    y = rng.random((n, n))
    state = SolverState(
        x=rng.random((n, n)), anchor=rng.random((n, n)), e_op=psf_to_spectral(e_kernel, n, n),
        eta1=rng.standard_normal((3, 3, n, n)), eta2=rng.standard_normal((2, n, n)),
        eta3=rng.random((n, n)), theta1=rng.standard_normal((3, 3, n, n)),
        theta2=rng.standard_normal((2, n, n)), theta3=rng.standard_normal((n, n)),
    )
    k0_op = psf_to_spectral(k0, n, n)
    t0 = time.perf_counter()
    x_fast = x_update(state, cfg, k0_op, y)
    e_fast = e_update(state, cfg, k0_op, y, x_fast).response
    dt = time.perf_counter() - t0

    K0 = circulant_matrix(k0, n, n)
    H = K0 + circulant_matrix(e_kernel, n, n)
    W = framelet_matrix(n, n)
    D = frac_matrix(c.phi, n, n)
    I = np.eye(n * n)
    b1, b3 = cfg.beta1, cfg.beta3
    lhs = H.T @ H + b1 * I + b3 * (W.T @ W + D.T @ D + I)
    rhs = (H.T @ y.ravel() + b1 * state.anchor.ravel() + W.T @ (b3 * state.eta1 - state.theta1).ravel()
           + D.T @ (b3 * state.eta2 - state.theta2).ravel() + (b3 * state.eta3 - state.theta3).ravel())
    x_dense = np.linalg.solve(lhs, rhs).reshape(n, n)
    x_err = np.abs(x_fast - x_dense).max()

    M = kernel_basis_matrix(x_fast)
    r = y.ravel() - K0 @ x_fast.ravel()
    e = np.linalg.solve(M.T @ M + (cfg.lambda3 + cfg.beta2) * I, M.T @ r + cfg.beta2 * e_kernel.ravel())
    e_err = np.abs(e_fast - psf_to_spectral(e.reshape(n, n), n, n).response).max()
    verdict("dense-oracle equivalence", x_err <= 1e-8 and e_err <= 1e-8 and dt < 1.0,
            f"8x8, 3x3 kernel: x update {x_err:.1e}, E update {e_err:.1e} (<= 1e-8), {dt * 1e3:.1f} ms")


def test_prox_oracles():
    rng = np.random.default_rng(104)
    lam, beta3 = 0.9, 0.6
    t = lam / beta3
    scalars = 3 * rng.standard_normal(10_000)
    got = eta_shrink(scalars, np.zeros_like(scalars), lam, beta3)
    ref = np.array([golden_section(lambda e, v=v: t * abs(e) + 0.5 * (e - v) ** 2, -20.0, 20.0)
                    for v in scalars])
    s_err = np.abs(got - ref).max()

    pairs = 3 * rng.standard_normal((2, 10_000))
    got = eta_shrink(pairs, np.zeros_like(pairs), lam, beta3, group_axis=0)
    ref = np.stack([prox_norm_numeric(pairs[:, i], t) for i in range(pairs.shape[1])], axis=1)
    p_err = np.abs(got - ref).max()

    v = 2 * rng.standard_normal(10_000)
    grid = np.linspace(0.0, 1.0, 1001)
    ref = grid[np.argmin((grid[None, :] - v[:, None]) ** 2, axis=1)]
    b_err = np.abs(eta3_project(v, np.zeros_like(v), 1.0) - ref).max()
    verdict("prox oracles", s_err <= 1e-6 and p_err <= 1e-6 and b_err <= 1e-3,
            f"10^4 scalars {s_err:.1e}, 10^4 pairs {p_err:.1e} (<= 1e-6); box projection {b_err:.1e} (<= 1e-3 grid)")


@pytest.mark.slow
def test_convergence_curves():
    m = load_manifest(MANIFESTS / "motion128.toml")
    clean = load_image(m.input_image, size=m.resize)
    y, k0, _ = degrade(clean, m.degradation)
    t0 = time.perf_counter()
    res = solve(y, k0, m.single_config(), reference=clean)
    dt = time.perf_counter() - t0
    h = res.history
    ok = (clean.shape == (128, 128) and h.stop_reason == "tol" and len(h) <= 100
          and h.errors[-1] <= 1e-3 and h.rows[-1].psnr > h.rows[0].psnr and dt < 120)
    verdict("convergence", ok,
            f"128x128 motion(10, 45 deg): error {h.errors[-1]:.2e} <= 1e-3 after {len(h)} iterations; "
            f"PSNR {h.rows[0].psnr:.2f} -> {h.rows[-1].psnr:.2f} dB; {dt:.1f} s (< 120 s)")


def test_restoration_gain():
    m = load_manifest(MANIFESTS / "smoke.toml")
    clean = load_image(m.input_image)
    y, k0, _ = degrade(clean, m.degradation)
    cfg = m.single_config()
    res = solve(y, k0, cfg)
    before = psnr(np.clip(y, 0, 1), clean)
    after = psnr(res.x, clean)
    verdict("restoration gain", cfg == SolverConfig() and after - before >= 2.0,
            f"64x64 smoke, default config: {before:.2f} -> {after:.2f} dB, gain {after - before:.2f} dB (>= 2)")


@pytest.fixture(scope="module")
def sweep_runs(tmp_path_factory):
    """The shipped sweep manifest, run twice into separate directories."""
    base = tmp_path_factory.mktemp("sweep")
    out = []
    for tag in ("a", "b"):
        m = load_manifest(MANIFESTS / "gaussian256_sweep.toml", out=base / tag)
        t0 = time.perf_counter()
        _, records = cmd_sweep(m)
        out.append((m, records, time.perf_counter() - t0))
    return out


@pytest.mark.slow
def test_reference_psnr_proximity(sweep_runs, tmp_path):
    m, records, dt = sweep_runs[0]
    clean = load_image(m.input_image, size=m.resize)
    y, _, _ = degrade(clean, m.degradation)
    degraded = psnr(np.clip(y, 0, 1), clean)
    best = records[0].report.psnr
    gain_ok = best - degraded >= 1.5 and dt <= 1800
    detail = (f"camera 256x256, gaussian 15x15 s1.5, 4 dBm, {len(records)}-config grid: "
              f"best {best:.2f} dB vs degraded {degraded:.2f} dB (gain {best - degraded:.2f} >= 1.5), {dt:.0f} s")

    image_5210 = os.environ.get("DEFRAME_IMAGE_5210")
    if image_5210:
        m5 = dataclasses.replace(m, input_image=Path(image_5210), resize=(256, 256), outputs=tmp_path)
        clean5 = load_image(m5.input_image, size=m5.resize)
        y5, _, _ = degrade(clean5, m5.degradation)
        _, rec5 = cmd_sweep(m5)
        best5, deg5 = rec5[0].report.psnr, psnr(np.clip(y5, 0, 1), clean5)
        near = abs(best5 - REFERENCE_PSNR_5210) <= 2.5
        ACCEPTANCE_LINES.append(
            f"[{'PASS' if near else 'SOFT-FAIL'}] reference PSNR proximity (5.2.10): best {best5:.2f} dB vs "
            f"{REFERENCE_PSNR_5210} +/- 2.5 (degraded {deg5:.2f} dB)")
        gain_ok = gain_ok and best5 - deg5 >= 1.5
        detail += f"; 5.2.10 gain {best5 - deg5:.2f} dB"
    else:
        ACCEPTANCE_LINES.append("[NOT RUN] reference PSNR proximity (5.2.10): image not supplied "
                                "(set DEFRAME_IMAGE_5210); soft criterion")
    verdict("5.2.10-setting restoration gain", gain_ok, detail)


def test_metric_sanity():
    img = load_image(MANIFESTS / "images" / "camera256.png")
    s_id, f_id = ssim(img, img), fsim(img, img)
    values = [psnr(np.clip(img + s * standard_normal(make_rng(5), img.shape), 0, 1), img)
              for s in (0.01, 0.03, 0.1)]
    ref = np.full((32, 32), 0.4)
    closed = abs(psnr(ref + 0.1, ref) - 20.0)
    blurred = [fsim(conv_circular(img, psf_gaussian(15, 15, s)), img) for s in (0.7, 1.5, 3.0)]
    ok = (abs(s_id - 1) <= 1e-12 and abs(f_id - 1) <= 1e-12 and values[0] > values[1] > values[2]
          and closed <= 1e-10 and blurred[0] > blurred[1] > blurred[2])
    verdict("metric sanity", ok,
            f"ssim(x,x)-1 = {s_id - 1:.1e}, fsim(x,x)-1 = {f_id - 1:.1e}; PSNR "
            f"{values[0]:.2f} > {values[1]:.2f} > {values[2]:.2f}; 20 dB case off by {closed:.1e}")


def _tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file() and p.suffix in (".csv", ".png", ".f64")}


@pytest.mark.slow
def test_determinism(sweep_runs, tmp_path):
    mismatched = []
    counted = 0
    for name in ("smoke.toml", "motion128.toml"):
        trees = []
        for tag in ("a", "b"):
            m = load_manifest(MANIFESTS / name, out=tmp_path / name / tag)
            cmd_degrade(m)
            cmd_deblur(m)
            trees.append(_tree_bytes(m.outputs))
        counted += len(trees[0])
        mismatched += [f"{name}:{k}" for k in trees[0] if trees[0][k] != trees[1].get(k)]
        mismatched += [f"{name}:{k}" for k in set(trees[1]) - set(trees[0])]
    a, b = (_tree_bytes(run[0].outputs) for run in sweep_runs)
    counted += len(a)
    mismatched += [f"sweep:{k}" for k in set(a) | set(b) if a.get(k) != b.get(k)]
    verdict("determinism", not mismatched,
            f"{counted} CSV/PNG/sidecar files compared across two runs of each shipped manifest; "
            f"mismatches: {mismatched or 'none'}")
