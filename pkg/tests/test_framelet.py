import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deframe.errors import DimensionError
from deframe.framelet import MASKS, framelet_analyze, framelet_synthesize

from oracles import circular_convolve_direct, framelet_matrix


def test_mask_sums():
    assert MASKS[0].sum() == pytest.approx(1.0)
    assert MASKS[1].sum() == pytest.approx(0.0, abs=1e-16)
    assert MASKS[2].sum() == pytest.approx(0.0, abs=1e-16)


def test_constant_image_has_no_detail():
    c = framelet_analyze(np.full((12, 10), 0.7))
    np.testing.assert_allclose(c[0, 0], 0.7, atol=1e-14)
    detail = c.copy()
    detail[0, 0] = 0.0
    assert np.abs(detail).max() <= 1e-14


def test_bands_match_direct_convolution():
    rng = np.random.default_rng(5)
    x = rng.random((11, 9))
    c = framelet_analyze(x)
    for a in range(3):
        for b in range(3):
            ref = circular_convolve_direct(x, np.outer(MASKS[a], MASKS[b]))
            assert np.abs(c[a, b] - ref).max() <= 1e-12


def test_ramp_response():
    x = np.tile(np.arange(16, dtype=float), (8, 1))  # increases along axis 1
    c = framelet_analyze(x)
    interior = c[0, 1][:, 1:-1]
    np.testing.assert_allclose(interior, np.sqrt(2) / 2, atol=1e-12)
    assert np.abs(c[2, 2][:, 1:-1]).max() <= 1e-12


def test_impulse_gives_shifted_mask_products():
    x = np.zeros((7, 7))
    x[0, 0] = 1.0
    c = framelet_analyze(x)
    for a in range(3):
        for b in range(3):
            expected = np.zeros((7, 7))
            for p in range(3):
                for q in range(3):
                    expected[(p - 1) % 7, (q - 1) % 7] = MASKS[a, p] * MASKS[b, q]
            np.testing.assert_allclose(c[a, b], expected, atol=1e-15)


def test_perfect_reconstruction_32():
    x = np.random.default_rng(9).random((32, 32))
    c = framelet_analyze(x)
    assert np.abs(framelet_synthesize(c) - x).max() <= 1e-10
    assert np.sum(c**2) == pytest.approx(np.sum(x**2), rel=1e-10)


def test_zero_coefficients():
    assert not framelet_synthesize(np.zeros((3, 3, 5, 6))).any()


def test_mismatched_subbands():
    bands = [[np.zeros((4, 4))] * 3 for _ in range(3)]
    bands[2][1] = np.zeros((4, 5))
    with pytest.raises(DimensionError):
        framelet_synthesize(bands)
    with pytest.raises(DimensionError):
        framelet_synthesize(np.zeros((2, 3, 4, 4)))


def test_synthesis_is_dense_adjoint():
    h, w = 5, 4
    W = framelet_matrix(h, w)
    np.testing.assert_allclose(W.T @ W, np.eye(h * w), atol=1e-12)
    c = np.random.default_rng(2).standard_normal((3, 3, h, w))
    np.testing.assert_allclose(framelet_synthesize(c).ravel(), W.T @ c.ravel(), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(h=st.integers(3, 40), w=st.integers(3, 40), seed=st.integers(0, 2**32 - 1))
def test_adjoint_pairing(h, w, seed):
    g = np.random.default_rng(seed)
    x = g.standard_normal((h, w))
    c = g.standard_normal((3, 3, h, w))
    lhs = np.sum(framelet_analyze(x) * c)
    rhs = np.sum(x * framelet_synthesize(c))
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
    assert np.abs(framelet_synthesize(framelet_analyze(x)) - x).max() <= 1e-10
