"""Transform-layer tests: the FFT-backed operations against a direct
summation oracle, plus grid/spectrum type invariants."""

import numpy as np
import pytest

from elasticlane.field import (
    Field2D,
    GridShape,
    NonHermitianSpectrumError,
    Spectrum,
    dft_forward,
    dft_inverse,
    frequency_kernel,
    signed_modes,
)


def oracle_forward(values):
    """Direct summation of the transform definition, O(K^4). Written here
    independently of the package's own check suite."""
    h, w = values.shape
    out = np.zeros((h, w), dtype=complex)
    for n in range(h):
        for m in range(w):
            acc = 0.0 + 0.0j
            for y in range(h):
                for x in range(w):
                    acc += values[y, x] * np.exp(-2j * np.pi * (m * x / w + n * y / h))
            out[n, m] = acc
    return out / (w * h)


def test_forward_matches_oracle_on_random_fields():
    rng = np.random.default_rng(11)
    for _ in range(5):
        values = rng.uniform(-1.0, 1.0, size=(6, 5))
        fast = dft_forward(Field2D(values)).coefficients
        slow = oracle_forward(values)
        assert np.max(np.abs(fast - slow)) < 1e-12


def test_forward_normalization_dc_is_mean():
    values = np.full((4, 8), 3.25)
    spec = dft_forward(Field2D(values))
    assert spec.coef(0, 0) == pytest.approx(3.25, abs=1e-14)


def test_roundtrip_recovers_field():
    rng = np.random.default_rng(3)
    values = rng.standard_normal((12, 16))
    back = dft_inverse(dft_forward(Field2D(values)))
    assert np.max(np.abs(back.values - values)) < 1e-12


def test_parseval_under_forward_normalization():
    # sum f^2 / (w*h) == sum |coef|^2 with the 1/(w*h) forward factor
    rng = np.random.default_rng(5)
    values = rng.uniform(-2.0, 2.0, size=(16, 16))
    coef = dft_forward(Field2D(values)).coefficients
    lhs = np.sum(values**2) / values.size
    rhs = np.sum(np.abs(coef) ** 2)
    assert abs(lhs - rhs) < 1e-10 * max(abs(lhs), 1.0)


def test_single_cosine_lands_on_two_conjugate_modes():
    x = np.arange(8)
    values = np.tile(np.cos(2 * np.pi * x / 8), (8, 1))
    spec = dft_forward(Field2D(values))
    assert spec.coef(1, 0) == pytest.approx(0.5, abs=1e-13)
    assert spec.coef(-1, 0) == pytest.approx(0.5, abs=1e-13)
    # everything else empty
    coef = spec.coefficients.copy()
    coef[0, 1] = 0.0
    coef[0, -1] = 0.0
    assert np.max(np.abs(coef)) < 1e-13


def test_signed_modes_layout():
    assert signed_modes(8).tolist() == [0, 1, 2, 3, -4, -3, -2, -1]
    assert signed_modes(5).tolist() == [0, 1, 2, -2, -1]


def test_kernel_zero_at_dc_and_symmetric():
    kernel = frequency_kernel(GridShape(8, 6)).magnitudes
    assert kernel[0, 0] == 0.0
    assert kernel[0, 1] == pytest.approx(1.0)
    assert kernel[1, 0] == pytest.approx(1.0)
    # symmetry under (m, n) -> (-m, -n)
    for n in range(6):
        for m in range(8):
            assert kernel[n, m] == pytest.approx(kernel[-n % 6, -m % 8])


def test_dft_inverse_rejects_non_hermitian_spectrum():
    coef = np.zeros((4, 4), dtype=complex)
    coef[0, 1] = 1.0 + 0.0j  # missing the conjugate partner at (0, -1)
    with pytest.raises(NonHermitianSpectrumError):
        dft_inverse(Spectrum(coef))


def test_grid_shape_validation():
    with pytest.raises(ValueError):
        GridShape(width=2, height=8)
    with pytest.raises(ValueError):
        GridShape(width=8, height=0)
    assert GridShape(8, 4).size == 32


def test_field_requires_finite_2d():
    with pytest.raises(ValueError):
        Field2D(np.array([1.0, 2.0]))
    bad = np.zeros((4, 4))
    bad[1, 1] = np.nan
    with pytest.raises(ValueError):
        Field2D(bad)


def test_spectrum_coef_uses_signed_indices():
    rng = np.random.default_rng(9)
    values = rng.standard_normal((8, 8))
    spec = dft_forward(Field2D(values))
    assert spec.coef(-1, 2) == spec.coefficients[2, 7]
    # real input: coefficients come in conjugate pairs
    assert spec.coef(-1, -2) == pytest.approx(np.conj(spec.coef(1, 2)))
