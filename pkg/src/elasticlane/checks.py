"""Self-check suites behind the gradcheck command: a direct-summation DFT
oracle and a finite-difference probe of the spectral gradient.

The oracle evaluates the transform definition term by term, O(K^4) for a
K-by-K grid, so agreement with the FFT-backed implementation is evidence
about the implementation rather than about numpy. The FD probe checks
that eie_gradient is collinear with the numerical gradient of eie_energy
and that the fitted scale between them is one constant: 4/(width*height)
under the forward-normalized transform.
"""

from __future__ import annotations

import numpy as np

from .energy import eie_energy, eie_gradient
from .field import Field2D, GridShape, dft_forward, dft_inverse, frequency_kernel

COSINE_TOL = 1e-6
SCALE_SPREAD_TOL = 2e-6
FORWARD_TOL = 1e-9
ROUNDTRIP_TOL = 1e-12


def naive_dft_forward(values: np.ndarray) -> np.ndarray:
    """Direct summation of the forward transform definition."""
    height, width = values.shape
    xs = np.arange(width)
    ys = np.arange(height)
    coef = np.zeros((height, width), dtype=np.complex128)
    for n in range(height):
        for m in range(width):
            phase = np.exp(-2j * np.pi * (m * xs[np.newaxis, :] / width
                                          + n * ys[:, np.newaxis] / height))
            coef[n, m] = np.sum(values * phase)
    return coef / (width * height)


def dft_suite(seed: int = 0, size: int = 8, trials: int = 100) -> dict:
    """Compare the FFT-backed transform against the summation oracle."""
    rng = np.random.default_rng(seed)
    max_forward = 0.0
    max_roundtrip = 0.0
    for _ in range(trials):
        values = rng.uniform(-1.0, 1.0, size=(size, size))
        f = Field2D(values)
        fast = dft_forward(f).coefficients
        slow = naive_dft_forward(values)
        max_forward = max(max_forward, float(np.max(np.abs(fast - slow))))
        back = dft_inverse(dft_forward(f)).values
        max_roundtrip = max(max_roundtrip, float(np.max(np.abs(back - values))))
    return {
        "size": f"{size}x{size}",
        "trials": trials,
        "max_forward_error": max_forward,
        "max_roundtrip_error": max_roundtrip,
        "forward_tol": FORWARD_TOL,
        "roundtrip_tol": ROUNDTRIP_TOL,
        "pass": max_forward < FORWARD_TOL and max_roundtrip < ROUNDTRIP_TOL,
    }


def _corrupted_gradient(d: Field2D) -> Field2D:
    # Negative control: squaring the kernel changes the gradient's
    # direction, so the collinearity check must fail on it.
    kernel = frequency_kernel(d.shape).magnitudes
    coef = np.fft.fft2(d.values)
    return Field2D(np.fft.ifft2(0.5 * kernel**2 * coef).real)


def numerical_gradient(values: np.ndarray, fd_step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of eie_energy, pixel by pixel."""
    grad = np.zeros_like(values)
    for y in range(values.shape[0]):
        for x in range(values.shape[1]):
            bumped = values.copy()
            bumped[y, x] = values[y, x] + fd_step
            e_plus = eie_energy(Field2D(bumped))
            bumped[y, x] = values[y, x] - fd_step
            e_minus = eie_energy(Field2D(bumped))
            grad[y, x] = (e_plus - e_minus) / (2.0 * fd_step)
    return grad


def fd_suite(
    seed: int = 0,
    size: int = 16,
    trials: int = 20,
    fd_step: float = 1e-5,
    corrupt_kernel: bool = False,
) -> dict:
    """Collinearity and scale consistency of the spectral gradient."""
    rng = np.random.default_rng(seed)
    gradient = _corrupted_gradient if corrupt_kernel else eie_gradient
    min_cosine = 1.0
    scales = []
    for _ in range(trials):
        values = rng.uniform(-1.0, 1.0, size=(size, size))
        analytic = gradient(Field2D(values)).values
        numeric = numerical_gradient(values, fd_step)
        dot = float(np.sum(analytic * numeric))
        cosine = dot / (np.linalg.norm(analytic) * np.linalg.norm(numeric))
        min_cosine = min(min_cosine, cosine)
        scales.append(dot / float(np.sum(analytic * analytic)))
    scales = np.array(scales)
    expected = 4.0 / GridShape(width=size, height=size).size
    spread = float(np.max(scales) - np.min(scales))
    return {
        "size": f"{size}x{size}",
        "trials": trials,
        "min_cosine": min_cosine,
        "cosine_tol": COSINE_TOL,
        "scale_mean": float(np.mean(scales)),
        "scale_spread": spread,
        "expected_scale": expected,
        "pass": bool(
            min_cosine > 1.0 - COSINE_TOL
            and spread < SCALE_SPREAD_TOL
            and abs(float(np.mean(scales)) - expected) < 1e-6
        ),
    }
