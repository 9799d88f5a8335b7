"""Real 2D scalar grids, their discrete Fourier transforms, and the
radial frequency kernel used by the spectral energy.

Conventions (fixed once, everything downstream depends on them):

* A field is stored row-major as a ``(height, width)`` float array, so
  pixel ``(x, y)`` lives at ``values[y, x]``. The grid is treated as
  periodic with unit pixel spacing in both axes.
* The forward transform carries the ``1/(w*h)`` normalization; the
  inverse carries none. With ``d = dft_forward(f)``:

      d(m, n) = (1 / (w*h)) * sum_{x,y} f(x, y) * exp(-2*pi*i*(m*x/w + n*y/h))
      f(x, y) = sum_{m,n} d(m, n) * exp(+2*pi*i*(m*x/w + n*y/h))

* Frequencies use the signed layout: m runs over ``[0, 1, ..., -2, -1]``
  in storage order, with the Nyquist mode (even sizes) on the negative
  side. Negative indices wrap, so ``coefficients[n, m]`` with a negative
  Python index addresses mode ``(m, n)`` directly.

All operations are pure; values are never mutated after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class ShapeMismatchError(ValueError):
    """Two grids that must share a shape do not."""


class NonHermitianSpectrumError(ValueError):
    """A spectrum expected to come from a real field is not Hermitian."""


@dataclass(frozen=True)
class GridShape:
    """Pixel counts of a grid: ``width`` along x, ``height`` rows along y."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 4 or self.height < 4:
            raise ValueError(f"grid must be at least 4x4, got {self.width}x{self.height}")

    @property
    def size(self) -> int:
        return self.width * self.height


def _as_grid(values: np.ndarray, dtype) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2D array, got ndim={arr.ndim}")
    GridShape(width=arr.shape[1], height=arr.shape[0])  # validates minimum size
    return arr


@dataclass(frozen=True)
class Field2D:
    """Real scalar grid, one value per pixel, row-major ``(height, width)``."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_grid(self.values, np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must all be finite")
        object.__setattr__(self, "values", arr)

    @property
    def shape(self) -> GridShape:
        return GridShape(width=self.values.shape[1], height=self.values.shape[0])

    @classmethod
    def zeros(cls, shape: GridShape) -> "Field2D":
        return cls(np.zeros((shape.height, shape.width)))

    @classmethod
    def full(cls, shape: GridShape, value: float) -> "Field2D":
        return cls(np.full((shape.height, shape.width), float(value)))


@dataclass(frozen=True)
class Spectrum:
    """Complex frequency coefficients of a field, DC at ``coefficients[0, 0]``.

    Storage follows the standard transform order, axis 0 holding the y
    frequencies n and axis 1 the x frequencies m. Negative signed modes
    sit in the upper half of each axis, so plain negative indexing reads
    them out (``coefficients[-1, 2]`` is mode ``(m=2, n=-1)``).
    """

    coefficients: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _as_grid(self.coefficients, np.complex128))

    @property
    def shape(self) -> GridShape:
        return GridShape(width=self.coefficients.shape[1], height=self.coefficients.shape[0])

    def coef(self, m: int, n: int) -> complex:
        """Coefficient of signed mode ``(m, n)``; negative indices wrap."""
        return complex(self.coefficients[n, m])


@dataclass(frozen=True)
class FrequencyKernel:
    """Radial mode magnitudes ``sqrt(m^2 + n^2)`` in spectrum storage order."""

    magnitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "magnitudes", _as_grid(self.magnitudes, np.float64))

    @property
    def shape(self) -> GridShape:
        return GridShape(width=self.magnitudes.shape[1], height=self.magnitudes.shape[0])


def signed_modes(count: int) -> np.ndarray:
    """Signed integer frequencies in storage order, e.g. [0, 1, 2, 3, -4, ..., -1].

    The Nyquist mode of an even-sized axis is assigned to the negative
    side; odd sizes get the symmetric range with no Nyquist mode.
    """
    return np.fft.fftfreq(count, d=1.0 / count)


@lru_cache(maxsize=64)
def _kernel_values(width: int, height: int) -> np.ndarray:
    mx = signed_modes(width)
    ny = signed_modes(height)
    mags = np.hypot(mx[np.newaxis, :], ny[:, np.newaxis])
    mags.setflags(write=False)
    return mags


def frequency_kernel(shape: GridShape) -> FrequencyKernel:
    """Kernel of mode magnitudes sqrt(m^2 + n^2); zero at DC, symmetric under (m,n) -> (-m,-n)."""
    return FrequencyKernel(_kernel_values(shape.width, shape.height).copy())


def dft_forward(f: Field2D) -> Spectrum:
    """Forward transform with the 1/(w*h) normalization.

    Hermitian symmetric by construction since the input is real.
    """
    return Spectrum(np.fft.fft2(f.values) / f.shape.size)


def dft_inverse(s: Spectrum, imag_tol: float = 1e-10) -> Field2D:
    """Inverse transform (no normalization factor), returning the real field.

    The imaginary residue is checked against ``imag_tol`` relative to the
    output magnitude and then discarded. A residue above tolerance means
    the spectrum was not Hermitian.
    """
    complex_field = np.fft.ifft2(s.coefficients) * s.shape.size
    scale = np.max(np.abs(complex_field))
    residue = np.max(np.abs(complex_field.imag))
    if residue > imag_tol * max(scale, np.finfo(np.float64).tiny):
        raise NonHermitianSpectrumError(
            f"imaginary residue {residue:.3e} exceeds {imag_tol:.1e} of max magnitude {scale:.3e}"
        )
    return Field2D(complex_field.real)
