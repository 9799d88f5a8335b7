"""Elastic-interaction energy, its spectral gradient, and the companion
training losses (MSE baseline, range BCE, focal existence, aux, total).

All spectral quantities use the field module's transform convention
(forward carries 1/(width*height)). The energy of a difference field
D = G - alpha*Psi is the kernel-weighted spectral power

    E(D) = sum_{m,n} sqrt(m^2 + n^2) |d_mn|^2

which is zero exactly when every non-DC mode of D vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elm import HeavisideParams, heaviside_slope
from .field import (
    Field2D,
    ShapeMismatchError,
    Spectrum,
    dft_forward,
    dft_inverse,
    frequency_kernel,
)

_CLAMP_EPS = 1e-7


@dataclass(frozen=True)
class EieParams:
    """Coupling weight ``alpha`` applied to the prediction in G - alpha*Psi."""

    alpha: float = 0.5

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")


@dataclass(frozen=True)
class LossWeights:
    lambda_eie: float = 1.0
    lambda_a: float = 1.0
    lambda_r: float = 0.1
    lambda_e: float = 0.2
    aux_lambda1: float = 0.3
    aux_lambda2: float = 0.3

    def __post_init__(self):
        for name in ("lambda_eie", "lambda_a", "lambda_r", "lambda_e",
                     "aux_lambda1", "aux_lambda2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class EnergyBreakdown:
    """Quadratic-form split of E(G - alpha*Psi) into self and cross terms."""

    self_gt: float
    self_pred: float
    interaction: float

    @property
    def total(self) -> float:
        return self.self_gt + self.self_pred + self.interaction


def _require_same_shape(*fields: Field2D) -> None:
    shapes = {f.shape for f in fields}
    if len(shapes) > 1:
        raise ShapeMismatchError(f"fields have mismatched shapes: {sorted(shapes, key=str)}")


def difference_field(gt: Field2D, psi_p: Field2D, p: EieParams) -> Field2D:
    _require_same_shape(gt, psi_p)
    return Field2D(gt.values - p.alpha * psi_p.values)


def eie_energy(d: Field2D) -> float:
    kernel = frequency_kernel(d.shape).magnitudes
    coef = dft_forward(d).coefficients
    return float(np.sum(kernel * (coef.real**2 + coef.imag**2)))


def eie_bilinear(a: Field2D, b: Field2D) -> float:
    """Symmetric form Q(a, b) with Q(d, d) = eie_energy(d)."""
    _require_same_shape(a, b)
    kernel = frequency_kernel(a.shape).magnitudes
    ca = dft_forward(a).coefficients
    cb = dft_forward(b).coefficients
    return float(np.sum(kernel * np.real(np.conj(ca) * cb)))


def energy_breakdown(gt: Field2D, psi_p: Field2D, p: EieParams) -> EnergyBreakdown:
    """E(G - alpha*Psi) = Q(G,G) + alpha^2 Q(Psi,Psi) - 2 alpha Q(G,Psi)."""
    _require_same_shape(gt, psi_p)
    return EnergyBreakdown(
        self_gt=eie_bilinear(gt, gt),
        self_pred=p.alpha**2 * eie_bilinear(psi_p, psi_p),
        interaction=-2.0 * p.alpha * eie_bilinear(gt, psi_p),
    )


def eie_gradient(d: Field2D) -> Field2D:
    """Inverse transform of (sqrt(m^2+n^2)/2) * d_mn.

    Under the forward-normalized transform the exact derivative of
    eie_energy with respect to each pixel of d equals 4/(width*height)
    times this field; the positive constant is absorbed into step sizes,
    so this function is the descent direction up to scale.
    """
    coef = dft_forward(d).coefficients
    kernel = frequency_kernel(d.shape).magnitudes
    return dft_inverse(Spectrum(0.5 * kernel * coef))


def descent_direction(gt: Field2D, psi_p: Field2D, p: EieParams) -> Field2D:
    """Field to add to Psi (scaled by a small step) to decrease the energy."""
    _require_same_shape(gt, psi_p)
    grad = eie_gradient(difference_field(gt, psi_p, p))
    return Field2D(p.alpha * grad.values)


def mse_energy(gt: Field2D, psi_p: Field2D) -> float:
    _require_same_shape(gt, psi_p)
    return float(np.mean((gt.values - psi_p.values) ** 2))


def mse_gradient_wrt_phi(
    gt: Field2D, psi_p: Field2D, phi_p: Field2D, p: HeavisideParams
) -> Field2D:
    """Chain rule of mse_energy through the Heaviside: zero wherever the
    ramp is saturated (|phi| >= sigma), which is what makes the baseline
    short-range."""
    _require_same_shape(gt, psi_p, phi_p)
    slope = heaviside_slope(phi_p, p).values
    pixels = gt.shape.size
    return Field2D(-2.0 * (gt.values - psi_p.values) * slope / pixels)


def _clamped_probs(probs, labels):
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if probs.shape != labels.shape or probs.ndim != 1:
        raise ValueError("probs and labels must be 1D arrays of equal length")
    return np.clip(probs, _CLAMP_EPS, 1.0 - _CLAMP_EPS), labels


def range_bce(probs, labels) -> float:
    """Mean binary cross-entropy over per-row existence probabilities."""
    p, y = _clamped_probs(probs, labels)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def focal_existence(probs, labels, gamma: float = 2.0, alpha_f: float = 0.25) -> float:
    """Focal loss over per-slot lane existence; gamma=0, alpha_f=1 is BCE."""
    p, y = _clamped_probs(probs, labels)
    p_t = np.where(y == 1.0, p, 1.0 - p)
    return float(np.mean(-alpha_f * (1.0 - p_t) ** gamma * np.log(p_t)))


def aux_loss(
    psi_p2: Field2D,
    psi_p3: Field2D,
    gt2: Field2D,
    gt3: Field2D,
    w: LossWeights,
    p: EieParams,
) -> float:
    """Deep-supervision term: weighted EIE energies of two side predictions."""
    e2 = eie_energy(difference_field(gt2, psi_p2, p))
    e3 = eie_energy(difference_field(gt3, psi_p3, p))
    return w.aux_lambda1 * e2 + w.aux_lambda2 * e3


def total_loss(
    l_eie: float, l_aux: float, l_range: float, l_exist: float, w: LossWeights
) -> float:
    return (
        w.lambda_eie * l_eie
        + w.lambda_a * l_aux
        + w.lambda_r * l_range
        + w.lambda_e * l_exist
    )
