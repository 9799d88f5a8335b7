"""Elastic-interaction lane machinery: implicit lane maps, spectral
energies and gradients, curve-evolution simulation, detection metrics,
and the file formats tying them together."""

from .elm import (
    CapacityError,
    DegenerateLaneError,
    ElmStack,
    HeavisideParams,
    LanePolyline,
    RangeMask,
    build_level_set,
    decode_lane,
    encode_lane,
    filter_departure_points,
    heaviside_slope,
    order_and_pad,
    smoothed_heaviside,
)
from .energy import (
    EieParams,
    EnergyBreakdown,
    LossWeights,
    aux_loss,
    descent_direction,
    difference_field,
    eie_bilinear,
    eie_energy,
    eie_gradient,
    energy_breakdown,
    focal_existence,
    mse_energy,
    mse_gradient_wrt_phi,
    range_bce,
    total_loss,
)
from .evolve import (
    DeltaField,
    DivergenceError,
    EvolutionConfig,
    EvolutionTrace,
    delta_field,
    evolve_explicit,
    evolve_implicit,
    evolve_mse,
    sample_bilinear,
    stable_step,
)
from .field import (
    Field2D,
    FrequencyKernel,
    GridShape,
    NonHermitianSpectrumError,
    ShapeMismatchError,
    Spectrum,
    dft_forward,
    dft_inverse,
    frequency_kernel,
    signed_modes,
)
from .metrics import (
    DetectionMetrics,
    LaneSet,
    lane_iou,
    match_and_score,
    rasterize_lane,
    tusimple_counts,
    tusimple_score,
    tusimple_tally,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "DegenerateLaneError",
    "DeltaField",
    "DetectionMetrics",
    "DivergenceError",
    "EieParams",
    "ElmStack",
    "EnergyBreakdown",
    "EvolutionConfig",
    "EvolutionTrace",
    "Field2D",
    "FrequencyKernel",
    "GridShape",
    "HeavisideParams",
    "LanePolyline",
    "LaneSet",
    "LossWeights",
    "NonHermitianSpectrumError",
    "RangeMask",
    "ShapeMismatchError",
    "Spectrum",
    "aux_loss",
    "build_level_set",
    "decode_lane",
    "delta_field",
    "descent_direction",
    "dft_forward",
    "dft_inverse",
    "difference_field",
    "eie_bilinear",
    "eie_energy",
    "eie_gradient",
    "encode_lane",
    "energy_breakdown",
    "evolve_explicit",
    "evolve_implicit",
    "evolve_mse",
    "filter_departure_points",
    "focal_existence",
    "frequency_kernel",
    "heaviside_slope",
    "lane_iou",
    "match_and_score",
    "mse_energy",
    "mse_gradient_wrt_phi",
    "order_and_pad",
    "range_bce",
    "rasterize_lane",
    "sample_bilinear",
    "signed_modes",
    "smoothed_heaviside",
    "stable_step",
    "total_loss",
    "tusimple_counts",
    "tusimple_score",
    "tusimple_tally",
]
