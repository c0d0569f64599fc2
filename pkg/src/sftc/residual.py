"""Enhancement-layer residual formation and min-max normalization.

The residual between the original image and the coarse reconstruction is
mapped into [0, 1] with its global extrema; the two extrema travel in the
enhancement header so the decoder can undo the scaling. A constant
residual (max == min) is flagged degenerate and coded as all zeros.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CorruptHeaderError, InvalidInputError
from .image import Image


@dataclass
class ResidualPlane:
    """(H, W, C) float32 difference plane with its observed extrema."""

    values: np.ndarray
    x_min: float
    x_max: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        # extrema are float32 wire fields; hold them at that precision
        self.x_min = float(np.float32(self.x_min))
        self.x_max = float(np.float32(self.x_max))
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError("residual contains NaN/Inf")
        if self.x_min > self.x_max:
            raise InvalidInputError("residual extrema out of order")
        if self.values.size:
            if self.x_min > float(self.values.min()) or self.x_max < float(
                self.values.max()
            ):
                raise InvalidInputError("residual extrema do not cover the values")


@dataclass
class NormalizedTexture:
    """(H, W, C) float32 texture in [0, 1]; degenerate means all zeros."""

    values: np.ndarray
    degenerate: bool = field(default=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.size and (
            float(self.values.min()) < 0.0 or float(self.values.max()) > 1.0
        ):
            raise InvalidInputError("normalized texture outside [0, 1]")
        if self.degenerate and self.values.size and float(np.abs(self.values).max()):
            raise InvalidInputError("degenerate texture must be all zeros")


def compute_residual(x: Image, x_fea: Image) -> ResidualPlane:
    """x - x_fea in the [0, 1] pixel domain, with exact global extrema."""
    if x.shape != x_fea.shape:
        raise InvalidInputError(f"shape mismatch {x.shape} vs {x_fea.shape}")
    values = x.pixels - x_fea.pixels
    return ResidualPlane(
        values=values, x_min=float(values.min()), x_max=float(values.max())
    )


def normalize_residual(r: ResidualPlane) -> NormalizedTexture:
    """Map the residual affinely onto [0, 1] using its extrema."""
    x_min = np.float32(r.x_min)
    x_max = np.float32(r.x_max)
    if x_min == x_max:
        return NormalizedTexture(
            values=np.zeros_like(r.values), degenerate=True
        )
    values = (r.values - x_min) / (x_max - x_min)
    return NormalizedTexture(values=np.clip(values, 0.0, 1.0), degenerate=False)


def denormalize_residual(t: NormalizedTexture, x_min: float, x_max: float) -> ResidualPlane:
    """Inverse of :func:`normalize_residual` given the transmitted extrema."""
    if x_min > x_max:
        raise CorruptHeaderError(f"x_min {x_min} > x_max {x_max}")
    # extrema travel as float32 header fields; mirror that precision here
    x_min = float(np.float32(x_min))
    x_max = float(np.float32(x_max))
    span = np.float32(x_max) - np.float32(x_min)
    values = t.values * span + np.float32(x_min)
    # float32 rounding may overshoot the extrema by an ulp; keep the invariant
    values = np.clip(values, np.float32(x_min), np.float32(x_max))
    return ResidualPlane(values=values, x_min=x_min, x_max=x_max)


def combine(x_fea: Image, residual: ResidualPlane) -> Image:
    """Decoder-side fusion: clamp(x_fea + residual, 0, 1)."""
    if x_fea.shape != residual.values.shape:
        raise InvalidInputError(
            f"shape mismatch {x_fea.shape} vs {residual.values.shape}"
        )
    return Image(pixels=np.clip(x_fea.pixels + residual.values, 0.0, 1.0))
