"""Base-layer feature quantization.

A feature vector is quantized with a uniform midtread scalar quantizer over
the fixed domain [-1, 1] (components are clamped first, so no per-vector
range has to travel in the stream). Rounding is half away from zero, which
for the non-negative scaled values reduces to floor(x + 0.5) and is
bit-stable across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CorruptPayloadError, InvalidInputError

DEFAULT_DIM = 128
DEFAULT_BITS = 8
MIN_BITS, MAX_BITS = 2, 16


@dataclass
class FeatureVector:
    """Fixed-length float descriptor, all components finite.

    Held in float64; the FVEC file format narrows to float32 at the I/O
    boundary only, so quantizer error bounds are not polluted by casts.
    """

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).ravel()
        if self.values.size == 0:
            raise InvalidInputError("feature vector must be non-empty")
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError("feature vector contains NaN/Inf")

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass
class QuantizedFeature:
    """Quantizer output: integer symbols in [0, 2^bits - 1]."""

    symbols: np.ndarray
    bits: int

    def __post_init__(self):
        self.symbols = np.asarray(self.symbols, dtype=np.int64).ravel()
        if not MIN_BITS <= self.bits <= MAX_BITS:
            raise InvalidInputError(f"bits must be in [{MIN_BITS}, {MAX_BITS}]")
        if self.symbols.size and (
            self.symbols.min() < 0 or self.symbols.max() >= (1 << self.bits)
        ):
            raise CorruptPayloadError("quantized symbol outside [0, 2^bits)")


def step_size(bits: int) -> float:
    """Quantizer step over the [-1, 1] domain."""
    return 2.0 / ((1 << bits) - 1)


def quantize_feature(v: FeatureVector, bits: int = DEFAULT_BITS) -> QuantizedFeature:
    """Clamp to [-1, 1] and quantize each component to a symbol."""
    if not MIN_BITS <= bits <= MAX_BITS:
        raise InvalidInputError(f"bits must be in [{MIN_BITS}, {MAX_BITS}], got {bits}")
    levels = (1 << bits) - 1
    x = np.clip(v.values.astype(np.float64), -1.0, 1.0)
    # (x+1)/step with the midpoint kept exact: scale by levels/2 in one shot.
    symbols = np.floor((x + 1.0) * levels / 2.0 + 0.5).astype(np.int64)
    return QuantizedFeature(symbols=symbols, bits=bits)


def dequantize_feature(q: QuantizedFeature) -> FeatureVector:
    """Map symbols back to reconstruction levels in [-1, 1]."""
    delta = step_size(q.bits)
    values = q.symbols.astype(np.float64) * delta - 1.0
    return FeatureVector(values=values)
