"""Image plane type and 8-bit file I/O.

Pixels live in float32 with the canonical domain [0, 1]; files are 8-bit.
The 8-bit boundary rounds half away from zero so serialization is
deterministic and matches the external-codec hand-off.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .errors import InvalidInputError


@dataclass
class Image:
    """(H, W, C) float32 plane, values in [0, 1], C in {1, 3}."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float32)
        if px.ndim == 2:
            px = px[:, :, None]
        if px.ndim != 3 or px.shape[2] not in (1, 3):
            raise InvalidInputError(f"image shape must be (H, W, 1|3), got {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise InvalidInputError("image must have H, W >= 1")
        if not np.all(np.isfinite(px)):
            raise InvalidInputError("image contains NaN/Inf")
        self.pixels = np.clip(px, 0.0, 1.0)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.pixels.shape

    @classmethod
    def from_uint8(cls, data: np.ndarray) -> "Image":
        return cls(pixels=np.asarray(data, dtype=np.float32) / 255.0)

    def to_uint8(self) -> np.ndarray:
        return np.floor(self.pixels * 255.0 + 0.5).clip(0, 255).astype(np.uint8)


def load_image(path) -> Image:
    """Read an 8-bit image file (any Pillow-readable format)."""
    with PILImage.open(path) as im:
        if im.mode in ("L", "I;16", "1"):
            im = im.convert("L")
        else:
            im = im.convert("RGB")
        arr = np.asarray(im, dtype=np.uint8)
    return Image.from_uint8(arr)


def save_image(image: Image, path):
    """Write an image; extension picks the encoding.

    .png/.bmp/...: 8-bit via Pillow. .npy: float32 pixels. .f32: raw
    little-endian float32, row-major, no header (for parity harnesses).
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".npy":
        np.save(path, image.pixels)
        return
    if suffix == ".f32":
        path.write_bytes(image.pixels.astype("<f4").tobytes())
        return
    arr = image.to_uint8()
    if arr.shape[2] == 1:
        pil = PILImage.fromarray(arr[:, :, 0], mode="L")
    else:
        pil = PILImage.fromarray(arr, mode="RGB")
    pil.save(path)
