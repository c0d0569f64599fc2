"""External residual codec hand-off.

The normalized texture is serialized as an 8-bit lossless PNG, handed to a
user-supplied command through {IN}/{OUT} placeholders, and the command's
output bytes become the enhancement payload verbatim. Decoding runs the
paired template the other way and reads the image it produces.

Encode side: {IN} is a .png we wrote, {OUT} is the .bin the codec writes.
Decode side: {IN} is the payload as .bin, {OUT} must be a readable image.
A plain `cp {IN} {OUT}` therefore yields a lossless PNG enhancement layer.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .errors import ExternalCodecError, InvalidInputError
from .residual import NormalizedTexture

IN_TOKEN = "{IN}"
OUT_TOKEN = "{OUT}"


def _render(template: str, in_path: Path, out_path: Path) -> list[str]:
    if IN_TOKEN not in template or OUT_TOKEN not in template:
        raise InvalidInputError(
            f"codec template must contain {IN_TOKEN} and {OUT_TOKEN}"
        )
    argv = []
    for token in shlex.split(template):
        token = token.replace(IN_TOKEN, str(in_path)).replace(OUT_TOKEN, str(out_path))
        argv.append(token)
    return argv


def _run(argv: list[str], out_path: Path) -> bytes:
    try:
        proc = subprocess.run(argv, capture_output=True, timeout=120)
    except FileNotFoundError as exc:
        raise ExternalCodecError(f"codec executable not found: {argv[0]}") from exc
    except subprocess.TimeoutExpired as exc:
        raise ExternalCodecError(f"codec timed out: {' '.join(argv)}") from exc
    if proc.returncode != 0:
        raise ExternalCodecError(
            f"codec exited {proc.returncode}: {' '.join(argv)}\n"
            f"stderr: {proc.stderr.decode(errors='replace')[:2000]}"
        )
    if not out_path.exists():
        raise ExternalCodecError(f"codec produced no output file {out_path}")
    return out_path.read_bytes()


def texture_to_uint8(t: NormalizedTexture) -> np.ndarray:
    """8-bit hand-off quantization, rounding half away from zero."""
    return np.floor(t.values * 255.0 + 0.5).clip(0, 255).astype(np.uint8)


def encode_residual_external(t: NormalizedTexture, template: str) -> bytes:
    arr = texture_to_uint8(t)
    with tempfile.TemporaryDirectory(prefix="sftc-enc-") as tmp:
        in_path = Path(tmp) / "texture.png"
        out_path = Path(tmp) / "payload.bin"
        if arr.shape[2] == 1:
            PILImage.fromarray(arr[:, :, 0], mode="L").save(in_path)
        else:
            PILImage.fromarray(arr, mode="RGB").save(in_path)
        return _run(_render(template, in_path, out_path), out_path)


def decode_residual_external(payload: bytes, h: int, w: int, channels: int,
                             template: str) -> NormalizedTexture:
    with tempfile.TemporaryDirectory(prefix="sftc-dec-") as tmp:
        in_path = Path(tmp) / "payload.bin"
        out_path = Path(tmp) / "texture.png"
        in_path.write_bytes(payload)
        _run(_render(template, in_path, out_path), out_path)
        try:
            with PILImage.open(out_path) as im:
                im = im.convert("L" if channels == 1 else "RGB")
                arr = np.asarray(im, dtype=np.uint8)
        except Exception as exc:
            raise ExternalCodecError(f"cannot read codec output: {exc}") from exc
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.shape != (h, w, channels):
        raise ExternalCodecError(
            f"codec output shape {arr.shape} does not match stream ({h}, {w}, {channels})"
        )
    return NormalizedTexture(values=arr.astype(np.float32) / 255.0, degenerate=False)
