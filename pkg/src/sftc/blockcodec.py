"""Internal residual coder: 8x8 block DCT + flat quantization + range coding.

Dependency-free stand-in for a learned residual codec. Per channel the
texture is shifted by -0.5, edge-padded to multiples of 8, transformed with
the orthonormal 8x8 DCT-II, quantized with a single step, zigzag-scanned
and entropy-coded (fresh adaptive model per stream, alphabet 2047).

Symbol order on the wire: channels in index order, blocks row-major within
a channel, coefficients in zigzag order within a block.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError
from .rangecoder import entropy_decode, entropy_encode
from .residual import NormalizedTexture

BLOCK = 8
CLAMP = 1023  # quantized coefficients clamp to [-1023, 1023]
ALPHABET = 2 * CLAMP + 1


def _dct_matrix() -> np.ndarray:
    k = np.arange(BLOCK)
    basis = np.cos((2 * k[None, :] + 1) * k[:, None] * np.pi / (2 * BLOCK))
    basis *= np.sqrt(2.0 / BLOCK)
    basis[0, :] = np.sqrt(1.0 / BLOCK)
    return basis


_DCT = _dct_matrix()


def _zigzag_order() -> np.ndarray:
    def key(i):
        y, x = divmod(i, BLOCK)
        d = y + x
        return (d, x if d % 2 else y)

    return np.array(sorted(range(BLOCK * BLOCK), key=key), dtype=np.int64)


_ZIGZAG = _zigzag_order()
_UNZIGZAG = np.argsort(_ZIGZAG)


def _padded(size: int) -> int:
    return -(-size // BLOCK) * BLOCK


def _blockify(plane: np.ndarray) -> np.ndarray:
    """(H, W) -> (n_blocks_y, n_blocks_x, 8, 8), edge-padded."""
    h, w = plane.shape
    ph, pw = _padded(h), _padded(w)
    plane = np.pad(plane, ((0, ph - h), (0, pw - w)), mode="edge")
    return plane.reshape(ph // BLOCK, BLOCK, pw // BLOCK, BLOCK).transpose(0, 2, 1, 3)


def _unblockify(blocks: np.ndarray, h: int, w: int) -> np.ndarray:
    by, bx = blocks.shape[:2]
    plane = blocks.transpose(0, 2, 1, 3).reshape(by * BLOCK, bx * BLOCK)
    return plane[:h, :w]


def texture_to_symbols(values: np.ndarray, quality_step: float) -> np.ndarray:
    """Transform + quantize a texture into entropy-coder symbols."""
    symbols = []
    for c in range(values.shape[2]):
        blocks = _blockify(values[:, :, c].astype(np.float64) - 0.5)
        coefs = np.einsum("ua,ijab,vb->ijuv", _DCT, blocks, _DCT, optimize=True)
        scaled = coefs / quality_step
        quant = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
        quant = np.clip(quant, -CLAMP, CLAMP).astype(np.int64)
        symbols.append(quant.reshape(-1, BLOCK * BLOCK)[:, _ZIGZAG].ravel() + CLAMP)
    return np.concatenate(symbols) if symbols else np.empty(0, dtype=np.int64)


def symbols_to_texture(symbols: np.ndarray, h: int, w: int, channels: int,
                       quality_step: float) -> np.ndarray:
    """Inverse of :func:`texture_to_symbols`; returns (h, w, channels) in [0, 1]."""
    ph, pw = _padded(h), _padded(w)
    by, bx = ph // BLOCK, pw // BLOCK
    per_channel = by * bx * BLOCK * BLOCK
    out = np.empty((h, w, channels), dtype=np.float32)
    for c in range(channels):
        chunk = symbols[c * per_channel : (c + 1) * per_channel] - CLAMP
        coefs = (
            chunk.reshape(-1, BLOCK * BLOCK)[:, _UNZIGZAG].reshape(by, bx, BLOCK, BLOCK)
            * quality_step
        )
        blocks = np.einsum("au,ijab,bv->ijuv", _DCT, coefs, _DCT, optimize=True)
        out[:, :, c] = _unblockify(blocks, h, w) + 0.5
    return np.clip(out, 0.0, 1.0)


def encode_residual_internal(t: NormalizedTexture, quality_step: float) -> bytes:
    """Code a normalized texture; payload is entropy-coded bytes only."""
    if not quality_step > 0:
        raise InvalidInputError(f"quality_step must be > 0, got {quality_step}")
    symbols = texture_to_symbols(t.values, quality_step)
    return entropy_encode(symbols, ALPHABET)


def decode_residual_internal(payload: bytes, h: int, w: int, channels: int,
                             quality_step: float) -> NormalizedTexture:
    """Decode a payload back to an (h, w, channels) texture."""
    if not quality_step > 0:
        raise InvalidInputError(f"quality_step must be > 0, got {quality_step}")
    if h < 1 or w < 1 or channels < 1:
        raise InvalidInputError("texture dims must be >= 1")
    count = _padded(h) // BLOCK * (_padded(w) // BLOCK) * BLOCK * BLOCK * channels
    symbols = entropy_decode(payload, count, ALPHABET)
    values = symbols_to_texture(symbols, h, w, channels, quality_step)
    return NormalizedTexture(values=values, degenerate=False)
