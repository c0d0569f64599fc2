"""The .sftc layered bitstream: header + base payload + optional enhancement.

Byte layout (little-endian throughout):

    offset size field
    0      4    magic "SFTC"
    4      1    version (= 1)
    5      1    flags (bit0 = has_enhancement, other bits reserved zero)
    6      2    width u16
    8      2    height u16
    10     1    channels u8 (1 or 3)
    11     2    feat_dim u16
    13     1    quant_bits u8 (2..16)
    14     4    base_len u32
    18     base_len   entropy-coded base payload
    then, iff bit0 is set, a 13-byte enhancement header:
    +0     1    codec_id u8 (0 = internal block coder, 1 = external)
    +1     4    quality f32 (internal coder step; informational for external)
    +5     4    x_min f32
    +9     4    x_max f32
    +13    ...  enhancement payload (runs to end of stream)

The enhancement payload length is framed by the container length itself,
so a full stream is 18 + base_len + 13 + enh_len bytes. Model weights are
shared side information and never travel in the stream.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import blockcodec, external
from .engine import forward
from .errors import (
    CorruptHeaderError,
    InvalidInputError,
    ModeUnavailableError,
    NotAStreamError,
    TruncatedStreamError,
    UnsupportedVersionError,
)
from .feature import (
    MAX_BITS,
    MIN_BITS,
    FeatureVector,
    dequantize_feature,
    quantize_feature,
    QuantizedFeature,
)
from .image import Image
from .nnwf import ReconModel
from .rangecoder import entropy_decode, entropy_encode
from .residual import (
    NormalizedTexture,
    compute_residual,
    denormalize_residual,
    combine,
    normalize_residual,
)

MAGIC = b"SFTC"
VERSION = 1
HEADER_LEN = 18
ENH_HEADER_LEN = 13
FLAG_HAS_ENHANCEMENT = 0x01

CODEC_INTERNAL = 0
CODEC_EXTERNAL = 1


@dataclass
class StreamHeader:
    width: int
    height: int
    channels: int
    feat_dim: int
    quant_bits: int
    base_len: int
    has_enhancement: bool = False
    version: int = VERSION

    def validate(self):
        if self.version != VERSION:
            raise InvalidInputError(f"unsupported stream version {self.version}")
        if not 1 <= self.width <= 0xFFFF or not 1 <= self.height <= 0xFFFF:
            raise InvalidInputError("width/height must be in [1, 65535]")
        if self.channels not in (1, 3):
            raise InvalidInputError("channels must be 1 or 3")
        if not 1 <= self.feat_dim <= 0xFFFF:
            raise InvalidInputError("feat_dim must be in [1, 65535]")
        if not MIN_BITS <= self.quant_bits <= MAX_BITS:
            raise InvalidInputError(f"quant_bits must be in [{MIN_BITS}, {MAX_BITS}]")
        if not 0 <= self.base_len <= 0xFFFFFFFF:
            raise InvalidInputError("base_len out of u32 range")


@dataclass
class EnhancementBlock:
    codec_id: int
    quality: float
    x_min: float
    x_max: float
    payload: bytes

    @property
    def enh_len(self) -> int:
        return len(self.payload)

    def validate(self):
        if self.codec_id not in (CODEC_INTERNAL, CODEC_EXTERNAL):
            raise InvalidInputError(f"unknown codec_id {self.codec_id}")
        if self.x_min > self.x_max:
            raise InvalidInputError("x_min > x_max")


@dataclass
class ScalableStream:
    header: StreamHeader
    base_payload: bytes
    enhancement: Optional[EnhancementBlock] = field(default=None)

    def total_len(self) -> int:
        n = HEADER_LEN + len(self.base_payload)
        if self.enhancement is not None:
            n += ENH_HEADER_LEN + self.enhancement.enh_len
        return n


def write_stream(s: ScalableStream) -> bytes:
    """Serialize; read_stream(write_stream(s)) reproduces s exactly."""
    s.header.validate()
    if s.header.base_len != len(s.base_payload):
        raise InvalidInputError(
            f"header base_len {s.header.base_len} != payload {len(s.base_payload)}"
        )
    if s.header.has_enhancement != (s.enhancement is not None):
        raise InvalidInputError("has_enhancement flag does not match the block")
    flags = FLAG_HAS_ENHANCEMENT if s.header.has_enhancement else 0
    out = bytearray()
    out += MAGIC
    out += struct.pack(
        "<BBHHBHBI",
        s.header.version,
        flags,
        s.header.width,
        s.header.height,
        s.header.channels,
        s.header.feat_dim,
        s.header.quant_bits,
        s.header.base_len,
    )
    out += s.base_payload
    if s.enhancement is not None:
        s.enhancement.validate()
        out += struct.pack(
            "<Bfff",
            s.enhancement.codec_id,
            s.enhancement.quality,
            s.enhancement.x_min,
            s.enhancement.x_max,
        )
        out += s.enhancement.payload
    return bytes(out)


def read_stream(data: bytes) -> ScalableStream:
    """Parse and validate .sftc bytes."""
    if len(data) < 4 or data[:4] != MAGIC:
        raise NotAStreamError("not an SFTC stream (bad magic)")
    if len(data) < HEADER_LEN:
        raise TruncatedStreamError(f"stream header needs {HEADER_LEN} bytes")
    version, flags, width, height, channels, feat_dim, quant_bits, base_len = (
        struct.unpack_from("<BBHHBHBI", data, 4)
    )
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported stream version {version}")
    if flags & ~FLAG_HAS_ENHANCEMENT:
        raise CorruptHeaderError(f"reserved flag bits set: {flags:#04x}")
    if channels not in (1, 3):
        raise CorruptHeaderError(f"channels must be 1 or 3, got {channels}")
    if width < 1 or height < 1 or feat_dim < 1:
        raise CorruptHeaderError("width, height and feat_dim must be >= 1")
    if not MIN_BITS <= quant_bits <= MAX_BITS:
        raise CorruptHeaderError(f"quant_bits {quant_bits} outside [2, 16]")
    has_enh = bool(flags & FLAG_HAS_ENHANCEMENT)
    if len(data) < HEADER_LEN + base_len:
        raise TruncatedStreamError(
            f"base payload needs {base_len} bytes, {len(data) - HEADER_LEN} present"
        )
    base_payload = data[HEADER_LEN : HEADER_LEN + base_len]
    header = StreamHeader(
        width=width,
        height=height,
        channels=channels,
        feat_dim=feat_dim,
        quant_bits=quant_bits,
        base_len=base_len,
        has_enhancement=has_enh,
        version=version,
    )
    enhancement = None
    pos = HEADER_LEN + base_len
    if has_enh:
        if len(data) < pos + ENH_HEADER_LEN:
            raise TruncatedStreamError("enhancement header missing or truncated")
        codec_id, quality, x_min, x_max = struct.unpack_from("<Bfff", data, pos)
        if codec_id not in (CODEC_INTERNAL, CODEC_EXTERNAL):
            raise UnsupportedVersionError(f"unknown enhancement codec id {codec_id}")
        if not (x_min <= x_max):
            raise CorruptHeaderError(f"x_min {x_min} > x_max {x_max}")
        enhancement = EnhancementBlock(
            codec_id=codec_id,
            quality=quality,
            x_min=x_min,
            x_max=x_max,
            payload=data[pos + ENH_HEADER_LEN :],
        )
    elif len(data) != pos:
        raise TruncatedStreamError(
            f"{len(data) - pos} trailing bytes after a base-only stream"
        )
    return ScalableStream(header=header, base_payload=base_payload,
                          enhancement=enhancement)


def extract_base(data: bytes) -> bytes:
    """Strip the enhancement layer; idempotent on base-only streams."""
    s = read_stream(data)
    s.header.has_enhancement = False
    s.enhancement = None
    return write_stream(s)


def encode_stream(
    image: Optional[Image],
    feature: FeatureVector,
    bits: int = 8,
    model: Optional[ReconModel] = None,
    quality_step: float = 0.02,
    codec_id: int = CODEC_INTERNAL,
    external_cmd: Optional[str] = None,
    size: Optional[tuple[int, int, int]] = None,
) -> ScalableStream:
    """Build a stream: base layer always, enhancement when image+model given.

    The residual is formed against the reconstruction from the *quantized*
    feature, which is exactly what the decoder will regenerate.
    """
    # the header stores quality as f32; quantize with that exact value so
    # encoder and decoder share one step
    quality_step = float(np.float32(quality_step))
    q = quantize_feature(feature, bits)
    base_payload = entropy_encode(q.symbols, 1 << bits)
    if image is not None:
        h, w, c = image.shape
    elif size is not None:
        h, w, c = size
    elif model is not None:
        h, w, c = model.output_shape
    else:
        raise InvalidInputError("need an image, a model or an explicit size")
    header = StreamHeader(
        width=w,
        height=h,
        channels=c,
        feat_dim=len(feature),
        quant_bits=bits,
        base_len=len(base_payload),
        has_enhancement=False,
    )
    stream = ScalableStream(header=header, base_payload=base_payload)
    if image is None or model is None:
        return stream
    if model.output_shape != image.shape:
        raise InvalidInputError(
            f"model renders {model.output_shape}, image is {image.shape}"
        )
    x_fea = forward(model, dequantize_feature(q))
    residual = compute_residual(image, x_fea)
    texture = normalize_residual(residual)
    if codec_id == CODEC_INTERNAL:
        payload = blockcodec.encode_residual_internal(texture, quality_step)
    elif codec_id == CODEC_EXTERNAL:
        if not external_cmd:
            raise InvalidInputError("external codec requires a command template")
        payload = external.encode_residual_external(texture, external_cmd)
    else:
        raise InvalidInputError(f"unknown codec_id {codec_id}")
    header.has_enhancement = True
    stream.enhancement = EnhancementBlock(
        codec_id=codec_id,
        quality=float(quality_step),
        x_min=residual.x_min,
        x_max=residual.x_max,
        payload=payload,
    )
    return stream


def decode_base_only(data: bytes) -> FeatureVector:
    """Recover the dequantized feature without touching any image path."""
    s = read_stream(data)
    symbols = entropy_decode(
        s.base_payload, s.header.feat_dim, 1 << s.header.quant_bits
    )
    return dequantize_feature(QuantizedFeature(symbols=symbols, bits=s.header.quant_bits))


def decode_coarse(data: bytes, model: ReconModel) -> Image:
    """Feature-only reconstruction."""
    s = read_stream(data)
    if model.input_dim != s.header.feat_dim:
        raise InvalidInputError(
            f"model expects {model.input_dim}-d features, stream has {s.header.feat_dim}"
        )
    if model.output_shape != (s.header.height, s.header.width, s.header.channels):
        raise InvalidInputError(
            f"model renders {model.output_shape}, stream declares "
            f"({s.header.height}, {s.header.width}, {s.header.channels})"
        )
    return forward(model, decode_base_only(data))


def decode_full(data: bytes, model: ReconModel,
                external_cmd: Optional[str] = None) -> Image:
    """Coarse reconstruction plus the decoded enhancement residual."""
    s = read_stream(data)
    if s.enhancement is None:
        raise ModeUnavailableError("stream carries no enhancement layer")
    x_fea = decode_coarse(data, model)
    h, w, c = s.header.height, s.header.width, s.header.channels
    enh = s.enhancement
    if enh.codec_id == CODEC_INTERNAL:
        texture = blockcodec.decode_residual_internal(
            enh.payload, h, w, c, enh.quality
        )
    else:
        if not external_cmd:
            raise InvalidInputError(
                "stream uses an external codec; a decode command template is required"
            )
        texture = external.decode_residual_external(enh.payload, h, w, c, external_cmd)
    if enh.x_min == enh.x_max:
        texture = NormalizedTexture(values=np.zeros((h, w, c), dtype=np.float32),
                                    degenerate=True)
    residual = denormalize_residual(texture, enh.x_min, enh.x_max)
    return combine(x_fea, residual)
