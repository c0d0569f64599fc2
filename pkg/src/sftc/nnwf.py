"""NNWF portable weight files and the layer-list network model.

The network architecture is data, not code: the file declares an ordered
layer list and the engine executes whatever it declares, so tiny test
fixtures and trained exports share one loader.

Byte layout (all little-endian, float32 blobs in declared order):

    magic "NNWF" (4) | version u8 = 1 | layer_count u16
    then per layer: kind u8 | kind-specific header | blobs

    kind 0 FULLY_CONNECTED  header: in u32, out u32
                            blobs:  weights [out][in], bias [out]
    kind 1 RESHAPE          header: h u16, w u16, c u16
    kind 2 TRANSPOSED_CONV  header: kernel_h, kernel_w, in_ch, out_ch,
                                    stride, pad, output_pad (each u16)
                            blobs:  weights [in_ch][out_ch][kh][kw],
                                    bias [out_ch]
    kind 3 BATCH_NORM       header: epsilon f32
                            blobs:  gamma, beta, mean, var (channel count
                                    comes from the shape chain)
    kind 4 RELU             no header, no blobs
    kind 5 TANH             no header, no blobs

The first layer must be FULLY_CONNECTED (it defines the model's input
dimension), shapes must chain, and the last layer must be TANH producing
an (H, W, C) tensor with C in {1, 3}. See docs/FORMATS.md for a
hex-annotated example.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    MalformedModelError,
    NotAModelError,
    TruncatedFileError,
    UnsupportedVersionError,
)

MAGIC = b"NNWF"
VERSION = 1

KIND_FULLY_CONNECTED = 0
KIND_RESHAPE = 1
KIND_TRANSPOSED_CONV = 2
KIND_BATCH_NORM = 3
KIND_RELU = 4
KIND_TANH = 5


@dataclass
class FullyConnected:
    weights: np.ndarray  # (out, in) float32
    bias: np.ndarray  # (out,) float32
    kind: int = field(default=KIND_FULLY_CONNECTED, init=False)


@dataclass
class Reshape:
    h: int
    w: int
    c: int
    kind: int = field(default=KIND_RESHAPE, init=False)


@dataclass
class TransposedConv:
    kernel_h: int
    kernel_w: int
    in_ch: int
    out_ch: int
    stride: int
    pad: int
    output_pad: int
    weights: np.ndarray  # (in_ch, out_ch, kh, kw) float32
    bias: np.ndarray  # (out_ch,) float32
    kind: int = field(default=KIND_TRANSPOSED_CONV, init=False)


@dataclass
class BatchNorm:
    gamma: np.ndarray
    beta: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    epsilon: float
    kind: int = field(default=KIND_BATCH_NORM, init=False)
    # folded once at construction; forward applies y = scale*x + shift
    scale: np.ndarray = field(init=False, repr=False)
    shift: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.scale, self.shift = fold_batchnorm(
            self.gamma, self.beta, self.mean, self.var, self.epsilon
        )


@dataclass
class Relu:
    kind: int = field(default=KIND_RELU, init=False)


@dataclass
class Tanh:
    kind: int = field(default=KIND_TANH, init=False)


@dataclass
class ReconModel:
    layers: list
    input_dim: int
    output_shape: tuple[int, int, int]


def fold_batchnorm(gamma, beta, mean, var, epsilon) -> tuple[np.ndarray, np.ndarray]:
    """Collapse batch-norm inference into per-channel scale and shift."""
    gamma = np.asarray(gamma, dtype=np.float32)
    beta = np.asarray(beta, dtype=np.float32)
    mean = np.asarray(mean, dtype=np.float32)
    var = np.asarray(var, dtype=np.float32)
    denom = var.astype(np.float64) + float(epsilon)
    if np.any(denom <= 0):
        raise MalformedModelError("batch-norm channel with var + epsilon <= 0")
    scale = (gamma.astype(np.float64) / np.sqrt(denom)).astype(np.float32)
    shift = (beta.astype(np.float64) - mean.astype(np.float64) * scale).astype(
        np.float32
    )
    return scale, shift


def transposed_conv_output_size(size: int, kernel: int, stride: int, pad: int,
                                output_pad: int) -> int:
    return (size - 1) * stride - 2 * pad + kernel + output_pad


def chain_shapes(layers) -> tuple[int, tuple[int, int, int]]:
    """Validate that layer shapes chain; return (input_dim, output_shape)."""
    if not layers:
        raise MalformedModelError("model has no layers")
    first = layers[0]
    if not isinstance(first, FullyConnected):
        raise MalformedModelError("first layer must be FULLY_CONNECTED")
    input_dim = int(first.weights.shape[1])
    shape: tuple = (input_dim,)
    for idx, layer in enumerate(layers):
        if isinstance(layer, FullyConnected):
            if len(shape) != 1:
                raise MalformedModelError(f"layer {idx}: FC needs a vector input")
            out, inp = layer.weights.shape
            if inp != shape[0]:
                raise MalformedModelError(
                    f"layer {idx}: FC expects {inp} inputs, chain has {shape[0]}"
                )
            if layer.bias.shape != (out,):
                raise MalformedModelError(f"layer {idx}: FC bias shape mismatch")
            shape = (out,)
        elif isinstance(layer, Reshape):
            size = int(np.prod(shape))
            target = layer.h * layer.w * layer.c
            if layer.h < 1 or layer.w < 1 or layer.c < 1:
                raise MalformedModelError(f"layer {idx}: reshape dims must be >= 1")
            if size != target:
                raise MalformedModelError(
                    f"layer {idx}: reshape {shape} -> ({layer.h},{layer.w},{layer.c})"
                    f" changes element count {size} != {target}"
                )
            shape = (layer.h, layer.w, layer.c)
        elif isinstance(layer, TransposedConv):
            if len(shape) != 3:
                raise MalformedModelError(f"layer {idx}: deconv needs a tensor input")
            h, w, c = shape
            if c != layer.in_ch:
                raise MalformedModelError(
                    f"layer {idx}: deconv expects {layer.in_ch} channels, chain has {c}"
                )
            if layer.kernel_h < 1 or layer.kernel_w < 1 or layer.stride < 1:
                raise MalformedModelError(f"layer {idx}: bad deconv hyperparameters")
            if layer.weights.shape != (
                layer.in_ch,
                layer.out_ch,
                layer.kernel_h,
                layer.kernel_w,
            ):
                raise MalformedModelError(f"layer {idx}: deconv weight shape mismatch")
            if layer.bias.shape != (layer.out_ch,):
                raise MalformedModelError(f"layer {idx}: deconv bias shape mismatch")
            oh = transposed_conv_output_size(
                h, layer.kernel_h, layer.stride, layer.pad, layer.output_pad
            )
            ow = transposed_conv_output_size(
                w, layer.kernel_w, layer.stride, layer.pad, layer.output_pad
            )
            if oh < 1 or ow < 1:
                raise MalformedModelError(
                    f"layer {idx}: non-positive deconv output {oh}x{ow}"
                )
            shape = (oh, ow, layer.out_ch)
        elif isinstance(layer, BatchNorm):
            if len(shape) != 3:
                raise MalformedModelError(
                    f"layer {idx}: batch-norm needs a tensor input"
                )
            c = shape[2]
            for name, arr in (
                ("gamma", layer.gamma),
                ("beta", layer.beta),
                ("mean", layer.mean),
                ("var", layer.var),
            ):
                if arr.shape != (c,):
                    raise MalformedModelError(
                        f"layer {idx}: batch-norm {name} has {arr.shape[0]} channels,"
                        f" chain has {c}"
                    )
        elif isinstance(layer, (Relu, Tanh)):
            pass
        else:
            raise MalformedModelError(f"layer {idx}: unknown layer object {layer!r}")
    if not isinstance(layers[-1], Tanh):
        raise MalformedModelError("last layer must be TANH")
    if len(shape) != 3 or shape[2] not in (1, 3):
        raise MalformedModelError(
            f"model output must be (H, W, 1|3) tensor, got {shape}"
        )
    return input_dim, shape


def build_model(layers) -> ReconModel:
    """Validate a layer list and wrap it as a ReconModel."""
    for layer in layers:
        for arr in _blobs(layer):
            if not np.all(np.isfinite(arr)):
                raise MalformedModelError("model blob contains NaN/Inf")
    input_dim, output_shape = chain_shapes(layers)
    return ReconModel(layers=list(layers), input_dim=input_dim,
                      output_shape=output_shape)


def _blobs(layer):
    if isinstance(layer, FullyConnected):
        return [layer.weights, layer.bias]
    if isinstance(layer, TransposedConv):
        return [layer.weights, layer.bias]
    if isinstance(layer, BatchNorm):
        return [layer.gamma, layer.beta, layer.mean, layer.var]
    return []


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise TruncatedFileError(
                f"weight file ends at byte {len(self.data)}, need {self.pos + size}"
            )
        vals = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return vals

    def blob(self, count: int) -> np.ndarray:
        size = 4 * count
        if self.pos + size > len(self.data):
            raise TruncatedFileError(
                f"weight blob ends at byte {len(self.data)}, need {self.pos + size}"
            )
        arr = np.frombuffer(self.data, dtype="<f4", count=count, offset=self.pos)
        self.pos += size
        return arr.copy()


def load_model(data: bytes) -> ReconModel:
    """Parse and validate an NNWF byte string."""
    if len(data) < 4 or data[:4] != MAGIC:
        raise NotAModelError("not an NNWF weight file (bad magic)")
    r = _Reader(data)
    r.pos = 4
    (version,) = r.take("<B")
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported NNWF version {version}")
    (layer_count,) = r.take("<H")
    layers = []
    shape: tuple = ()
    for idx in range(layer_count):
        (kind,) = r.take("<B")
        if kind == KIND_FULLY_CONNECTED:
            inp, out = r.take("<II")
            if inp < 1 or out < 1:
                raise MalformedModelError(f"layer {idx}: FC dims must be >= 1")
            weights = r.blob(out * inp).reshape(out, inp)
            bias = r.blob(out)
            layers.append(FullyConnected(weights=weights, bias=bias))
            shape = (out,)
        elif kind == KIND_RESHAPE:
            h, w, c = r.take("<HHH")
            layers.append(Reshape(h=h, w=w, c=c))
            shape = (h, w, c)
        elif kind == KIND_TRANSPOSED_CONV:
            kh, kw, in_ch, out_ch, stride, pad, output_pad = r.take("<HHHHHHH")
            if in_ch < 1 or out_ch < 1:
                raise MalformedModelError(f"layer {idx}: deconv channels must be >= 1")
            weights = r.blob(in_ch * out_ch * kh * kw).reshape(in_ch, out_ch, kh, kw)
            bias = r.blob(out_ch)
            layers.append(
                TransposedConv(
                    kernel_h=kh,
                    kernel_w=kw,
                    in_ch=in_ch,
                    out_ch=out_ch,
                    stride=stride,
                    pad=pad,
                    output_pad=output_pad,
                    weights=weights,
                    bias=bias,
                )
            )
        elif kind == KIND_BATCH_NORM:
            (epsilon,) = r.take("<f")
            # channel count comes from the running shape chain
            if len(shape) != 3:
                raise MalformedModelError(
                    f"layer {idx}: batch-norm needs a tensor input"
                )
            c = shape[2]
            gamma, beta, mean, var = (r.blob(c) for _ in range(4))
            layers.append(
                BatchNorm(gamma=gamma, beta=beta, mean=mean, var=var, epsilon=epsilon)
            )
        elif kind == KIND_RELU:
            layers.append(Relu())
        elif kind == KIND_TANH:
            layers.append(Tanh())
        else:
            raise MalformedModelError(f"layer {idx}: unknown layer kind {kind}")
        if isinstance(layers[-1], TransposedConv):
            lyr = layers[-1]
            if len(shape) != 3:
                raise MalformedModelError(f"layer {idx}: deconv needs a tensor input")
            shape = (
                transposed_conv_output_size(
                    shape[0], lyr.kernel_h, lyr.stride, lyr.pad, lyr.output_pad
                ),
                transposed_conv_output_size(
                    shape[1], lyr.kernel_w, lyr.stride, lyr.pad, lyr.output_pad
                ),
                lyr.out_ch,
            )
    if r.pos != len(data):
        raise MalformedModelError(
            f"{len(data) - r.pos} trailing bytes after the declared layers"
        )
    return build_model(layers)


def write_model(model: ReconModel) -> bytes:
    """Serialize a validated model back to NNWF bytes."""
    out = bytearray()
    out += MAGIC
    out += struct.pack("<BH", VERSION, len(model.layers))
    for layer in model.layers:
        out += struct.pack("<B", layer.kind)
        if isinstance(layer, FullyConnected):
            o, i = layer.weights.shape
            out += struct.pack("<II", i, o)
            out += layer.weights.astype("<f4").tobytes()
            out += layer.bias.astype("<f4").tobytes()
        elif isinstance(layer, Reshape):
            out += struct.pack("<HHH", layer.h, layer.w, layer.c)
        elif isinstance(layer, TransposedConv):
            out += struct.pack(
                "<HHHHHHH",
                layer.kernel_h,
                layer.kernel_w,
                layer.in_ch,
                layer.out_ch,
                layer.stride,
                layer.pad,
                layer.output_pad,
            )
            out += layer.weights.astype("<f4").tobytes()
            out += layer.bias.astype("<f4").tobytes()
        elif isinstance(layer, BatchNorm):
            out += struct.pack("<f", layer.epsilon)
            for arr in (layer.gamma, layer.beta, layer.mean, layer.var):
                out += arr.astype("<f4").tobytes()
    return bytes(out)


def load_model_file(path) -> ReconModel:
    with open(path, "rb") as f:
        return load_model(f.read())


def save_model_file(model: ReconModel, path):
    with open(path, "wb") as f:
        f.write(write_model(model))
