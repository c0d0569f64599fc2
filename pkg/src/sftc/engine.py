"""Execute a ReconModel: feature vector in, coarse image out.

Inference only. Batch-norm layers are folded to per-channel scale/shift,
accumulation is float32 with a fixed kernel-tap order, and the final Tanh
output t is mapped to the pixel domain via (t + 1) / 2.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError
from .feature import FeatureVector
from .image import Image
from .nnwf import (
    BatchNorm,
    FullyConnected,
    ReconModel,
    Relu,
    Reshape,
    Tanh,
    TransposedConv,
    transposed_conv_output_size,
)


def transposed_conv(x: np.ndarray, layer: TransposedConv) -> np.ndarray:
    """Scatter-accumulate a transposed convolution.

    x is (h, w, in_ch); the result is (h', w', out_ch) with
    h' = (h-1)*stride - 2*pad + kernel_h + output_pad. Each input position
    (u, v) scatters through kernel tap (ky, kx) onto output position
    (u*stride - pad + ky, v*stride - pad + kx); taps falling outside the
    output are clipped.
    """
    x = np.asarray(x, dtype=np.float32)
    if x.ndim != 3 or x.shape[2] != layer.in_ch:
        raise InvalidInputError(
            f"deconv input must be (h, w, {layer.in_ch}), got {x.shape}"
        )
    h, w = x.shape[:2]
    s, p = layer.stride, layer.pad
    oh = transposed_conv_output_size(h, layer.kernel_h, s, p, layer.output_pad)
    ow = transposed_conv_output_size(w, layer.kernel_w, s, p, layer.output_pad)
    if oh < 1 or ow < 1:
        raise InvalidInputError(f"non-positive deconv output {oh}x{ow}")
    out = np.empty((oh, ow, layer.out_ch), dtype=np.float32)
    out[:] = layer.bias.astype(np.float32)
    weights = layer.weights.astype(np.float32)
    for ky in range(layer.kernel_h):
        # valid input rows u: 0 <= u*s - p + ky <= oh-1
        u0 = max(0, -(-(p - ky) // s))  # ceil((p-ky)/s)
        u1 = min(h - 1, (oh - 1 + p - ky) // s)
        if u0 > u1:
            continue
        y0 = u0 * s - p + ky
        for kx in range(layer.kernel_w):
            v0 = max(0, -(-(p - kx) // s))
            v1 = min(w - 1, (ow - 1 + p - kx) // s)
            if v0 > v1:
                continue
            x0 = v0 * s - p + kx
            contrib = np.tensordot(
                x[u0 : u1 + 1, v0 : v1 + 1, :], weights[:, :, ky, kx], axes=([2], [0])
            )
            out[y0 : y0 + (u1 - u0) * s + 1 : s, x0 : x0 + (v1 - v0) * s + 1 : s] += (
                contrib
            )
    return out


def forward(model: ReconModel, v: FeatureVector) -> Image:
    """Run the layer list on a feature vector and map Tanh output to [0, 1]."""
    if len(v) != model.input_dim:
        raise InvalidInputError(
            f"feature has {len(v)} dims, model expects {model.input_dim}"
        )
    x = v.values.astype(np.float32)
    for layer in model.layers:
        if isinstance(layer, FullyConnected):
            x = layer.weights.astype(np.float32) @ x + layer.bias.astype(np.float32)
        elif isinstance(layer, Reshape):
            x = x.reshape(layer.h, layer.w, layer.c)
        elif isinstance(layer, TransposedConv):
            x = transposed_conv(x, layer)
        elif isinstance(layer, BatchNorm):
            x = x * layer.scale + layer.shift
        elif isinstance(layer, Relu):
            x = np.maximum(x, np.float32(0.0))
        elif isinstance(layer, Tanh):
            x = np.tanh(x)
    return Image(pixels=(x + np.float32(1.0)) * np.float32(0.5))
