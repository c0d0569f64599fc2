"""sftc: scalable feature+texture codec for facial images.

The base layer carries a quantized, entropy-coded deep feature that serves
analysis directly; a stored deconvolutional network turns it back into a
coarse image; the enhancement layer codes the residual for high fidelity.
"""

from .container import (
    ScalableStream,
    StreamHeader,
    EnhancementBlock,
    decode_base_only,
    decode_coarse,
    decode_full,
    encode_stream,
    extract_base,
    read_stream,
    write_stream,
)
from .engine import forward, transposed_conv
from .feature import (
    FeatureVector,
    QuantizedFeature,
    dequantize_feature,
    quantize_feature,
    step_size,
)
from .image import Image, load_image, save_image
from .nnwf import ReconModel, build_model, load_model, write_model
from .rangecoder import entropy_decode, entropy_encode
from .residual import (
    NormalizedTexture,
    ResidualPlane,
    combine,
    compute_residual,
    denormalize_residual,
    normalize_residual,
)

__version__ = "0.1.0"
