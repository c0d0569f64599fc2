#!/usr/bin/env python3
"""Regenerate the deterministic test assets under tests/assets/.

Produces a small reconstruction model (NNWF), ten 64x64 RGB fixture
images and ten matching 128-d FVEC feature files. Everything is seeded,
so reruns are byte-identical; assets are checked in and this script only
exists to document and refresh them.
"""

import argparse
from pathlib import Path

import numpy as np

from sftc.feature import FeatureVector
from sftc.fvec import save_fvec
from sftc.image import Image, save_image
from sftc.nnwf import (
    BatchNorm,
    FullyConnected,
    Relu,
    Reshape,
    Tanh,
    TransposedConv,
    build_model,
    save_model_file,
)

FEAT_DIM = 128
IMAGE_SIZE = 64
N_FIXTURES = 10


def fixture_model(rng: np.random.Generator):
    """128-d feature -> 64x64x3 image: FC, reshape, then a deconv stack."""
    channels = (32, 16, 8, 8, 3)
    base = IMAGE_SIZE // (2 ** (len(channels) - 1))
    layers = [
        FullyConnected(
            weights=(rng.standard_normal((base * base * channels[0], FEAT_DIM)) * 0.12)
            .astype(np.float32),
            bias=(rng.standard_normal(base * base * channels[0]) * 0.01).astype(
                np.float32
            ),
        ),
        Reshape(base, base, channels[0]),
    ]
    for i in range(1, len(channels)):
        in_ch, out_ch = channels[i - 1], channels[i]
        layers.append(
            BatchNorm(
                gamma=np.ones(in_ch, np.float32),
                beta=np.zeros(in_ch, np.float32),
                mean=np.zeros(in_ch, np.float32),
                var=np.ones(in_ch, np.float32),
                epsilon=1e-5,
            )
        )
        layers.append(Relu())
        fan_in = in_ch * 16
        layers.append(
            TransposedConv(
                kernel_h=4,
                kernel_w=4,
                in_ch=in_ch,
                out_ch=out_ch,
                stride=2,
                pad=1,
                output_pad=0,
                weights=(
                    rng.standard_normal((in_ch, out_ch, 4, 4)) * np.sqrt(2.0 / fan_in)
                ).astype(np.float32),
                bias=np.zeros(out_ch, np.float32),
            )
        )
    layers.append(Tanh())
    return build_model(layers)


def fixture_image(rng: np.random.Generator) -> Image:
    """Smooth synthetic content: gradients, sinusoids and soft blobs."""
    yy, xx = np.mgrid[0:IMAGE_SIZE, 0:IMAGE_SIZE] / (IMAGE_SIZE - 1)
    px = np.zeros((IMAGE_SIZE, IMAGE_SIZE, 3), np.float64)
    for c in range(3):
        fy, fx = rng.uniform(2, 9, size=2)
        phase = rng.uniform(0, 2 * np.pi)
        px[:, :, c] = (
            0.5
            + 0.25 * np.sin(fy * yy + phase) * np.cos(fx * xx)
            + rng.uniform(-0.3, 0.3) * (yy - 0.5)
            + rng.uniform(-0.3, 0.3) * (xx - 0.5)
        )
    for _ in range(4):
        cy, cx = rng.uniform(0.1, 0.9, size=2)
        sigma = rng.uniform(0.05, 0.25)
        amp = rng.uniform(-0.35, 0.35)
        blob = amp * np.exp(-(((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * sigma**2)))
        px += blob[:, :, None] * rng.uniform(0.3, 1.0, size=3)
    arr = np.floor(np.clip(px, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    return Image.from_uint8(arr)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default=Path(__file__).resolve().parent.parent / "tests" / "assets",
        type=Path,
    )
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(20240117)
    model = fixture_model(rng)
    save_model_file(model, args.out / "fixture_recon.nnwf")
    print(f"fixture_recon.nnwf: {model.input_dim} -> {model.output_shape}")

    for i in range(N_FIXTURES):
        img = fixture_image(rng)
        save_image(img, args.out / f"img_{i:03d}.png")
        feature = FeatureVector(np.clip(rng.normal(0, 0.35, FEAT_DIM), -1, 1))
        save_fvec(feature, args.out / f"feat_{i:03d}.fvec")
    print(f"{N_FIXTURES} images + features written to {args.out}")


if __name__ == "__main__":
    main()
