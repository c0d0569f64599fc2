"""Acceptance gate: one test per release criterion, one PASS line each.

Run with `pytest tests/test_acceptance.py -v -s`. Every tolerance is fixed
here; a red test means the build does not meet its contract.
"""

import time

import numpy as np

from conftest import random_texture
from oracles import scatter_sum_transposed_conv
from sftc import blockcodec
from sftc.container import (
    EnhancementBlock,
    CODEC_EXTERNAL,
    CODEC_INTERNAL,
    ScalableStream,
    StreamHeader,
    decode_base_only,
    decode_coarse,
    decode_full,
    encode_stream,
    extract_base,
    read_stream,
    write_stream,
)
from sftc.engine import transposed_conv
from sftc.feature import (
    FeatureVector,
    dequantize_feature,
    quantize_feature,
    step_size,
)
from sftc.metrics import psnr
from sftc.nnwf import FullyConnected, Reshape, Tanh, TransposedConv, build_model
from sftc.rangecoder import entropy_decode, entropy_encode
from sftc.residual import (
    NormalizedTexture,
    ResidualPlane,
    denormalize_residual,
    normalize_residual,
)

COPY = "cp {IN} {OUT}"


def report(line: str):
    print(f"\n[PASS] {line}")


def test_lossless_layer_roundtrips():
    start = time.time()
    rng = np.random.default_rng(1001)

    # entropy coder: 1e5 symbols spread over alphabet sizes 4..2047
    alphabets = [4, 7, 16, 91, 256, 512, 1024, 2047]
    per_alphabet = 12_500
    total = 0
    for alphabet in alphabets:
        syms = rng.integers(0, alphabet, size=per_alphabet)
        back = entropy_decode(entropy_encode(syms, alphabet), per_alphabet, alphabet)
        assert np.array_equal(back, syms), f"alphabet {alphabet} roundtrip failed"
        total += per_alphabet
    assert total >= 100_000

    # container serialization: 1e3 randomized valid streams
    for i in range(1000):
        base_len = int(rng.integers(0, 300))
        header = StreamHeader(
            width=int(rng.integers(1, 1024)),
            height=int(rng.integers(1, 1024)),
            channels=int(rng.choice([1, 3])),
            feat_dim=int(rng.integers(1, 2048)),
            quant_bits=int(rng.integers(2, 17)),
            base_len=base_len,
        )
        stream = ScalableStream(
            header=header, base_payload=rng.bytes(base_len)
        )
        if rng.random() < 0.5:
            lo, hi = sorted(rng.uniform(-1, 1, 2).tolist())
            header.has_enhancement = True
            stream.enhancement = EnhancementBlock(
                codec_id=int(rng.choice([CODEC_INTERNAL, CODEC_EXTERNAL])),
                quality=float(np.float32(rng.uniform(0.001, 0.5))),
                x_min=lo,
                x_max=hi,
                payload=rng.bytes(int(rng.integers(0, 400))),
            )
        raw = write_stream(stream)
        back = read_stream(raw)
        assert back.header == stream.header, f"stream {i} header mismatch"
        assert back.base_payload == stream.base_payload
        assert write_stream(back) == raw, f"stream {i} byte mismatch"

    elapsed = time.time() - start
    assert elapsed < 60.0, f"roundtrips took {elapsed:.1f}s (budget 60s)"
    report(
        f"lossless roundtrips: {total} symbols over alphabets {alphabets}, "
        f"1000 container streams, 0 failures, {elapsed:.1f}s"
    )


def test_quantizer_error_bound():
    rng = np.random.default_rng(1002)
    vectors = rng.uniform(-1.1, 1.1, size=(10_000, 8))
    worst = {}
    for bits in (2, 4, 8, 12, 16):
        delta = step_size(bits)
        bound = delta / 2 + 1e-9
        worst_b = 0.0
        for chunk in np.array_split(vectors, 20):
            for row in chunk:
                v = FeatureVector(row)
                back = dequantize_feature(quantize_feature(v, bits))
                in_range = np.abs(row) <= 1.0
                err = float(np.max(np.abs(back.values - row)[in_range]))
                assert err <= bound, f"bits={bits}: error {err} > {bound}"
                worst_b = max(worst_b, err)
        worst[bits] = worst_b
    report(
        "quantizer bound: 10000 vectors x bits {2,4,8,12,16}, worst/bound "
        + ", ".join(f"b{b}={worst[b] / (step_size(b) / 2):.3f}" for b in worst)
    )


def test_scalability_exactness():
    rng = np.random.default_rng(1003)
    tiny_model = build_model(
        [
            FullyConnected(
                weights=(rng.standard_normal((48, 32)) * 0.2).astype(np.float32),
                bias=np.zeros(48, np.float32),
            ),
            Reshape(4, 4, 3),
            Tanh(),
        ]
    )
    checked = 0
    for i in range(100):
        bits = int(rng.choice([2, 4, 6, 8, 10, 12, 14, 16]))
        if i % 2 == 0:
            dim = int(rng.integers(8, 257))
            v = FeatureVector(rng.uniform(-1.2, 1.2, dim))
            stream = encode_stream(None, v, bits=bits, size=(4, 4, 1))
        else:
            from sftc.image import Image

            v = FeatureVector(rng.uniform(-1, 1, 32))
            img = Image(pixels=rng.random((4, 4, 3), dtype=np.float32))
            stream = encode_stream(
                img, v, bits=bits, model=tiny_model,
                quality_step=float(rng.choice([0.1, 0.02])),
            )
            assert stream.enhancement is not None
        raw = write_stream(stream)
        direct = decode_base_only(raw)
        via_extract = decode_base_only(extract_base(raw))
        assert np.array_equal(direct.values, via_extract.values), f"fixture {i}"
        assert direct.values.tobytes() == via_extract.values.tobytes()
        checked += 1
    report(f"scalability exactness: {checked} fixtures bit-identical")


def test_transposed_conv_matches_oracle():
    rng = np.random.default_rng(1004)
    worst = 0.0
    for trial in range(500):
        h, w = rng.integers(1, 9, size=2)
        in_ch = int(rng.integers(1, 5))
        out_ch = int(rng.integers(1, 5))
        kh, kw = rng.integers(1, 6, size=2)
        stride = int(rng.integers(1, 4))
        output_pad = int(rng.integers(0, stride))
        oh_nopad = (h - 1) * stride + kh + output_pad
        ow_nopad = (w - 1) * stride + kw + output_pad
        pad = int(rng.integers(0, max(1, (min(oh_nopad, ow_nopad) - 1) // 2 + 1)))
        x = rng.normal(size=(h, w, in_ch)).astype(np.float32)
        weights = rng.normal(size=(in_ch, out_ch, kh, kw)).astype(np.float32)
        bias = rng.normal(size=out_ch).astype(np.float32)
        layer = TransposedConv(
            kernel_h=int(kh), kernel_w=int(kw), in_ch=in_ch, out_ch=out_ch,
            stride=stride, pad=pad, output_pad=output_pad, weights=weights,
            bias=bias,
        )
        got = transposed_conv(x, layer)
        want = scatter_sum_transposed_conv(x, weights, bias, stride, pad, output_pad)
        scale = max(1.0, float(np.max(np.abs(want))))
        rel = float(np.max(np.abs(got - want))) / scale
        assert rel <= 1e-5, f"trial {trial}: relative error {rel}"
        worst = max(worst, rel)
    report(f"transposed-conv oracle: 500 instances, worst relative error {worst:.2e}")


def test_internal_coder_rate_distortion_monotone():
    rng = np.random.default_rng(1005)
    ladder = [0.2, 0.1, 0.05, 0.02, 0.01]  # coarse -> fine
    for idx in range(20):
        channels = 1 if idx % 2 else 3
        t = random_texture(rng, int(rng.integers(16, 41)), int(rng.integers(16, 41)),
                           channels)
        h, w = t.values.shape[:2]
        sizes, mses = [], []
        for q in ladder:
            payload = blockcodec.encode_residual_internal(t, q)
            back = blockcodec.decode_residual_internal(payload, h, w, channels, q)
            sizes.append(len(payload))
            mses.append(float(np.mean((back.values - t.values) ** 2)))
        # ladder walks coarse -> fine: size must not shrink, mse must not grow
        assert all(a <= b for a, b in zip(sizes, sizes[1:])), (
            f"texture {idx}: sizes not monotone {sizes}"
        )
        assert all(a >= b for a, b in zip(mses, mses[1:])), (
            f"texture {idx}: mse not monotone {mses}"
        )
    report("internal coder rate/distortion monotone on 20 textures x 5-step ladder")


def test_end_to_end_enhancement_gain(fixture_model, fixture_images,
                                     fixture_features):
    start = time.time()
    gains = []
    lossless = []
    for img, feat in zip(fixture_images, fixture_features):
        raw = write_stream(
            encode_stream(img, feat, bits=8, model=fixture_model, quality_step=0.02)
        )
        p_coarse = psnr(img, decode_coarse(raw, fixture_model))
        p_full = psnr(img, decode_full(raw, fixture_model))
        gain = p_full - p_coarse
        assert gain >= 3.0, f"gain {gain:.2f} dB < 3 dB"
        gains.append(gain)

        raw_ext = write_stream(
            encode_stream(img, feat, bits=8, model=fixture_model,
                          codec_id=CODEC_EXTERNAL, external_cmd=COPY)
        )
        p_ext = psnr(img, decode_full(raw_ext, fixture_model, external_cmd=COPY))
        assert p_ext >= 48.0, f"lossless-enhancement PSNR {p_ext:.2f} dB < 48 dB"
        lossless.append(p_ext)
    elapsed = time.time() - start
    assert elapsed < 120.0, f"end-to-end took {elapsed:.1f}s (budget 120s)"
    report(
        f"enhancement gain: min {min(gains):.1f} dB (>=3), lossless-external "
        f"min {min(lossless):.1f} dB (>=48), 10 images, {elapsed:.1f}s"
    )


def test_minmax_normalization_identities():
    rng = np.random.default_rng(1006)
    for i in range(1000):
        h, w = rng.integers(1, 13, size=2)
        c = int(rng.choice([1, 3]))
        values = rng.uniform(-1, 1, (h, w, c)).astype(np.float32)
        r = ResidualPlane(values=values, x_min=float(values.min()),
                          x_max=float(values.max()))
        t = normalize_residual(r)
        if r.x_min == r.x_max:
            assert t.degenerate and not np.any(t.values)
            continue
        # endpoints exact
        assert float(t.values.ravel()[values.argmin()]) == 0.0, f"plane {i}"
        assert float(t.values.ravel()[values.argmax()]) == 1.0, f"plane {i}"
        back = denormalize_residual(t, r.x_min, r.x_max)
        assert float(np.max(np.abs(back.values - values))) <= 1e-6, f"plane {i}"
    # degenerate planes flag and zero out
    const = ResidualPlane(values=np.full((5, 5, 1), -0.125, np.float32),
                          x_min=-0.125, x_max=-0.125)
    t = normalize_residual(const)
    assert t.degenerate and not np.any(t.values)
    back = denormalize_residual(t, -0.125, -0.125)
    assert np.all(back.values == np.float32(-0.125))
    report("min-max identities: endpoints exact, roundtrip <=1e-6 on 1000 planes, "
           "degenerate flagged")
