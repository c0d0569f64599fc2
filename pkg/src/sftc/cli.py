"""Command-line front end: encode, decode, extract-base, reconstruct, metrics, sweep.

Exit codes (documented; each error family is distinct):
    0 success                     5 requested mode unavailable
    2 usage error (argparse)      6 invalid input / precondition
    3 input file not found        7 external codec failure
    4 stream or model unreadable  8 corrupt or truncated payload
                                  9 degenerate verification protocol
"""

from __future__ import annotations

import argparse
import csv
import shlex
import subprocess
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import container, errors, fvec, metrics
from .engine import forward
from .feature import dequantize_feature, quantize_feature
from .image import Image, load_image, save_image
from .metrics import MetricsRow
from .nnwf import load_model_file

EXIT_FILE_NOT_FOUND = 3
EXIT_PARSE = 4
EXIT_MODE_UNAVAILABLE = 5
EXIT_INVALID_INPUT = 6
EXIT_EXTERNAL_CODEC = 7
EXIT_PAYLOAD = 8
EXIT_DEGENERATE = 9

_PARSE_ERRORS = (
    errors.NotAStreamError,
    errors.TruncatedStreamError,
    errors.UnsupportedVersionError,
    errors.CorruptHeaderError,
    errors.NotAModelError,
    errors.TruncatedFileError,
    errors.MalformedModelError,
)
_PAYLOAD_ERRORS = (errors.CorruptPayloadError, errors.TruncatedPayloadError)


def _fail(code: int, message: str) -> int:
    print(f"sftc: error: {message}", file=sys.stderr)
    return code


def _extract_feature(image_path: Path, extractor_cmd: str) -> fvec.FeatureVector:
    """Run an external extractor: {IN} image path, {OUT} FVEC path."""
    with tempfile.TemporaryDirectory(prefix="sftc-fvec-") as tmp:
        out_path = Path(tmp) / "feature.fvec"
        argv = [
            tok.replace("{IN}", str(image_path)).replace("{OUT}", str(out_path))
            for tok in shlex.split(extractor_cmd)
        ]
        try:
            proc = subprocess.run(argv, capture_output=True, timeout=300)
        except FileNotFoundError as exc:
            raise errors.ExternalCodecError(f"extractor not found: {argv[0]}") from exc
        if proc.returncode != 0 or not out_path.exists():
            raise errors.ExternalCodecError(
                f"extractor failed ({proc.returncode}): "
                f"{proc.stderr.decode(errors='replace')[:500]}"
            )
        return fvec.load_fvec(out_path)


def _cmd_encode(args) -> int:
    image = load_image(args.image)
    if args.feature:
        feature = fvec.load_fvec(args.feature)
    elif args.extractor_cmd:
        feature = _extract_feature(Path(args.image), args.extractor_cmd)
    else:
        raise errors.InvalidInputError("need --feature or --extractor-cmd")
    model = load_model_file(args.model) if args.model else None
    codec_id = (
        container.CODEC_EXTERNAL
        if args.enh_codec == "external"
        else container.CODEC_INTERNAL
    )
    stream = container.encode_stream(
        image,
        feature,
        bits=args.bits,
        model=model,
        quality_step=args.quality,
        codec_id=codec_id,
        external_cmd=args.external_cmd,
    )
    Path(args.out).write_bytes(container.write_stream(stream))
    return 0


def _cmd_decode(args) -> int:
    data = Path(args.stream).read_bytes()
    if args.mode == "base":
        feature = container.decode_base_only(data)
        fvec.save_fvec(feature, args.out)
        return 0
    model = load_model_file(args.model) if args.model else None
    if model is None:
        raise errors.InvalidInputError(f"--mode {args.mode} requires --model")
    if args.mode == "coarse":
        image = container.decode_coarse(data, model)
    else:
        image = container.decode_full(data, model, external_cmd=args.external_cmd)
    save_image(image, args.out)
    return 0


def _cmd_extract_base(args) -> int:
    data = Path(args.stream).read_bytes()
    Path(args.out).write_bytes(container.extract_base(data))
    return 0


def _cmd_reconstruct(args) -> int:
    model = load_model_file(args.model)
    feature = fvec.load_fvec(args.feature)
    save_image(forward(model, feature), args.out)
    return 0


def _cmd_metrics(args) -> int:
    if args.pairs:
        return _run_pairs(args)
    if not (args.original and args.decoded):
        raise errors.InvalidInputError("need ORIGINAL and DECODED images (or --pairs)")
    a = load_image(args.original)
    b = load_image(args.decoded)
    total_bits = 0
    bpp = 0.0
    if args.stream:
        total_bits = 8 * Path(args.stream).stat().st_size
        bpp = metrics.bits_per_pixel(total_bits // 8, a.shape[1], a.shape[0])
    embed_l2 = None
    if args.feature and args.decoded_feature:
        embed_l2 = metrics.embedding_distance(
            fvec.load_fvec(args.feature), fvec.load_fvec(args.decoded_feature)
        )
    row = MetricsRow(
        image_id=args.image_id or Path(args.original).stem,
        mode=args.mode,
        total_bits=total_bits,
        bpp=bpp,
        psnr_db=metrics.psnr(a, b),
        mse=metrics.mse(a, b),
        mae=metrics.mae(a, b),
        embed_l2=embed_l2,
    )
    text = metrics.rows_to_csv([row])
    if args.out_csv:
        Path(args.out_csv).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _run_pairs(args) -> int:
    """Verification sweep over a pairs CSV: path_a,path_b,same (FVEC paths)."""
    with open(args.pairs, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != ["path_a", "path_b", "same"]:
            raise errors.InvalidInputError(
                "pairs CSV must have header path_a,path_b,same"
            )
        entries = list(reader)
    if not entries:
        raise errors.DegenerateProtocolError("pairs file is empty")
    base = Path(args.pairs).parent
    dists = []
    for e in entries:
        va = fvec.load_fvec(base / e["path_a"])
        vb = fvec.load_fvec(base / e["path_b"])
        dists.append(
            (metrics.embedding_distance(va, vb), e["same"].strip() in ("1", "true", "True"))
        )
    threshold, accuracy = metrics.verification_accuracy(dists)
    print(f"best_threshold,{threshold:.6f}")
    print(f"accuracy,{accuracy:.6f}")
    return 0


def _sweep_one(task) -> list[MetricsRow]:
    image_path, feature_path, model_path, bits_ladder, quality_ladder, enh_codec, ext = task
    image = load_image(image_path)
    feature = fvec.load_fvec(feature_path)
    model = load_model_file(model_path)
    h, w = image.shape[0], image.shape[1]
    image_id = Path(image_path).stem
    codec_id = (
        container.CODEC_EXTERNAL if enh_codec == "external" else container.CODEC_INTERNAL
    )
    rows = []
    for bits in bits_ladder:
        base_feature = dequantize_feature(quantize_feature(feature, bits))
        embed_l2 = metrics.embedding_distance(feature, base_feature)
        coarse = None
        for quality in quality_ladder:
            stream = container.encode_stream(
                image,
                feature,
                bits=bits,
                model=model,
                quality_step=quality,
                codec_id=codec_id,
                external_cmd=ext,
            )
            full_bytes = container.write_stream(stream)
            base_bytes = container.extract_base(full_bytes)
            if coarse is None:
                coarse = container.decode_coarse(base_bytes, model)
                base_bits = 8 * len(base_bytes)
                rows.append(
                    MetricsRow(
                        image_id=image_id,
                        mode="base",
                        total_bits=base_bits,
                        bpp=metrics.bits_per_pixel(len(base_bytes), w, h),
                        psnr_db=None,
                        mse=None,
                        mae=None,
                        embed_l2=embed_l2,
                    )
                )
                rows.append(
                    MetricsRow(
                        image_id=image_id,
                        mode="coarse",
                        total_bits=base_bits,
                        bpp=metrics.bits_per_pixel(len(base_bytes), w, h),
                        psnr_db=metrics.psnr(image, coarse),
                        mse=metrics.mse(image, coarse),
                        mae=metrics.mae(image, coarse),
                        embed_l2=embed_l2,
                    )
                )
            full = container.decode_full(full_bytes, model, external_cmd=ext)
            rows.append(
                MetricsRow(
                    image_id=image_id,
                    mode="full",
                    total_bits=8 * len(full_bytes),
                    bpp=metrics.bits_per_pixel(len(full_bytes), w, h),
                    psnr_db=metrics.psnr(image, full),
                    mse=metrics.mse(image, full),
                    mae=metrics.mae(image, full),
                    embed_l2=embed_l2,
                )
            )
    return rows


def _cmd_sweep(args) -> int:
    if len(args.images) != len(args.features):
        raise errors.InvalidInputError("--images and --features must pair up")
    bits_ladder = [int(b) for b in args.bits_ladder.split(",") if b]
    quality_ladder = sorted(
        (float(q) for q in args.quality_ladder.split(",") if q), reverse=True
    )
    if not bits_ladder or not quality_ladder:
        raise errors.InvalidInputError("empty sweep ladder")
    tasks = [
        (img, feat, args.model, bits_ladder, quality_ladder, args.enh_codec,
         args.external_cmd)
        for img, feat in zip(args.images, args.features)
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_one, tasks))
    else:
        results = [_sweep_one(t) for t in tasks]
    rows = [row for batch in results for row in batch]
    text = metrics.rows_to_csv(rows)
    if args.out_csv:
        Path(args.out_csv).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sftc",
        description="Scalable feature+texture codec for facial images",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="image + feature -> .sftc stream")
    p.add_argument("image")
    p.add_argument("--feature", help="FVEC file with the image's descriptor")
    p.add_argument("--extractor-cmd",
                   help="external extractor template with {IN} image, {OUT} fvec")
    p.add_argument("--bits", type=int, default=8, help="quantizer bits (2-16)")
    p.add_argument("--model", help="NNWF model; enables the enhancement layer")
    p.add_argument("--quality", type=float, default=0.02,
                   help="internal coder quantization step")
    p.add_argument("--enh-codec", choices=["internal", "external"],
                   default="internal")
    p.add_argument("--external-cmd",
                   help="external codec template with {IN}/{OUT} placeholders")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("decode", help=".sftc stream -> feature or image file")
    p.add_argument("stream")
    p.add_argument("--mode", choices=["base", "coarse", "full"], required=True)
    p.add_argument("--model", help="NNWF model (coarse/full modes)")
    p.add_argument("--external-cmd",
                   help="external codec decode template ({IN} payload, {OUT} image)")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("extract-base", help="strip the enhancement layer")
    p.add_argument("stream")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_extract_base)

    p = sub.add_parser("reconstruct",
                       help="run the reconstruction network on an FVEC file")
    p.add_argument("--model", required=True)
    p.add_argument("--feature", required=True)
    p.add_argument("-o", "--out", required=True,
                   help="output image (.png, .npy or raw .f32)")
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("metrics", help="PSNR/bpp row for an image pair, "
                                       "or --pairs verification sweep")
    p.add_argument("original", nargs="?")
    p.add_argument("decoded", nargs="?")
    p.add_argument("--stream", help=".sftc file whose size sets total_bits")
    p.add_argument("--feature", help="original FVEC (for embed_l2)")
    p.add_argument("--decoded-feature", help="decoded FVEC (for embed_l2)")
    p.add_argument("--image-id")
    p.add_argument("--mode", default="full")
    p.add_argument("--pairs", help="CSV path_a,path_b,same of FVEC pairs")
    p.add_argument("--out-csv")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("sweep", help="rate ladder over bits x quality -> CSV")
    p.add_argument("--images", nargs="+", required=True)
    p.add_argument("--features", nargs="+", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--bits-ladder", default="8")
    p.add_argument("--quality-ladder", default="0.1,0.05,0.02")
    p.add_argument("--enh-codec", choices=["internal", "external"],
                   default="internal")
    p.add_argument("--external-cmd")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-csv")
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        return _fail(EXIT_FILE_NOT_FOUND, f"file not found: {exc.filename or exc}")
    except errors.ModeUnavailableError as exc:
        return _fail(EXIT_MODE_UNAVAILABLE, str(exc))
    except _PARSE_ERRORS as exc:
        return _fail(EXIT_PARSE, str(exc))
    except _PAYLOAD_ERRORS as exc:
        return _fail(EXIT_PAYLOAD, str(exc))
    except errors.ExternalCodecError as exc:
        return _fail(EXIT_EXTERNAL_CODEC, str(exc))
    except errors.DegenerateProtocolError as exc:
        return _fail(EXIT_DEGENERATE, str(exc))
    except errors.InvalidInputError as exc:
        return _fail(EXIT_INVALID_INPUT, str(exc))


if __name__ == "__main__":
    sys.exit(main())
