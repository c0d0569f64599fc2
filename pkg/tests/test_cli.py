"""CLI surface: pipelines, CSV sweep, exit codes."""

import csv
import subprocess
import sys

import numpy as np
import pytest

from sftc import cli
from sftc.feature import FeatureVector
from sftc.fvec import save_fvec, load_fvec
from sftc.image import load_image
from sftc.metrics import psnr

COPY = "cp {IN} {OUT}"


@pytest.fixture
def workdir(tmp_path, assets_dir):
    return {
        "tmp": tmp_path,
        "img": assets_dir / "img_000.png",
        "feat": assets_dir / "feat_000.fvec",
        "model": assets_dir / "fixture_recon.nnwf",
    }


def run(argv):
    return cli.main([str(a) for a in argv])


class TestEncodeDecode:
    def test_lossless_external_roundtrip_psnr(self, workdir):
        stream = workdir["tmp"] / "out.sftc"
        decoded = workdir["tmp"] / "dec.png"
        assert run([
            "encode", workdir["img"], "--feature", workdir["feat"],
            "--model", workdir["model"], "--enh-codec", "external",
            "--external-cmd", COPY, "-o", stream,
        ]) == 0
        assert run([
            "decode", stream, "--mode", "full", "--model", workdir["model"],
            "--external-cmd", COPY, "-o", decoded,
        ]) == 0
        original = load_image(workdir["img"])
        assert psnr(original, load_image(decoded)) >= 48.0

    def test_internal_full_and_coarse(self, workdir):
        stream = workdir["tmp"] / "out.sftc"
        full_png = workdir["tmp"] / "full.png"
        coarse_png = workdir["tmp"] / "coarse.png"
        assert run([
            "encode", workdir["img"], "--feature", workdir["feat"],
            "--model", workdir["model"], "--quality", "0.02", "-o", stream,
        ]) == 0
        assert run(["decode", stream, "--mode", "full", "--model",
                    workdir["model"], "-o", full_png]) == 0
        assert run(["decode", stream, "--mode", "coarse", "--model",
                    workdir["model"], "-o", coarse_png]) == 0
        original = load_image(workdir["img"])
        assert psnr(original, load_image(full_png)) > psnr(
            original, load_image(coarse_png)
        )

    def test_decode_base_writes_fvec(self, workdir):
        stream = workdir["tmp"] / "out.sftc"
        out = workdir["tmp"] / "feat.fvec"
        run(["encode", workdir["img"], "--feature", workdir["feat"], "-o", stream])
        assert run(["decode", stream, "--mode", "base", "-o", out]) == 0
        original = load_fvec(workdir["feat"])
        decoded = load_fvec(out)
        assert np.max(np.abs(original.values - decoded.values)) <= 1.0 / 255 + 1e-6

    def test_extract_base_shrinks_stream(self, workdir):
        stream = workdir["tmp"] / "out.sftc"
        base = workdir["tmp"] / "base.sftc"
        run([
            "encode", workdir["img"], "--feature", workdir["feat"],
            "--model", workdir["model"], "-o", stream,
        ])
        assert run(["extract-base", stream, "-o", base]) == 0
        assert base.stat().st_size < stream.stat().st_size

    def test_reconstruct_writes_float_output(self, workdir):
        out = workdir["tmp"] / "recon.npy"
        assert run(["reconstruct", "--model", workdir["model"], "--feature",
                    workdir["feat"], "-o", out]) == 0
        arr = np.load(out)
        assert arr.shape == (64, 64, 3)
        assert arr.dtype == np.float32
        assert 0.0 <= arr.min() and arr.max() <= 1.0

    def test_extractor_hook(self, workdir):
        # stand-in extractor: ignores the image, emits a fixed FVEC
        ext = (
            'python3 -c "import sys,struct; '
            "open(sys.argv[2],'wb').write(b'FVEC'+struct.pack('<I',4)"
            '+struct.pack(\'<4f\',0.1,-0.2,0.3,0.0))" {IN} {OUT}'
        )
        stream = workdir["tmp"] / "out.sftc"
        assert run(["encode", workdir["img"], "--extractor-cmd", ext,
                    "-o", stream]) == 0
        from sftc.container import decode_base_only

        back = decode_base_only(stream.read_bytes())
        assert len(back) == 4


class TestExitCodes:
    def test_missing_file(self, workdir):
        assert run(["decode", workdir["tmp"] / "nope.sftc", "--mode", "base",
                    "-o", workdir["tmp"] / "x.fvec"]) == cli.EXIT_FILE_NOT_FOUND

    def test_not_a_stream(self, workdir):
        bad = workdir["tmp"] / "bad.sftc"
        bad.write_bytes(b"garbage bytes here")
        assert run(["decode", bad, "--mode", "base", "-o",
                    workdir["tmp"] / "x.fvec"]) == cli.EXIT_PARSE

    def test_mode_unavailable_distinct_code(self, workdir):
        stream = workdir["tmp"] / "base.sftc"
        run(["encode", workdir["img"], "--feature", workdir["feat"], "-o", stream])
        code = run(["decode", stream, "--mode", "full", "--model",
                    workdir["model"], "-o", workdir["tmp"] / "x.png"])
        assert code == cli.EXIT_MODE_UNAVAILABLE
        assert code not in (cli.EXIT_FILE_NOT_FOUND, cli.EXIT_PARSE)

    def test_invalid_input_code(self, workdir):
        stream = workdir["tmp"] / "out.sftc"
        run(["encode", workdir["img"], "--feature", workdir["feat"], "-o", stream])
        assert run(["decode", stream, "--mode", "coarse", "-o",
                    workdir["tmp"] / "x.png"]) == cli.EXIT_INVALID_INPUT

    def test_external_codec_failure_code(self, workdir):
        stream = workdir["tmp"] / "out.sftc"
        assert run([
            "encode", workdir["img"], "--feature", workdir["feat"],
            "--model", workdir["model"], "--enh-codec", "external",
            "--external-cmd", "/no/such/bin {IN} {OUT}", "-o", stream,
        ]) == cli.EXIT_EXTERNAL_CODEC


class TestSweep:
    def test_quality_ladder_monotone(self, workdir, assets_dir):
        out_csv = workdir["tmp"] / "sweep.csv"
        assert run([
            "sweep",
            "--images", assets_dir / "img_000.png", assets_dir / "img_001.png",
            "--features", assets_dir / "feat_000.fvec", assets_dir / "feat_001.fvec",
            "--model", workdir["model"],
            "--quality-ladder", "0.1,0.05,0.02",
            "--out-csv", out_csv,
        ]) == 0
        with open(out_csv, newline="") as f:
            rows = list(csv.DictReader(f))
        assert set(r["image_id"] for r in rows) == {"img_000", "img_001"}
        for image_id in ("img_000", "img_001"):
            full = [r for r in rows if r["image_id"] == image_id and r["mode"] == "full"]
            assert len(full) == 3
            bpps = [float(r["bpp"]) for r in full]
            psnrs = [float(r["psnr_db"]) for r in full]
            assert bpps == sorted(bpps) and bpps[0] < bpps[-1]
            assert all(a <= b for a, b in zip(psnrs, psnrs[1:]))
            base = [r for r in rows if r["image_id"] == image_id and r["mode"] == "base"]
            assert len(base) == 1 and base[0]["psnr_db"] == ""
            assert float(base[0]["bpp"]) <= bpps[0]

    def test_csv_schema(self, workdir, assets_dir):
        out_csv = workdir["tmp"] / "sweep.csv"
        run([
            "sweep", "--images", assets_dir / "img_002.png",
            "--features", assets_dir / "feat_002.fvec",
            "--model", workdir["model"], "--quality-ladder", "0.05",
            "--out-csv", out_csv,
        ])
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "image_id,mode,total_bits,bpp,psnr_db,mse,mae,embed_l2"
        for line in lines[1:]:
            fields = line.split(",")
            assert len(fields) == 8
            assert fields[1] in ("base", "coarse", "full")
            int(fields[2])
            float(fields[3])
            if fields[1] != "base":
                float(fields[4]), float(fields[5]), float(fields[6])

    def test_rate_accounting_matches_file_size(self, workdir):
        stream = workdir["tmp"] / "out.sftc"
        run([
            "encode", workdir["img"], "--feature", workdir["feat"],
            "--model", workdir["model"], "-o", stream,
        ])
        out_csv = workdir["tmp"] / "m.csv"
        dec = workdir["tmp"] / "dec.png"
        run(["decode", stream, "--mode", "full", "--model", workdir["model"],
             "-o", dec])
        run(["metrics", workdir["img"], dec, "--stream", stream,
             "--out-csv", out_csv])
        with open(out_csv, newline="") as f:
            row = next(csv.DictReader(f))
        assert int(row["total_bits"]) == 8 * stream.stat().st_size


class TestPairsProtocol:
    def test_verification_output(self, workdir, capsys):
        rng = np.random.default_rng(70)
        pairs_csv = workdir["tmp"] / "pairs.csv"
        lines = ["path_a,path_b,same"]
        for i in range(6):
            a = FeatureVector(rng.normal(size=16))
            same = i % 2 == 0
            b = FeatureVector(
                a.values + rng.normal(0, 0.05 if same else 1.5, size=16)
            )
            save_fvec(a, workdir["tmp"] / f"p{i}_a.fvec")
            save_fvec(b, workdir["tmp"] / f"p{i}_b.fvec")
            lines.append(f"p{i}_a.fvec,p{i}_b.fvec,{1 if same else 0}")
        pairs_csv.write_text("\n".join(lines) + "\n")
        assert run(["metrics", "--pairs", pairs_csv]) == 0
        out = capsys.readouterr().out
        assert out.startswith("best_threshold,")
        acc = float(out.splitlines()[1].split(",")[1])
        assert acc == 1.0

    def test_degenerate_pairs_exit_code(self, workdir):
        pairs_csv = workdir["tmp"] / "pairs.csv"
        v = FeatureVector([0.5, 0.5])
        save_fvec(v, workdir["tmp"] / "a.fvec")
        pairs_csv.write_text("path_a,path_b,same\na.fvec,a.fvec,1\n")
        assert run(["metrics", "--pairs", pairs_csv]) == cli.EXIT_DEGENERATE


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "sftc", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "encode" in proc.stdout
