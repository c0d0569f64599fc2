#!/usr/bin/env python3
"""Rate-distortion sweep demo on the checked-in fixtures.

Encodes every fixture image over a quality ladder, writes the metrics CSV
and prints a per-image summary of the coarse-vs-full trade-off. A thin
wrapper over `sftc sweep`; see README for the CLI flags.
"""

import argparse
import csv
import io
from pathlib import Path

from sftc.cli import main as sftc_main

ASSETS = Path(__file__).resolve().parent.parent / "tests" / "assets"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-csv", default="rd_sweep.csv")
    parser.add_argument("--quality-ladder", default="0.2,0.1,0.05,0.02,0.01")
    parser.add_argument("--bits-ladder", default="8")
    parser.add_argument("--n-images", type=int, default=10)
    args = parser.parse_args()

    images = [str(ASSETS / f"img_{i:03d}.png") for i in range(args.n_images)]
    features = [str(ASSETS / f"feat_{i:03d}.fvec") for i in range(args.n_images)]
    rc = sftc_main(
        [
            "sweep",
            "--images", *images,
            "--features", *features,
            "--model", str(ASSETS / "fixture_recon.nnwf"),
            "--bits-ladder", args.bits_ladder,
            "--quality-ladder", args.quality_ladder,
            "--out-csv", args.out_csv,
        ]
    )
    if rc:
        raise SystemExit(rc)

    with open(args.out_csv, newline="") as f:
        rows = list(csv.DictReader(f))
    print(f"{len(rows)} rows -> {args.out_csv}\n")
    print(f"{'image':10} {'mode':7} {'bpp':>9} {'psnr_db':>9}")
    for row in rows:
        if row["mode"] == "base":
            continue
        print(f"{row['image_id']:10} {row['mode']:7} {float(row['bpp']):9.4f} "
              f"{float(row['psnr_db']):9.2f}")


if __name__ == "__main__":
    main()
