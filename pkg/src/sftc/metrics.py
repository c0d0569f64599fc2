"""Rate, distortion and verification metrics behind the evaluation harness.

Distortion is measured in the 8-bit domain (images are converted with the
same rounding the file writer uses). Identical images report the
documented PSNR cap of 99.0 dB instead of infinity.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateProtocolError, InvalidInputError
from .feature import FeatureVector
from .image import Image

PSNR_CAP_DB = 99.0

CSV_COLUMNS = ("image_id", "mode", "total_bits", "bpp", "psnr_db", "mse", "mae",
               "embed_l2")


def _as_u8_pair(a: Image, b: Image) -> tuple[np.ndarray, np.ndarray]:
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch {a.shape} vs {b.shape}")
    return a.to_uint8().astype(np.int64), b.to_uint8().astype(np.int64)


def mse(a: Image, b: Image) -> float:
    ua, ub = _as_u8_pair(a, b)
    return float(np.mean((ua - ub) ** 2))


def mae(a: Image, b: Image) -> float:
    ua, ub = _as_u8_pair(a, b)
    return float(np.mean(np.abs(ua - ub)))


def psnr(a: Image, b: Image) -> float:
    """10*log10(255^2 / MSE) in dB, capped at 99.0 for identical images."""
    err = mse(a, b)
    if err == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(255.0 ** 2 / err))


def bits_per_pixel(stream_bytes: int, width: int, height: int) -> float:
    if width * height <= 0:
        raise InvalidInputError("pixel count must be positive")
    if stream_bytes < 0:
        raise InvalidInputError("stream length must be >= 0")
    return 8.0 * stream_bytes / (width * height)


def embedding_distance(a: FeatureVector, b: FeatureVector) -> float:
    if len(a) != len(b):
        raise InvalidInputError(f"length mismatch {len(a)} vs {len(b)}")
    return float(np.linalg.norm(a.values - b.values))


def verification_accuracy(
    pairs: Sequence[tuple[float, bool]],
) -> tuple[float, float]:
    """Best single threshold for same/different classification.

    Candidate thresholds are the midpoints of the sorted distances plus one
    sentinel below the minimum and one above the maximum (so the all-same
    and all-different classifications are reachable). A pair is called
    "same" when its distance is <= the threshold; ties in accuracy resolve
    to the smallest threshold. Returns (best_threshold, best_accuracy).
    """
    dists = np.array([d for d, _ in pairs], dtype=np.float64)
    same = np.array([bool(s) for _, s in pairs], dtype=bool)
    if dists.size == 0 or same.all() or not same.any():
        raise DegenerateProtocolError("need at least one same and one different pair")
    if not np.all(np.isfinite(dists)):
        raise InvalidInputError("distances must be finite")
    d_sorted = np.sort(dists)
    mids = (d_sorted[:-1] + d_sorted[1:]) / 2.0
    candidates = np.concatenate(
        ([d_sorted[0] - 1.0], mids, [d_sorted[-1] + 1.0])
    )
    best_threshold = candidates[0]
    best_accuracy = -1.0
    n = dists.size
    for t in candidates:
        acc = float(np.count_nonzero((dists <= t) == same)) / n
        if acc > best_accuracy:
            best_accuracy = acc
            best_threshold = float(t)
    return best_threshold, best_accuracy


@dataclass
class MetricsRow:
    """One evaluation record; maps 1:1 onto a CSV row."""

    image_id: str
    mode: str  # base | coarse | full
    total_bits: int
    bpp: float
    psnr_db: Optional[float]
    mse: Optional[float]
    mae: Optional[float]
    embed_l2: Optional[float] = None

    def as_csv_fields(self) -> list[str]:
        def fmt(x, digits):
            return "" if x is None else f"{x:.{digits}f}"

        return [
            self.image_id,
            self.mode,
            str(self.total_bits),
            f"{self.bpp:.6f}",
            fmt(self.psnr_db, 4),
            fmt(self.mse, 6),
            fmt(self.mae, 6),
            fmt(self.embed_l2, 6),
        ]


def rows_to_csv(rows: Sequence[MetricsRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.as_csv_fields())
    return buf.getvalue()
