"""FVEC feature-vector files: magic "FVEC" | dim u32 | float32 values, little-endian."""

from __future__ import annotations

import struct

import numpy as np

from .errors import InvalidInputError, TruncatedFileError
from .feature import FeatureVector

MAGIC = b"FVEC"


def write_fvec(v: FeatureVector) -> bytes:
    return MAGIC + struct.pack("<I", len(v)) + v.values.astype("<f4").tobytes()


def read_fvec(data: bytes) -> FeatureVector:
    if len(data) < 8:
        raise TruncatedFileError("FVEC file shorter than its 8-byte header")
    if data[:4] != MAGIC:
        raise InvalidInputError("not an FVEC file (bad magic)")
    (dim,) = struct.unpack_from("<I", data, 4)
    if dim == 0:
        raise InvalidInputError("FVEC dimension must be >= 1")
    need = 8 + 4 * dim
    if len(data) < need:
        raise TruncatedFileError(f"FVEC data ends at {len(data)} bytes, need {need}")
    values = np.frombuffer(data, dtype="<f4", count=dim, offset=8)
    return FeatureVector(values=values)


def load_fvec(path) -> FeatureVector:
    with open(path, "rb") as f:
        return read_fvec(f.read())


def save_fvec(v: FeatureVector, path):
    with open(path, "wb") as f:
        f.write(write_fvec(v))
