"""Lossless binary container for datasets.

Layout (all little-endian):

    bytes 0..7    magic "SLSDATA\\0"
    byte  8       format version (currently 1)
    byte  9       flags; bit 0 set when a ground-truth block is present
    bytes 10..33  n, p, k as three uint64
    then          X (n*p), Z (n*k), y (n) as float64, row-major
    then          ground truth (k*p float64) if flagged

Text formats lose bits and are slow at n in the hundreds of thousands;
this container round-trips every float exactly.
"""

from __future__ import annotations

import struct
from typing import Optional

import numpy as np

from .errors import DataFormatError
from .model import Dataset

__all__ = ["MAGIC", "FORMAT_VERSION", "save_dataset", "load_dataset"]

MAGIC = b"SLSDATA\x00"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sBBQQQ")
_FLAG_BETA = 0x01


def save_dataset(path, data: Dataset, beta_star: Optional[np.ndarray] = None) -> None:
    """Write a dataset (and optional ground truth) to ``path``."""
    n, p, k = data.n, data.p, data.k
    flags = 0
    if beta_star is not None:
        beta_star = np.asarray(beta_star, dtype=float)
        if beta_star.shape != (k, p):
            raise ValueError(f"beta_star must be {k}x{p}, got {beta_star.shape}")
        flags |= _FLAG_BETA
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, flags, n, p, k))
        fh.write(np.ascontiguousarray(data.X, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(data.Z, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(data.y, dtype="<f8").tobytes())
        if beta_star is not None:
            fh.write(np.ascontiguousarray(beta_star, dtype="<f8").tobytes())


def _read_block(fh, count: int, shape, what: str) -> np.ndarray:
    raw = fh.read(count * 8)
    if len(raw) != count * 8:
        raise DataFormatError(f"truncated file: {what} block is short")
    return np.frombuffer(raw, dtype="<f8").astype(float).reshape(shape)


def load_dataset(path) -> tuple[Dataset, Optional[np.ndarray]]:
    """Read a dataset written by :func:`save_dataset`; returns the dataset
    and the ground-truth matrix or None."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise DataFormatError("truncated file: header is short")
        magic, version, flags, n, p, k = _HEADER.unpack(header)
        if magic != MAGIC:
            raise DataFormatError("not a dataset file (bad magic)")
        if version != FORMAT_VERSION:
            raise DataFormatError(f"unsupported format version {version}")
        X = _read_block(fh, n * p, (n, p), "X")
        Z = _read_block(fh, n * k, (n, k), "Z")
        y = _read_block(fh, n, (n,), "y")
        beta = None
        if flags & _FLAG_BETA:
            beta = _read_block(fh, k * p, (k, p), "ground truth")
        trailing = fh.read(1)
        if trailing:
            raise DataFormatError("trailing bytes after the last block")
    return Dataset(X, Z, y), beta
