"""Per-frame posterior matrix container and its binary file format.

File layout: magic ``CTCP``, u32 version (=1), u32 T, u32 A, then T*A
little-endian f32 values row-major. Rows are probability distributions,
not raw logits; softmax is the exporter's job.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, IoFailure, MalformedHeader, RowNotNormalized

MAGIC = b"CTCP"
VERSION = 1
ROW_SUM_TOLERANCE = 1e-4

_HEADER = struct.Struct("<4sIII")


@dataclass(frozen=True)
class LogitMatrix:
    """T x A matrix of per-frame probability distributions."""

    frames: np.ndarray  # float32, shape (T, A)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.frames, dtype=np.float32)
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected a 2-d matrix, got shape {arr.shape}")
        object.__setattr__(self, "frames", arr)
        _validate_rows(arr)

    @property
    def T(self) -> int:
        return self.frames.shape[0]

    @property
    def A(self) -> int:
        return self.frames.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LogitMatrix):
            return NotImplemented
        return self.frames.shape == other.frames.shape and bool(
            np.all(self.frames == other.frames)
        )


def _validate_rows(arr: np.ndarray) -> None:
    if arr.shape[0] == 0:
        return
    wide = arr.astype(np.float64)
    outside = np.maximum(np.maximum(-wide, wide - 1.0), 0.0)
    if np.any(outside > 0.0):
        row = int(np.argmax(outside.max(axis=1)))
        raise RowNotNormalized(row, float(outside[row].max()))
    residuals = np.abs(wide.sum(axis=1) - 1.0)
    worst = int(np.argmax(residuals))
    if residuals[worst] > ROW_SUM_TOLERANCE:
        raise RowNotNormalized(worst, float(residuals[worst]))


def load_logits(path) -> LogitMatrix:
    """Read and validate a posterior file."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc

    if len(data) < _HEADER.size:
        raise MalformedHeader("file shorter than header")
    magic, version, t, a = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise MalformedHeader(f"bad magic {magic!r}")
    if version != VERSION:
        raise MalformedHeader(f"unsupported version {version}")
    payload = data[_HEADER.size:]
    expected = t * a * 4
    if len(payload) != expected:
        raise DimensionMismatch(
            f"payload holds {len(payload)} bytes, header implies {expected}"
        )
    frames = np.frombuffer(payload, dtype="<f4").reshape(t, a).copy()
    return LogitMatrix(frames)


def save_logits(matrix: LogitMatrix, path) -> None:
    """Write a posterior file; load_logits reproduces the matrix bit-exactly."""
    header = _HEADER.pack(MAGIC, VERSION, matrix.T, matrix.A)
    body = np.ascontiguousarray(matrix.frames, dtype="<f4").tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(body)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
