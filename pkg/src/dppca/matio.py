"""Matrix serialization: the DPM1 binary format and plain CSV.

DPM1 layout (little-endian throughout):

    offset 0   4 bytes   magic b"DPM1"
    offset 4   u16       format version, currently 1
    offset 6   u64       n (rows)
    offset 14  u64       d (columns)
    offset 22  n*d*8     float64 payload, row-major

CSV files are headerless, one row per line, parsed as float64.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .matcore import DenseMatrix

MAGIC = b"DPM1"
VERSION = 1
_HEADER = struct.Struct("<4sHQQ")


def save_dpm(a: DenseMatrix, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, a.n, a.d))
        fh.write(np.ascontiguousarray(a.data, dtype="<f8").tobytes())


def load_dpm(path: str | Path) -> DenseMatrix:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise FormatError(f"{path}: truncated header")
        magic, version, n, d = _HEADER.unpack(header)
        if magic != MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        payload = fh.read(n * d * 8)
        if len(payload) != n * d * 8:
            raise FormatError(
                f"{path}: payload is {len(payload)} bytes, expected {n * d * 8}"
            )
        if fh.read(1):
            raise FormatError(f"{path}: trailing bytes after payload")
    data = np.frombuffer(payload, dtype="<f8").reshape(n, d)
    return DenseMatrix(data.astype(np.float64))


def save_csv(a: DenseMatrix, path: str | Path) -> None:
    buf = io.StringIO()
    for row in a.data:
        buf.write(",".join(repr(float(v)) for v in row))
        buf.write("\n")
    Path(path).write_text(buf.getvalue())


def load_csv(path: str | Path) -> DenseMatrix:
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise FormatError(
                    f"{path}:{lineno}: expected {width} fields, got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path}: no rows")
    return DenseMatrix(np.array(rows, dtype=np.float64))


def load_matrix(path: str | Path) -> DenseMatrix:
    """Dispatch on extension: .dpm -> DPM1, anything else -> CSV."""
    if str(path).endswith(".dpm"):
        return load_dpm(path)
    return load_csv(path)
