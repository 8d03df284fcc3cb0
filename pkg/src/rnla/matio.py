"""Matrix and vector file exchange.

Two formats, chosen by content on read and by extension on write:

* Dense MatrixMarket array text ("%%MatrixMarket matrix array real general"),
  entries printed column-major with 17 significant digits so a write/read
  round trip is exact.
* A compact binary layout for large runs: 8-byte magic "RNLADNS1", two
  little-endian uint64 dims, then the row-major float64 payload.

Readers reject NaN/Inf with the offending line (text) or flat index (binary)
and report parse errors with line numbers.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .linalg import as_matrix, as_vector

__all__ = [
    "BINARY_MAGIC",
    "MatrixFileError",
    "read_matrix",
    "write_matrix",
    "read_vector",
    "write_vector",
]

BINARY_MAGIC = b"RNLADNS1"

_BANNER = "%%MatrixMarket matrix array real general"


class MatrixFileError(ValueError):
    """Malformed matrix file; message carries the path and position."""


def _is_binary_path(path) -> bool:
    return Path(path).suffix.lower() in (".bin", ".rnla")


def write_matrix(path, M) -> None:
    """Write M to path; ".bin"/".rnla" selects the binary format."""
    M = as_matrix(M)
    if _is_binary_path(path):
        _write_binary(path, M)
    else:
        _write_text(path, M)


def read_matrix(path) -> np.ndarray:
    """Read a matrix, sniffing binary vs text by the leading magic bytes."""
    p = Path(path)
    with open(p, "rb") as fh:
        head = fh.read(len(BINARY_MAGIC))
    if head == BINARY_MAGIC:
        return _read_binary(p)
    return _read_text(p)


def write_vector(path, v) -> None:
    """Write a vector as an n x 1 matrix."""
    write_matrix(path, as_vector(v).reshape(-1, 1))


def read_vector(path) -> np.ndarray:
    """Read a vector: accepts n x 1 or 1 x n files."""
    M = read_matrix(path)
    if 1 not in M.shape:
        raise MatrixFileError(f"{path}: expected a vector, got shape {M.shape}")
    return M.reshape(-1)


def _write_text(path, M: np.ndarray) -> None:
    m, n = M.shape
    with open(path, "w") as fh:
        fh.write(_BANNER + "\n")
        fh.write(f"{m} {n}\n")
        # MatrixMarket array entries run down columns.
        for j in range(n):
            for i in range(m):
                fh.write(format(M[i, j], ".17g") + "\n")


def _read_text(path) -> np.ndarray:
    with open(path, "r") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixFileError(f"{path}: empty file")
    banner = lines[0].split()
    want = _BANNER.split()
    if [w.lower() for w in banner] != [w.lower() for w in want]:
        raise MatrixFileError(
            f"{path}: line 1: expected banner {_BANNER!r}, got {lines[0]!r}")
    # Skip comment lines between banner and the size line.
    pos = 1
    while pos < len(lines) and lines[pos].lstrip().startswith("%"):
        pos += 1
    if pos >= len(lines):
        raise MatrixFileError(f"{path}: missing size line")
    parts = lines[pos].split()
    if len(parts) != 2:
        raise MatrixFileError(
            f"{path}: line {pos + 1}: size line must be 'rows cols', got {lines[pos]!r}")
    try:
        m, n = int(parts[0]), int(parts[1])
    except ValueError:
        raise MatrixFileError(
            f"{path}: line {pos + 1}: non-integer dimensions {lines[pos]!r}") from None
    if m < 1 or n < 1:
        raise MatrixFileError(f"{path}: line {pos + 1}: dimensions must be positive")
    values = np.empty(m * n)
    count = 0
    for ln in range(pos + 1, len(lines)):
        text = lines[ln].strip()
        if not text or text.startswith("%"):
            continue
        if count >= m * n:
            raise MatrixFileError(
                f"{path}: line {ln + 1}: more than {m * n} entries")
        try:
            x = float(text)
        except ValueError:
            raise MatrixFileError(
                f"{path}: line {ln + 1}: not a number: {text!r}") from None
        if not np.isfinite(x):
            raise MatrixFileError(
                f"{path}: line {ln + 1}: non-finite entry {text!r}")
        values[count] = x
        count += 1
    if count != m * n:
        raise MatrixFileError(
            f"{path}: expected {m * n} entries for a {m} x {n} matrix, found {count}")
    return values.reshape((n, m)).T.copy()  # stored column-major


def _write_binary(path, M: np.ndarray) -> None:
    m, n = M.shape
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<QQ", m, n))
        fh.write(np.ascontiguousarray(M, dtype="<f8").tobytes())


def _read_binary(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    header = len(BINARY_MAGIC) + 16
    if len(raw) < header:
        raise MatrixFileError(f"{path}: truncated header")
    m, n = struct.unpack("<QQ", raw[len(BINARY_MAGIC):header])
    if m < 1 or n < 1:
        raise MatrixFileError(f"{path}: dimensions must be positive, got {m} x {n}")
    expect = header + 8 * m * n
    if len(raw) != expect:
        raise MatrixFileError(
            f"{path}: payload is {len(raw) - header} bytes, expected {8 * m * n}")
    data = np.frombuffer(raw[header:], dtype="<f8").astype(np.float64)
    bad = np.flatnonzero(~np.isfinite(data))
    if bad.size:
        raise MatrixFileError(
            f"{path}: non-finite value at flat index {int(bad[0])}")
    return data.reshape((int(m), int(n)))
