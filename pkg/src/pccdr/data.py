"""Matrix container, dataset IO (CSV / raw-f32) and deterministic seeding.

All arithmetic downstream happens in float64; the raw binary format stores
float32 and is an ingestion format only.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInput, ParseError

RAW_MAGIC = b"PCCM"
RAW_HEADER = struct.Struct("<4sIII")  # magic, N, d, reserved (16 bytes)


@dataclass(frozen=True)
class RunSeed:
    """Root seed of a run; every stochastic operation draws a named stream.

    Two runs with the same seed (and thread count) replay identical streams,
    which is what makes whole commands bit-reproducible.
    """

    seed: int

    def rng(self, *labels) -> np.random.Generator:
        entropy = [self.seed & 0xFFFFFFFFFFFFFFFF]
        for lab in labels:
            entropy.append(zlib.crc32(str(lab).encode("utf-8")))
        return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass
class DataMatrix:
    """Dense N×d row-major matrix with optional integer row labels.

    Labels are carried for plotting only; nothing in fitting reads them.
    Immutable by convention after construction (safe to share across threads).
    """

    values: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[0] < 1 or vals.shape[1] < 1:
            raise InvalidInput(f"need a 2-D matrix with N,d >= 1, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise InvalidInput("matrix contains NaN or Inf")
        object.__setattr__(self, "values", vals)
        if self.labels is not None:
            labs = np.asarray(self.labels, dtype=np.int64)
            if labs.shape != (vals.shape[0],):
                raise InvalidInput(
                    f"labels must have length N={vals.shape[0]}, got shape {labs.shape}"
                )
            object.__setattr__(self, "labels", labs)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


def as_values(data) -> np.ndarray:
    """Accept a DataMatrix or a bare array, return the float64 matrix."""
    if isinstance(data, DataMatrix):
        return data.values
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidInput(f"expected a 2-D array, got shape {arr.shape}")
    return arr


def _parse_csv(path: str, has_header: bool, label_column: Optional[int]) -> DataMatrix:
    rows: list[list[float]] = []
    labels: list[int] = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if lineno == 1 and has_header:
                continue
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise ParseError(
                    f"{path}: ragged row {lineno}: expected {width} cells, got {len(cells)}"
                )
            try:
                nums = [float(c) for c in cells]
            except ValueError as exc:
                raise ParseError(f"{path}: non-numeric cell at row {lineno}: {exc}") from None
            if label_column is not None:
                if not (0 <= label_column < len(nums)):
                    raise ParseError(
                        f"{path}: label column {label_column} out of range for row {lineno}"
                    )
                lab = nums.pop(label_column)
                if not float(lab).is_integer():
                    raise ParseError(
                        f"{path}: label at row {lineno} is not an integer: {lab}"
                    )
                labels.append(int(lab))
            rows.append(nums)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    values = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise InvalidInput(f"{path}: non-finite value at row {bad[0] + 1}, column {bad[1]}")
    return DataMatrix(values, np.array(labels, dtype=np.int64) if labels else None)


def _parse_raw_f32(path: str) -> DataMatrix:
    with open(path, "rb") as fh:
        header = fh.read(RAW_HEADER.size)
        if len(header) != RAW_HEADER.size:
            raise ParseError(f"{path}: truncated header ({len(header)} bytes)")
        magic, n, d, _reserved = RAW_HEADER.unpack(header)
        if magic != RAW_MAGIC:
            raise ParseError(f"{path}: bad magic {magic!r}, expected {RAW_MAGIC!r}")
        payload = np.fromfile(fh, dtype="<f4")
    if payload.size != n * d:
        raise ParseError(
            f"{path}: header promises {n}x{d}={n * d} floats, file holds {payload.size}"
        )
    values = payload.astype(np.float64).reshape(n, d)
    if not np.all(np.isfinite(values)):
        raise InvalidInput(f"{path}: payload contains NaN or Inf")
    return DataMatrix(values)


def load_matrix(
    path: str,
    format: str = "csv",
    has_header: bool = False,
    label_column: Optional[int] = None,
) -> DataMatrix:
    """Load a dense matrix from CSV or the raw-f32 binary format.

    CSV: comma separator, '.' decimal, optional single header line; an
    optional label column is removed from the features and kept as labels.
    raw-f32: 16-byte header (magic "PCCM", u32 N, u32 d, u32 reserved,
    little-endian) followed by N*d little-endian float32 values.
    """
    if format == "csv":
        return _parse_csv(path, has_header, label_column)
    if format == "raw-f32":
        if has_header or label_column is not None:
            raise InvalidInput("raw-f32 has no header/label options")
        return _parse_raw_f32(path)
    raise InvalidInput(f"unknown format {format!r} (expected 'csv' or 'raw-f32')")


def save_matrix_raw(data, path: str) -> None:
    """Write the raw-f32 binary format (values are cast to float32)."""
    values = as_values(data)
    n, d = values.shape
    with open(path, "wb") as fh:
        fh.write(RAW_HEADER.pack(RAW_MAGIC, n, d, 0))
        values.astype("<f4").tofile(fh)


def save_embedding(emb: np.ndarray, path: str) -> None:
    """Write an embedding as CSV at full round-trip precision (17 digits)."""
    emb = np.asarray(emb, dtype=np.float64)
    if emb.ndim != 2 or emb.shape[0] < 1 or emb.shape[1] < 1:
        raise InvalidInput(f"embedding must be a non-empty 2-D matrix, got shape {emb.shape}")
    if not np.all(np.isfinite(emb)):
        raise InvalidInput("embedding contains NaN or Inf")
    with open(path, "w", encoding="utf-8") as fh:
        for row in emb:
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("\n")


def load_embedding(path: str) -> np.ndarray:
    """Read an embedding written by save_embedding (plain headerless CSV)."""
    return load_matrix(path, format="csv").values


def load_labels(path: str) -> np.ndarray:
    """Read one integer class id per line (blank lines skipped)."""
    labels = []
    with open(path, "r", encoding="utf-8") as fh:
        for row, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                value = float(text)
            except ValueError:
                raise ParseError(f"{path}: non-numeric label at row {row}: {text!r}")
            if not value.is_integer():
                raise ParseError(f"{path}: non-integer label at row {row}: {text!r}")
            labels.append(int(value))
    if not labels:
        raise InvalidInput(f"{path}: no labels found")
    return np.asarray(labels, dtype=np.int64)


def standardize(data: DataMatrix) -> DataMatrix:
    """Per-column zero mean, unit (population) variance; constant columns map to zeros."""
    values = as_values(data)
    if values.shape[0] < 2:
        raise InvalidInput("standardize needs at least 2 rows")
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    flat = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    centered = values - mean
    centered[:, flat] = 0.0
    out = centered / np.where(flat, 1.0, std)
    labels = data.labels if isinstance(data, DataMatrix) else None
    return DataMatrix(out, labels)
