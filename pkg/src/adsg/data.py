"""Sparse dataset loading (LibSVM text format) and feature-block partitioning.

The design matrix is stored row-compressed: three flat arrays (indptr,
indices, data) plus a label vector. All arrays are frozen after
construction so a dataset can be shared between concurrent runs.
"""

from __future__ import annotations

import gzip
import math
import os
from dataclasses import dataclass

import numpy as np


class ParseError(ValueError):
    """Malformed LibSVM input. Carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Dataset:
    """Immutable row-sparse design matrix with labels.

    Column indices are 0-based and strictly increasing within a row.
    """

    def __init__(self, indptr, indices, data, labels, d: int):
        indptr = np.asarray(indptr, dtype=np.int64)
        indices = np.asarray(indices, dtype=np.int64)
        data = np.asarray(data, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.float64)
        n = labels.shape[0]
        if n < 1 or d < 1:
            raise ValueError("dataset needs n >= 1 and d >= 1")
        if indptr.shape[0] != n + 1 or indptr[0] != 0 or indptr[-1] != indices.shape[0]:
            raise ValueError("inconsistent indptr")
        if indices.shape[0] != data.shape[0]:
            raise ValueError("indices/data length mismatch")
        if indices.size and (indices.min() < 0 or indices.max() >= d):
            raise ValueError("column index out of range")
        for arr in (indptr, indices, data, labels):
            arr.setflags(write=False)
        self.indptr = indptr
        self.indices = indices
        self.data = data
        self.labels = labels
        self.d = int(d)
        self.n = n
        self.nnz = int(indices.shape[0])
        # strictly increasing within each row (catches duplicates too)
        if self.nnz > 1:
            diffs = np.diff(indices)
            same_row = np.ones(self.nnz - 1, dtype=bool)
            starts = indptr[1:-1]  # flat positions where rows 1..n-1 begin
            starts = starts[(starts >= 1) & (starts <= self.nnz - 1)]
            same_row[starts - 1] = False
            if np.any(diffs[same_row] <= 0):
                raise ValueError("row indices must be strictly increasing")
        self._row_ids = None

    @property
    def row_ids(self):
        """Row id per stored nonzero, built lazily for vectorized matvecs."""
        if self._row_ids is None:
            counts = np.diff(self.indptr)
            rid = np.repeat(np.arange(self.n, dtype=np.int64), counts)
            rid.setflags(write=False)
            self._row_ids = rid
        return self._row_ids

    def row(self, i: int):
        """Return (indices, values) views of row i."""
        s, e = self.indptr[i], self.indptr[i + 1]
        return self.indices[s:e], self.data[s:e]

    def dot(self, x):
        """A @ x for a dense vector x of length d."""
        if x.shape[0] != self.d:
            raise ValueError("dimension mismatch")
        contrib = self.data * x[self.indices]
        return np.bincount(self.row_ids, weights=contrib, minlength=self.n)

    def tdot(self, g):
        """A.T @ g for a dense vector g of length n."""
        if g.shape[0] != self.n:
            raise ValueError("dimension mismatch")
        contrib = self.data * g[self.row_ids]
        return np.bincount(self.indices, weights=contrib, minlength=self.d)

    def row_norms_sq(self):
        return np.bincount(self.row_ids, weights=self.data**2, minlength=self.n)

    def block_row_norms_sq(self, part: "BlockPartition"):
        """Per-row, per-block squared norms as an (n, B) array."""
        blk = self.indices // part.omega
        flat = self.row_ids * part.B + blk
        out = np.bincount(flat, weights=self.data**2, minlength=self.n * part.B)
        return out.reshape(self.n, part.B)


@dataclass(frozen=True)
class BlockPartition:
    """Contiguous equal-width partition of the d coordinates into B blocks.

    The last block is short when B does not divide d.
    """

    d: int
    B: int
    omega: int

    def bounds(self, l: int) -> tuple[int, int]:
        if not 0 <= l < self.B:
            raise ValueError(f"block index {l} out of range [0, {self.B})")
        lo = min(l * self.omega, self.d)
        return lo, min(lo + self.omega, self.d)

    def width(self, l: int) -> int:
        lo, hi = self.bounds(l)
        return hi - lo

    def block_of(self, coord: int) -> int:
        return coord // self.omega


def make_partition(d: int, B: int) -> BlockPartition:
    """Partition [0, d) into B contiguous blocks of width ceil(d / B)."""
    if B < 1 or B > d:
        raise ValueError(f"need 1 <= B <= d, got B={B}, d={d}")
    return BlockPartition(d=d, B=B, omega=math.ceil(d / B))


def sparsity(ds: Dataset) -> float:
    """Fraction of stored entries, nnz / (n * d). Always in (0, 1] for nnz > 0."""
    return ds.nnz / (ds.n * ds.d)


def row_block_dot(ds: Dataset, part: BlockPartition, i: int, v, l: int) -> float:
    """<row_i restricted to block l, v restricted to block l>.

    Touches only the stored nonzeros of row i that fall inside block l.
    """
    if not 0 <= i < ds.n:
        raise ValueError(f"row index {i} out of range")
    if len(v) != ds.d:
        raise ValueError("vector length mismatch")
    lo, hi = part.bounds(l)
    idx, vals = ds.row(i)
    s = np.searchsorted(idx, lo, side="left")
    e = np.searchsorted(idx, hi, side="left")
    if s == e:
        return 0.0
    return float(vals[s:e] @ v[idx[s:e]])


def parse_libsvm(text, d: int | None = None) -> Dataset:
    """Parse LibSVM text: one `label idx:val ...` line per sample.

    File indices are 1-based ascending; they are converted to 0-based here.
    `#` starts a comment. The feature dimension is the largest index seen,
    unless `d` widens it (narrowing is an error).
    """
    if isinstance(text, bytes):
        text = text.decode("ascii")
    if hasattr(text, "read"):
        text = text.read()
        if isinstance(text, bytes):
            text = text.decode("ascii")

    labels: list[float] = []
    indptr: list[int] = [0]
    indices: list[int] = []
    data: list[float] = []
    max_index = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            labels.append(float(parts[0]))
        except ValueError:
            raise ParseError(f"bad label {parts[0]!r}", lineno) from None
        prev = 0
        for tok in parts[1:]:
            try:
                idx_s, val_s = tok.split(":", 1)
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise ParseError(f"bad feature token {tok!r}", lineno) from None
            if idx < 1:
                raise ParseError(f"index {idx} < 1", lineno)
            if idx <= prev:
                raise ParseError(f"index {idx} not ascending", lineno)
            prev = idx
            indices.append(idx - 1)
            data.append(val)
        max_index = max(max_index, prev)
        indptr.append(len(indices))

    if not labels:
        raise ParseError("empty input")
    dim = max_index if max_index >= 1 else 1
    if d is not None:
        if d < dim:
            raise ParseError(f"given dimension {d} smaller than max index {dim}")
        dim = d
    return Dataset(indptr, indices, data, labels, dim)


def load_libsvm(path: str | os.PathLike, d: int | None = None) -> Dataset:
    """Read a LibSVM file; gzip-compressed input when the name ends in .gz."""
    path = os.fspath(path)
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rt") as fh:
        return parse_libsvm(fh.read(), d=d)


def format_libsvm(ds: Dataset) -> str:
    """Serialize back to LibSVM text (1-based indices); round-trips parse_libsvm."""
    lines = []
    for i in range(ds.n):
        idx, vals = ds.row(i)
        feats = " ".join(f"{int(j) + 1}:{float(v)!r}" for j, v in zip(idx, vals))
        lines.append(f"{float(ds.labels[i])!r} {feats}".rstrip())
    return "\n".join(lines) + "\n"


def shuffle_rows(ds: Dataset, seed: int) -> Dataset:
    """Seeded row permutation; returns a new Dataset."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    perm = rng.permutation(ds.n)
    indptr = [0]
    indices = []
    data = []
    for i in perm:
        idx, vals = ds.row(int(i))
        indices.append(idx)
        data.append(vals)
        indptr.append(indptr[-1] + len(idx))
    return Dataset(
        np.asarray(indptr),
        np.concatenate(indices) if indices else np.empty(0, dtype=np.int64),
        np.concatenate(data) if data else np.empty(0),
        ds.labels[perm],
        ds.d,
    )
