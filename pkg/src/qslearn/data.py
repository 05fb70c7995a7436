"""Multilabel dataset ingestion, splits, and feature standardization.

Supported formats:

- ``libsvm_multilabel``: one example per line, ``l1,l2,... i:v i:v ...``
  with 0-based label indices and 1-based feature indices; an empty label
  field (line starting with whitespace or only features) means y = {}.
- ``csv``: header row, label columns ``y0..y{m-1}`` first, then features.

Paths ending in ``.gz`` are decompressed transparently.  Features are held
sparse (CSR) and densified on demand; bibtex-scale dimensions fit dense
n x d only marginally.
"""

from __future__ import annotations

import gzip
import io
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class DataFormatError(ValueError):
    """Malformed dataset file; message carries the offending line number."""


@dataclass
class MultilabelDataset:
    name: str
    features: sp.csr_matrix
    labels: list  # bit tuples of width m
    m: int

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def dense_features(self) -> np.ndarray:
        return np.asarray(self.features.todense(), dtype=float)

    def subset(self, idx) -> "MultilabelDataset":
        idx = np.asarray(idx, dtype=int)
        return MultilabelDataset(
            self.name, self.features[idx], [self.labels[i] for i in idx], self.m
        )


def _open_text(path: str):
    if str(path).endswith(".gz"):
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def parse_multilabel(
    path: str, m: int, fmt: str = "libsvm_multilabel", d: int | None = None, name: str = ""
) -> MultilabelDataset:
    """Parse a dataset file; never silently drops lines.

    Blank lines and ``#`` comments are skipped; every other line must parse
    or a DataFormatError naming the line is raised.
    """
    if fmt == "libsvm_multilabel":
        return _parse_libsvm(path, m, d, name or str(path))
    if fmt == "csv":
        return _parse_csv(path, m, name or str(path))
    raise ValueError(f"unknown dataset format {fmt!r}")


def _parse_libsvm(path: str, m: int, d: int | None, name: str) -> MultilabelDataset:
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    labels: list[tuple] = []
    max_feat = 0
    with _open_text(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            stripped = raw.strip()
            if not stripped or stripped.startswith("#"):
                continue
            label_part, _, feat_part = raw.partition(" ") if not raw.startswith(" ") else ("", "", raw)
            row = len(labels)
            bits = [0] * m
            if label_part.strip():
                for tok in label_part.strip().split(","):
                    try:
                        idx = int(tok)
                    except ValueError as exc:
                        raise DataFormatError(f"line {lineno}: bad label token {tok!r}") from exc
                    if not 0 <= idx < m:
                        raise DataFormatError(f"line {lineno}: label {idx} out of range [0, {m})")
                    bits[idx] = 1
            labels.append(tuple(bits))
            for tok in feat_part.split():
                idx_s, _, val_s = tok.partition(":")
                try:
                    feat = int(idx_s)
                    val = float(val_s)
                except ValueError as exc:
                    raise DataFormatError(f"line {lineno}: bad feature token {tok!r}") from exc
                if feat < 1:
                    raise DataFormatError(f"line {lineno}: feature index {feat} must be >= 1")
                rows.append(row)
                cols.append(feat - 1)
                vals.append(val)
                max_feat = max(max_feat, feat)
    n = len(labels)
    if n == 0:
        raise DataFormatError("no examples in file")
    width = d if d is not None else max_feat
    if max_feat > width:
        raise DataFormatError(f"feature index {max_feat} exceeds declared dimension {width}")
    features = sp.csr_matrix(
        (vals, (rows, cols)), shape=(n, width), dtype=float
    )
    return MultilabelDataset(name, features, labels, m)


def _parse_csv(path: str, m: int, name: str) -> MultilabelDataset:
    with _open_text(path) as fh:
        header = fh.readline()
        if not header.strip():
            raise DataFormatError("line 1: missing header")
        n_cols = len(header.strip().split(","))
        if n_cols <= m:
            raise DataFormatError(f"header has {n_cols} columns, need more than m={m}")
        d = n_cols - m
        labels = []
        dense_rows = []
        for lineno, raw in enumerate(fh, start=2):
            if not raw.strip():
                continue
            parts = raw.strip().split(",")
            if len(parts) != n_cols:
                raise DataFormatError(
                    f"line {lineno}: {len(parts)} columns, expected {n_cols}"
                )
            try:
                bits = tuple(int(float(p)) for p in parts[:m])
                feats = [float(p) for p in parts[m:]]
            except ValueError as exc:
                raise DataFormatError(f"line {lineno}: bad value") from exc
            if any(b not in (0, 1) for b in bits):
                raise DataFormatError(f"line {lineno}: labels must be 0/1")
            labels.append(bits)
            dense_rows.append(feats)
    if not labels:
        raise DataFormatError("no examples in file")
    features = sp.csr_matrix(np.asarray(dense_rows, dtype=float))
    return MultilabelDataset(name, features, labels, m)


def write_libsvm(dataset: MultilabelDataset, path: str) -> None:
    """Inverse of the libsvm parser (used for round-trip checks)."""
    coo = dataset.features.tocoo()
    per_row: dict[int, list[tuple[int, float]]] = {}
    for r, c, v in zip(coo.row, coo.col, coo.data):
        per_row.setdefault(int(r), []).append((int(c), float(v)))
    with open(path, "w", encoding="utf-8") as fh:
        for i, bits in enumerate(dataset.labels):
            lab = ",".join(str(j) for j, b in enumerate(bits) if b)
            feats = " ".join(
                f"{c + 1}:{v:.17g}" for c, v in sorted(per_row.get(i, []))
            )
            fh.write(f"{lab} {feats}".rstrip() + "\n")


def split(
    dataset: MultilabelDataset,
    fractions: tuple[float, float, float] = (0.6, 0.2, 0.2),
    seed: int = 0,
):
    """Disjoint (train, val, test) cover; rounding remainder goes to train."""
    if any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must be nonnegative and sum to 1")
    n = dataset.n
    n_val = round(fractions[1] * n)
    n_test = round(fractions[2] * n)
    n_train = n - n_val - n_test
    if n_train < 0:
        raise ValueError("fractions leave no training data")
    perm = np.random.default_rng(seed).permutation(n)
    tr = perm[:n_train]
    va = perm[n_train : n_train + n_val]
    te = perm[n_train + n_val :]
    return dataset.subset(tr), dataset.subset(va), dataset.subset(te)


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray  # zero-variance columns carry scale 0 and map to 0

    def apply(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=float)
        inv = np.zeros_like(self.scale)
        np.divide(1.0, self.scale, out=inv, where=self.scale > 0)
        return (x - self.mean) * inv


def standardize(train_features) -> Standardizer:
    """Per-column mean-0 / std-1 transform computed from training rows only."""
    x = np.asarray(train_features, dtype=float)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    return Standardizer(mean, std)
