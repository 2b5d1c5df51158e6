"""Fixed-dimension text features: a deterministic hashed character-n-gram
featurizer, plus file loading for externally computed embeddings.

Hashing scheme (pinned; test vectors in tests/test_featurize.py and README):
FNV-1a 64-bit over the byte stream
    seed as 8 little-endian bytes, n as 1 byte, then each codepoint of the
    n-gram as 4 little-endian bytes
with offset basis 14695981039346656037 and prime 1099511628211; the bucket
is the final hash modulo dim.  Platform-dependent hashing is never used.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from ._util import parallel_map
from .corpus import Corpus
from .errors import ValidationError


@dataclass
class FeatureSet:
    ids: tuple[str, ...]
    vectors: np.ndarray
    dim: int
    origin: str  # "hashed-ngram" or "external"

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2:
            raise ValidationError("vectors must be a 2-D matrix")
        if self.vectors.shape[0] != len(self.ids):
            raise ValidationError(
                f"{len(self.ids)} ids but {self.vectors.shape[0]} vector rows"
            )
        if self.vectors.shape[1] != self.dim:
            raise ValidationError(
                f"declared dim {self.dim} but vectors have {self.vectors.shape[1]} columns"
            )
        if not np.all(np.isfinite(self.vectors)):
            raise ValidationError("feature vectors contain non-finite values")
        if len(set(self.ids)) != len(self.ids):
            raise ValidationError("feature ids are not unique")

    def __len__(self):
        return len(self.ids)


def _featurize_text(text: str, n_lo: int, n_hi: int, dim: int, max_length: int, seed: int):
    tokens = text[:max_length]
    codes = np.array([ord(ch) for ch in tokens], dtype=np.uint32)
    counts = kernels.char_ngram_bucket_counts(codes, n_lo, n_hi, dim, seed)
    norm = math.sqrt(float(counts @ counts))
    if norm > 0.0:
        counts = counts / norm
    return counts


def hashed_ngram_features(
    corpus: Corpus,
    n_range=(1, 3),
    dim: int = 1024,
    max_length: int = 128,
    seed: int = 0,
    threads: int = 1,
) -> FeatureSet:
    """L2-normalized hashed char-n-gram term frequencies per document.

    Texts are truncated to max_length unicode scalars; an empty text maps to
    the zero vector.  Deterministic for fixed (text, n_range, dim, seed).
    """
    n_lo, n_hi = int(n_range[0]), int(n_range[1])
    if not 1 <= n_lo <= n_hi <= 255:
        raise ValidationError(f"invalid n_range {n_range!r}")
    if dim < 2:
        raise ValidationError(f"dim must be >= 2, got {dim}")
    if max_length < 1:
        raise ValidationError(f"max_length must be >= 1, got {max_length}")
    if int(seed) < 0:
        raise ValidationError(f"seed must be nonnegative, got {seed}")
    rows = parallel_map(
        lambda d: _featurize_text(d.effective_text(), n_lo, n_hi, dim, max_length, seed),
        corpus.documents,
        threads,
    )
    ids = tuple(doc.id for doc in corpus)
    vectors = np.vstack(rows) if rows else np.zeros((0, dim))
    return FeatureSet(ids=ids, vectors=vectors, dim=dim, origin="hashed-ngram")


def load_features(path) -> FeatureSet:
    """Read a feature file (CSV with id,f0..fN header, or JSONL {id, vector})."""
    path = Path(path)
    if path.suffix.lower() in (".jsonl", ".ndjson"):
        return _load_jsonl_features(path)
    return _load_csv_features(path)


def _check_finite(values, row_index):
    for j, v in enumerate(values):
        if not math.isfinite(v):
            raise ValidationError(f"non-finite value at row {row_index}, column f{j}")


def _load_csv_features(path: Path) -> FeatureSet:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path} is empty") from None
        if not header or header[0] != "id":
            raise ValidationError(f"{path}: first column of the header must be 'id'")
        dim = len(header) - 1
        if dim < 1:
            raise ValidationError(f"{path}: no feature columns found")
        ids: list[str] = []
        rows: list[list[float]] = []
        for i, record in enumerate(reader, start=1):
            if len(record) - 1 != dim:
                raise ValidationError(
                    f"row {i} has {len(record) - 1} values, expected {dim}"
                )
            try:
                values = [float(v) for v in record[1:]]
            except ValueError as exc:
                raise ValidationError(f"row {i}: {exc}") from exc
            _check_finite(values, i)
            ids.append(record[0])
            rows.append(values)
    vectors = np.asarray(rows, dtype=np.float64) if rows else np.zeros((0, dim))
    return FeatureSet(ids=tuple(ids), vectors=vectors, dim=dim, origin="external")


def _load_jsonl_features(path: Path) -> FeatureSet:
    ids: list[str] = []
    rows: list[list[float]] = []
    dim = None
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"malformed JSON on row {i}: {exc}") from exc
            if "id" not in record or "vector" not in record:
                raise ValidationError(f"row {i} must have 'id' and 'vector' keys")
            values = [float(v) for v in record["vector"]]
            if dim is None:
                dim = len(values)
                if dim < 1:
                    raise ValidationError(f"row {i} has an empty vector")
            elif len(values) != dim:
                raise ValidationError(f"row {i} has {len(values)} values, expected {dim}")
            _check_finite(values, i)
            ids.append(str(record["id"]))
            rows.append(values)
    if dim is None:
        raise ValidationError(f"{path} contains no feature records")
    return FeatureSet(ids=tuple(ids), vectors=np.asarray(rows), dim=dim, origin="external")


def save_features(features: FeatureSet, path) -> None:
    """Write CSV (default) or JSONL depending on the file extension."""
    path = Path(path)
    if path.suffix.lower() in (".jsonl", ".ndjson"):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for doc_id, row in zip(features.ids, features.vectors):
                fh.write(
                    json.dumps({"id": doc_id, "vector": [float(v) for v in row]})
                    + "\n"
                )
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id"] + [f"f{j}" for j in range(features.dim)])
        for doc_id, row in zip(features.ids, features.vectors):
            writer.writerow([doc_id] + [repr(float(v)) for v in row])
