"""Per-sequence degeneration metrics: rep-n, distinct-n, and their
diversity composite, plus corpus-level aggregation.

rep-n = 1 - unique/total over overlapping n-grams of one sequence;
distinct-n = unique n-grams / token count; diversity = prod(1 - rep-n)
for n = 2..4.  Corpus aggregation is the arithmetic mean of per-document
values; a pooled mode that counts n-grams across the whole corpus is
available for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._util import parallel_map
from .corpus import Corpus, TokenSequence, tokenize
from .errors import UndefinedMetricError, ValidationError

DIVERSITY_NS = (2, 3, 4)


def _as_tokens(tokens) -> tuple[str, ...]:
    if isinstance(tokens, TokenSequence):
        return tokens.tokens
    return tuple(tokens)


def _token_ids(tokens: tuple[str, ...]) -> np.ndarray:
    mapping: dict[str, int] = {}
    ids = np.empty(len(tokens), dtype=np.int64)
    for i, tok in enumerate(tokens):
        ids[i] = mapping.setdefault(tok, len(mapping))
    return ids


def rep_n(tokens, n: int) -> float:
    """Repeated n-gram ratio; 0 when the sequence has no n-grams."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    ids = _token_ids(_as_tokens(tokens))
    unique, total = kernels.ngram_unique_total(ids, n)
    if total == 0:
        return 0.0
    return 1.0 - unique / total


def distinct_n(tokens, n: int) -> float:
    """Unique n-grams divided by token count."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    toks = _as_tokens(tokens)
    if not toks:
        raise UndefinedMetricError("distinct-n is undefined for an empty sequence")
    unique, _ = kernels.ngram_unique_total(_token_ids(toks), n)
    return unique / len(toks)


def diversity(tokens) -> float:
    """Product of (1 - rep-n) for n = 2..4."""
    toks = _as_tokens(tokens)
    result = 1.0
    for n in DIVERSITY_NS:
        result *= 1.0 - rep_n(toks, n)
    return result


@dataclass
class DegenerationReport:
    per_document: dict[str, dict[str, float]]
    corpus_mean: dict[str, float]
    n_values: list[int]
    warnings: list[str] = field(default_factory=list)
    pooled: dict[str, float] | None = None

    def to_dict(self) -> dict:
        out = {
            "n_values": self.n_values,
            "per_document": self.per_document,
            "corpus_mean": self.corpus_mean,
            "warnings": self.warnings,
        }
        if self.pooled is not None:
            out["pooled"] = self.pooled
        return out


def _document_metrics(tokens, n_values) -> dict[str, float]:
    ids = _token_ids(tokens)
    metrics: dict[str, float] = {}
    reps: dict[int, float] = {}
    for n in sorted(set(n_values) | set(DIVERSITY_NS) | {2}):
        unique, total = kernels.ngram_unique_total(ids, n)
        reps[n] = 0.0 if total == 0 else 1.0 - unique / total
        if n == 2:
            metrics["distinct_2"] = unique / len(tokens)
    for n in n_values:
        metrics[f"rep_{n}"] = reps[n]
    metrics["diversity"] = (1.0 - reps[2]) * (1.0 - reps[3]) * (1.0 - reps[4])
    return metrics


def corpus_degeneration(
    corpus: Corpus,
    scheme: str = "unicode-scalar",
    n_values=(2, 3, 4),
    pooled: bool = False,
    threads: int = 1,
) -> DegenerationReport:
    """Per-document metrics plus their arithmetic mean.

    Empty documents are skipped and listed in the warnings field; an empty
    corpus (or one with only empty documents) is an error.
    """
    if len(corpus) == 0:
        raise ValidationError("cannot compute degeneration metrics on an empty corpus")
    n_values = [int(n) for n in n_values]
    if any(n < 1 for n in n_values):
        raise ValidationError(f"n values must be >= 1, got {n_values}")

    token_lists = parallel_map(
        lambda d: tokenize(d.effective_text(), scheme).tokens, corpus.documents, threads
    )
    warnings: list[str] = []
    per_document: dict[str, dict[str, float]] = {}
    kept_tokens: list[tuple[str, ...]] = []
    for doc, toks in zip(corpus.documents, token_lists):
        if len(toks) == 0:
            warnings.append(f"document {doc.id!r} is empty; skipped")
            continue
        per_document[doc.id] = _document_metrics(toks, n_values)
        kept_tokens.append(toks)
    if not per_document:
        raise ValidationError("no non-empty documents to compute metrics on")

    keys = next(iter(per_document.values())).keys()
    count = len(per_document)
    corpus_mean = {
        key: sum(m[key] for m in per_document.values()) / count for key in keys
    }

    pooled_metrics = _pooled_metrics(kept_tokens, n_values) if pooled else None
    return DegenerationReport(per_document, corpus_mean, n_values, warnings, pooled_metrics)


def _pooled_metrics(token_lists, n_values) -> dict[str, float]:
    """Corpus-level n-gram counting: windows never cross document boundaries."""
    mapping: dict[str, int] = {}
    id_arrays = []
    total_tokens = 0
    for toks in token_lists:
        ids = np.empty(len(toks), dtype=np.int64)
        for i, tok in enumerate(toks):
            ids[i] = mapping.setdefault(tok, len(mapping))
        id_arrays.append(ids)
        total_tokens += len(toks)

    metrics: dict[str, float] = {}
    reps: dict[int, float] = {}
    for n in sorted(set(n_values) | set(DIVERSITY_NS) | {2}):
        windows = [
            np.lib.stride_tricks.sliding_window_view(ids, n)
            for ids in id_arrays
            if ids.shape[0] >= n
        ]
        total = sum(w.shape[0] for w in windows)
        if total == 0:
            reps[n] = 0.0
            unique = 0
        else:
            unique = np.unique(np.vstack(windows), axis=0).shape[0]
            reps[n] = 1.0 - unique / total
        if n == 2:
            metrics["distinct_2"] = unique / total_tokens
    for n in n_values:
        metrics[f"rep_{n}"] = reps[n]
    metrics["diversity"] = (1.0 - reps[2]) * (1.0 - reps[3]) * (1.0 - reps[4])
    return metrics
