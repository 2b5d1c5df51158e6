"""Divergence-frontier scoring between two feature sets.

Pipeline: joint k-means quantization of both feature sets, smoothed bin
histograms, KL divergences of each histogram against mixtures
R_lambda = lambda*P + (1-lambda)*Q over a lambda grid, exponential scaling
into a frontier curve, and the area under that curve as the score in (0,1].

Everything is seeded and deterministic: k-means++ initialization, Lloyd
iterations with a fixed empty-cluster repair rule, and seeded subsampling
when a side exceeds the sample cap.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ValidationError
from .featurize import FeatureSet


@dataclass
class MauveConfig:
    k: int | None = None  # default: min(500, (|P|+|Q|) // 10), at least 2
    c: float = 5.0
    epsilon: float = 1e-6
    grid_size: int = 100
    seed: int = 0
    max_iter: int = 100
    sample_cap: int = 3000

    def __post_init__(self):
        if self.k is not None and self.k < 2:
            raise ValidationError(f"k must be >= 2, got {self.k}")
        if self.c <= 0:
            raise ValidationError(f"c must be > 0, got {self.c}")
        if self.grid_size < 3:
            raise ValidationError(f"grid_size must be >= 3, got {self.grid_size}")
        if self.epsilon <= 0:
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon}")
        if self.max_iter < 1 or self.sample_cap < 1:
            raise ValidationError("max_iter and sample_cap must be >= 1")

    def resolve_k(self, n_total: int) -> int:
        k = self.k if self.k is not None else max(2, min(500, n_total // 10))
        if k > n_total:
            warnings.warn(
                f"k={k} exceeds the {n_total} available rows; clamping to {n_total}"
            )
            k = n_total
        return k


@dataclass
class QuantizedPair:
    hist_p: np.ndarray
    hist_q: np.ndarray
    k: int
    assignment_seed: int

    def __post_init__(self):
        self.hist_p = np.asarray(self.hist_p, dtype=np.float64)
        self.hist_q = np.asarray(self.hist_q, dtype=np.float64)
        for name, h in (("hist_p", self.hist_p), ("hist_q", self.hist_q)):
            if h.shape != (self.k,):
                raise ValidationError(f"{name} must have {self.k} bins")
            if abs(float(h.sum()) - 1.0) > 1e-9:
                raise ValidationError(f"{name} does not sum to 1")
            if np.any(h <= 0):
                raise ValidationError(f"{name} has non-positive entries after smoothing")


@dataclass
class DivergenceCurve:
    points: list[tuple[float, float]]  # sorted by x; x from KL(Q||R), y from KL(P||R)
    c: float
    grid_size: int

    def __post_init__(self):
        for x, y in self.points:
            if not (0.0 < x <= 1.0 and 0.0 < y <= 1.0):
                raise ValidationError(f"curve point ({x}, {y}) outside (0, 1]")
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        if any(b - a < -1e-9 for a, b in zip(xs, xs[1:])):
            raise ValidationError("curve x coordinates are not non-decreasing")
        if any(b - a > 1e-9 for a, b in zip(ys, ys[1:])):
            raise ValidationError("curve y coordinates are not non-increasing")


def kl_divergence(p, q) -> float:
    """Sum of p_i * ln(p_i / q_i), with 0 * ln(0/q) = 0.  Returns nats."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise ValidationError("p and q must be 1-D vectors of equal length")
    if np.any(p < 0) or np.any(q < 0):
        raise ValidationError("probability vectors must be nonnegative")
    if abs(float(p.sum()) - 1.0) > 1e-6:
        raise ValidationError(f"p sums to {float(p.sum())}, expected 1")
    mask = p > 0
    if np.any(q[mask] == 0):
        raise ValidationError("q has a zero where p has positive mass")
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def _kmeans_plus_plus(x, k, rng):
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]), dtype=np.float64)
    centers[0] = x[int(rng.integers(n))]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centers[j] = x[idx]
        d2 = np.minimum(d2, ((x - centers[j]) ** 2).sum(axis=1))
    return centers


def _update_centers(x, labels, k):
    sums = np.zeros((k, x.shape[1]), dtype=np.float64)
    np.add.at(sums, labels, x)
    counts = np.bincount(labels, minlength=k)
    centers = np.zeros_like(sums)
    nonempty = counts > 0
    centers[nonempty] = sums[nonempty] / counts[nonempty, None]
    return centers, counts


def _repair_empty(x, labels, centers, counts):
    """Move each empty centroid onto the farthest member of the largest cluster."""
    taken: set[int] = set()
    for j in np.flatnonzero(counts == 0):
        largest = int(np.argmax(counts))
        members = np.flatnonzero(labels == largest)
        dists = ((x[members] - centers[largest]) ** 2).sum(axis=1)
        order = np.argsort(-dists, kind="stable")
        pick = next(int(members[i]) for i in order if int(members[i]) not in taken)
        taken.add(pick)
        centers[j] = x[pick]
    return centers


def _kmeans(x, k, rng, max_iter):
    x = np.ascontiguousarray(x, dtype=np.float64)
    centers = _kmeans_plus_plus(x, k, rng)
    labels = kernels.assign_labels(x, centers)
    for _ in range(max_iter):
        centers, counts = _update_centers(x, labels, k)
        if np.any(counts == 0):
            centers = _repair_empty(x, labels, centers, counts)
        new_labels = kernels.assign_labels(x, centers)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels


def _content_digest(vectors) -> str:
    import hashlib

    arr = np.ascontiguousarray(vectors, dtype=np.float64)
    return hashlib.sha256(repr(arr.shape).encode() + arr.tobytes()).hexdigest()


def quantize(features_p: FeatureSet, features_q: FeatureSet, cfg: MauveConfig | None = None) -> QuantizedPair:
    """Joint k-means over the union of rows, then per-side smoothed histograms.

    The two sides are ordered canonically (by content digest) before the
    seeded subsampling and clustering, so quantize(P, Q) and quantize(Q, P)
    produce exactly swapped histograms.
    """
    if cfg is None:
        cfg = MauveConfig()
    if len(features_p) == 0 or len(features_q) == 0:
        raise ValidationError("both feature sets must be non-empty")
    if features_p.dim != features_q.dim:
        raise ValidationError(
            f"dimension mismatch: {features_p.dim} vs {features_q.dim}"
        )
    swapped = _content_digest(features_q.vectors) < _content_digest(features_p.vectors)
    first, second = (features_q, features_p) if swapped else (features_p, features_q)

    rng = np.random.default_rng(cfg.seed)
    rows_a = _subsample(first.vectors, cfg.sample_cap, rng)
    rows_b = _subsample(second.vectors, cfg.sample_cap, rng)
    union = np.ascontiguousarray(np.vstack([rows_a, rows_b]))
    k = cfg.resolve_k(union.shape[0])
    labels = _kmeans(union, k, rng, cfg.max_iter)
    n_a = rows_a.shape[0]
    hist_a = _smoothed_histogram(labels[:n_a], k, cfg.epsilon)
    hist_b = _smoothed_histogram(labels[n_a:], k, cfg.epsilon)
    hist_p, hist_q = (hist_b, hist_a) if swapped else (hist_a, hist_b)
    return QuantizedPair(hist_p=hist_p, hist_q=hist_q, k=k, assignment_seed=cfg.seed)


def _subsample(vectors, cap, rng):
    if vectors.shape[0] <= cap:
        return vectors
    idx = np.sort(rng.choice(vectors.shape[0], size=cap, replace=False))
    return vectors[idx]


def _smoothed_histogram(labels, k, epsilon):
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    counts += epsilon
    return counts / counts.sum()


def divergence_frontier(pair: QuantizedPair, cfg: MauveConfig | None = None) -> DivergenceCurve:
    """Frontier points over a uniform open lambda grid, sorted by x."""
    if cfg is None:
        cfg = MauveConfig()
    points = []
    for j in range(1, cfg.grid_size + 1):
        lam = j / (cfg.grid_size + 1)
        r = lam * pair.hist_p + (1.0 - lam) * pair.hist_q
        # KL is nonnegative; clamp the tiny negative rounding when R ~ Q or P.
        x = math.exp(-cfg.c * max(0.0, kl_divergence(pair.hist_q, r)))
        y = math.exp(-cfg.c * max(0.0, kl_divergence(pair.hist_p, r)))
        points.append((x, y))
    points.sort()
    return DivergenceCurve(points=points, c=cfg.c, grid_size=cfg.grid_size)


def _trapezoid_area(points) -> float:
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y1 + y0) / 2.0
    return area


def curve_auc(curve: DivergenceCurve) -> float:
    """Area under the frontier, closed to the axes via anchors (0,1) and (1,0).

    Averages the areas computed against both axes, which makes the score
    exactly symmetric under swapping the two distributions.
    """
    pts = [(0.0, 1.0)] + list(curve.points) + [(1.0, 0.0)]
    reflected = sorted((y, x) for x, y in pts)
    area = 0.5 * (_trapezoid_area(pts) + _trapezoid_area(reflected))
    return min(max(area, 0.0), 1.0)


def mauve_score(features_p: FeatureSet, features_q: FeatureSet, cfg: MauveConfig | None = None) -> float:
    """Divergence-frontier area in (0, 1]; 1 means indistinguishable sets."""
    if cfg is None:
        cfg = MauveConfig()
    pair = quantize(features_p, features_q, cfg)
    curve = divergence_frontier(pair, cfg)
    return curve_auc(curve)


def _entropy(h) -> float:
    return float(-np.sum(h * np.log(h)))


def mauve_report(features_p: FeatureSet, features_q: FeatureSet, cfg: MauveConfig | None = None) -> dict:
    """Score plus diagnostics, as written by the CLI."""
    if cfg is None:
        cfg = MauveConfig()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        pair = quantize(features_p, features_q, cfg)
        curve = divergence_frontier(pair, cfg)
        score = curve_auc(curve)
    return {
        "score": score,
        "config": {
            "k": pair.k,
            "c": cfg.c,
            "epsilon": cfg.epsilon,
            "grid_size": cfg.grid_size,
            "seed": cfg.seed,
            "max_iter": cfg.max_iter,
            "sample_cap": cfg.sample_cap,
            "kernel_backend": kernels.BACKEND,
        },
        "diagnostics": {
            "hist_p_entropy_nats": _entropy(pair.hist_p),
            "hist_q_entropy_nats": _entropy(pair.hist_q),
            "n_p": len(features_p),
            "n_q": len(features_q),
        },
        "frontier": [[x, y] for x, y in curve.points],
        "warnings": [str(w.message) for w in caught],
    }
