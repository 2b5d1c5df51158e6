"""Frechet distance between Gaussian fits of two feature populations.

d^2 = ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^{1/2} S_b S_a^{1/2})^{1/2})

The cross term uses the symmetric congruence form, which has the same trace
as (S_a S_b)^{1/2} while keeping every eigenproblem symmetric.  Reported as
the squared distance, matching the usual FID convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .featurize import FeatureSet

SYMMETRY_TOL = 1e-10
PSD_EIG_TOL = -1e-8
TRACE_NOISE_FLOOR = -1e-6


def _check_symmetric(m: np.ndarray, tol: float) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max())) if m.size else 1.0
    asym = float(np.abs(m - m.T).max()) if m.size else 0.0
    if asym > tol * scale:
        raise ValidationError(f"matrix asymmetry {asym:.3e} exceeds tolerance")


@dataclass
class GaussianStats:
    mean: np.ndarray
    cov: np.ndarray
    n: int

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        self.cov = np.asarray(self.cov, dtype=np.float64)
        if self.n < 2:
            raise ValidationError(f"need at least 2 samples, got {self.n}")
        _check_symmetric(self.cov, SYMMETRY_TOL)
        if self.cov.shape[0] != self.mean.shape[0]:
            raise ValidationError("mean and covariance dimensions disagree")
        min_eig = float(np.linalg.eigvalsh(self.cov).min())
        if min_eig < PSD_EIG_TOL:
            raise ValidationError(
                f"covariance has eigenvalue {min_eig:.3e} below the PSD tolerance"
            )

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def gaussian_stats(features: FeatureSet) -> GaussianStats:
    """Column means and unbiased (n-1) sample covariance, symmetrized."""
    x = features.vectors
    n = x.shape[0]
    if n < 2:
        raise ValidationError(f"need at least 2 feature rows, got {n}")
    mean = x.mean(axis=0)
    cov = np.atleast_2d(np.cov(x, rowvar=False, ddof=1))
    cov = (cov + cov.T) / 2.0
    return GaussianStats(mean=mean, cov=cov, n=n)


def matrix_sqrt_psd(m) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition, eigenvalues clipped at 0."""
    m = np.asarray(m, dtype=np.float64)
    _check_symmetric(m, SYMMETRY_TOL)
    sym = (m + m.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(sym)
    eigvals = np.clip(eigvals, 0.0, None)
    root = (eigvecs * np.sqrt(eigvals)) @ eigvecs.T
    return (root + root.T) / 2.0


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    """Squared Frechet distance between two Gaussian fits."""
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")
    diff = a.mean - b.mean
    a_half = matrix_sqrt_psd(a.cov)
    inner = a_half @ b.cov @ a_half
    cross = matrix_sqrt_psd((inner + inner.T) / 2.0)
    trace_term = float(np.trace(a.cov) + np.trace(b.cov) - 2.0 * np.trace(cross))
    if trace_term < 0.0:
        if trace_term < TRACE_NOISE_FLOOR:
            raise ValidationError(
                f"trace term {trace_term:.3e} is negative beyond numerical noise"
            )
        trace_term = 0.0
    return float(diff @ diff) + trace_term
