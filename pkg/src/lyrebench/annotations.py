"""Human-review response handling: quality filtering, 0-10 score
normalization, per-sample aggregation, and Krippendorff's alpha.

Per-sample spread uses the population standard deviation (each sample has
only a handful of raters, typically 3); the convention is echoed in report
metadata.  Alpha is computed per attribute from the coincidence matrix over
units with at least two raters, with the ordinal distance
delta^2(c, k) = (sum_{g=c..k} n_g - (n_c + n_k)/2)^2 over value marginals.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from statistics import fmean, pstdev

import numpy as np

from .errors import ValidationError

ATTRIBUTES = ("coherence", "creativity", "affinity", "recognition")


@dataclass(frozen=True)
class Response:
    worker_id: str
    sample_id: str
    attribute: str
    raw_value: int
    level_count: int
    summary_text: str | None = None
    literacy_pass: bool = True

    def __post_init__(self):
        if self.attribute not in ATTRIBUTES:
            raise ValidationError(
                f"unknown attribute {self.attribute!r}; expected one of {ATTRIBUTES}"
            )
        if self.level_count < 2:
            raise ValidationError(f"level_count must be >= 2, got {self.level_count}")
        if not 0 <= self.raw_value < self.level_count:
            raise ValidationError(
                f"raw_value {self.raw_value} outside [0, {self.level_count})"
            )


@dataclass
class AnnotationSet:
    responses: list[Response]
    samples: frozenset[str] = frozenset()
    expected_raters_per_sample: int = 3

    def __post_init__(self):
        if not self.samples:
            self.samples = frozenset(r.sample_id for r in self.responses)
        else:
            self.samples = frozenset(self.samples)
            for r in self.responses:
                if r.sample_id not in self.samples:
                    raise ValidationError(
                        f"response references unknown sample {r.sample_id!r}"
                    )

    def __len__(self):
        return len(self.responses)


@dataclass
class AgreementReport:
    per_attribute: dict[str, dict[str, float | None]]
    filtered_count: int
    retained_count: int
    warnings: list[str] = field(default_factory=list)
    std_convention: str = "population"

    def to_dict(self) -> dict:
        return {
            "per_attribute": self.per_attribute,
            "filtered_count": self.filtered_count,
            "retained_count": self.retained_count,
            "warnings": self.warnings,
            "std_convention": self.std_convention,
        }


def load_responses(path, expected_raters_per_sample: int = 3) -> AnnotationSet:
    """Read the responses CSV (worker_id,sample_id,attribute,raw_value,
    level_count,summary,literacy_pass)."""
    responses: list[Response] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {
            "worker_id", "sample_id", "attribute",
            "raw_value", "level_count", "summary", "literacy_pass",
        }
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            missing = sorted(required - set(reader.fieldnames or ()))
            raise ValidationError(f"responses CSV missing columns: {missing}")
        for lineno, row in enumerate(reader, start=2):
            try:
                responses.append(
                    Response(
                        worker_id=row["worker_id"],
                        sample_id=row["sample_id"],
                        attribute=row["attribute"],
                        raw_value=int(row["raw_value"]),
                        level_count=int(row["level_count"]),
                        summary_text=row["summary"],
                        literacy_pass=_parse_bool(row["literacy_pass"]),
                    )
                )
            except (ValueError, ValidationError) as exc:
                raise ValidationError(f"line {lineno}: {exc}") from exc
    return AnnotationSet(responses, expected_raters_per_sample=expected_raters_per_sample)


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"cannot parse boolean {value!r}")


def filter_responses(aset: AnnotationSet) -> AnnotationSet:
    """Drop every (worker, sample) group that failed the literacy check or
    gave no non-blank summary.  Idempotent."""
    groups: dict[tuple[str, str], list[Response]] = defaultdict(list)
    for r in aset.responses:
        groups[(r.worker_id, r.sample_id)].append(r)
    kept: list[Response] = []
    for r in aset.responses:
        group = groups[(r.worker_id, r.sample_id)]
        if any(not g.literacy_pass for g in group):
            continue
        if not any(g.summary_text and g.summary_text.strip() for g in group):
            continue
        kept.append(r)
    return AnnotationSet(
        kept, samples=aset.samples,
        expected_raters_per_sample=aset.expected_raters_per_sample,
    )


def normalize_score(raw_value: int, level_count: int) -> float:
    """Linear map of a 0-based level index onto [0, 10]."""
    if level_count < 2:
        raise ValidationError(f"level_count must be >= 2, got {level_count}")
    if not 0 <= raw_value < level_count:
        raise ValidationError(f"raw_value {raw_value} outside [0, {level_count})")
    return raw_value / (level_count - 1) * 10.0


def aggregate(aset: AnnotationSet, filtered_count: int = 0) -> AgreementReport:
    """Per-attribute mean of per-sample means and mean of per-sample
    population stds.  Samples with a single rater count toward the mean but
    are excluded from the std aggregate (and flagged)."""
    by_attr_sample: dict[str, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    for r in aset.responses:
        score = normalize_score(r.raw_value, r.level_count)
        by_attr_sample[r.attribute][r.sample_id].append(score)

    per_attribute: dict[str, dict[str, float | None]] = {}
    warnings: list[str] = []
    for attr in sorted(by_attr_sample):
        sample_means = []
        sample_stds = []
        for sample_id in sorted(by_attr_sample[attr]):
            scores = by_attr_sample[attr][sample_id]
            sample_means.append(fmean(scores))
            if len(scores) >= 2:
                sample_stds.append(pstdev(scores))
            else:
                warnings.append(
                    f"sample {sample_id!r} has a single rater for {attr}; "
                    "excluded from std aggregation"
                )
        per_attribute[attr] = {
            "mean": fmean(sample_means),
            "mean_std": fmean(sample_stds) if sample_stds else None,
            "alpha": None,
        }
    return AgreementReport(
        per_attribute=per_attribute,
        filtered_count=filtered_count,
        retained_count=len(aset.responses),
        warnings=warnings,
    )


def _ordinal_delta_sq(marginals: np.ndarray) -> np.ndarray:
    """delta^2(c, k) from coincidence-matrix value marginals."""
    levels = marginals.shape[0]
    cum = np.concatenate([[0.0], np.cumsum(marginals)])
    delta = np.zeros((levels, levels))
    for c in range(levels):
        for k in range(c + 1, levels):
            between = cum[k + 1] - cum[c]
            delta[c, k] = delta[k, c] = (between - (marginals[c] + marginals[k]) / 2.0) ** 2
    return delta


def krippendorff_alpha(aset: AnnotationSet, attribute: str, metric: str = "ordinal"):
    """Chance-corrected agreement for one attribute; None when undefined.

    Missing responses are simply absent; units with fewer than two raters
    contribute nothing.  Returns None when there are fewer than two pairable
    values or no value variation (expected disagreement zero).
    """
    if attribute not in ATTRIBUTES:
        raise ValidationError(f"unknown attribute {attribute!r}")
    if metric not in ("ordinal", "nominal", "interval"):
        raise ValidationError(f"unknown metric {metric!r}")

    relevant = [r for r in aset.responses if r.attribute == attribute]
    if not relevant:
        return None
    level_counts = {r.level_count for r in relevant}
    if len(level_counts) != 1:
        raise ValidationError(
            f"inconsistent level_count for {attribute}: {sorted(level_counts)}"
        )
    levels = level_counts.pop()

    units: dict[str, list[int]] = defaultdict(list)
    for r in relevant:
        units[r.sample_id].append(r.raw_value)

    coincidence = np.zeros((levels, levels))
    for values in units.values():
        m = len(values)
        if m < 2:
            continue
        for i in range(m):
            for j in range(m):
                if i != j:
                    coincidence[values[i], values[j]] += 1.0 / (m - 1)

    marginals = coincidence.sum(axis=1)
    n = float(marginals.sum())
    if n < 2:
        return None

    if metric == "ordinal":
        delta = _ordinal_delta_sq(marginals)
    elif metric == "nominal":
        delta = 1.0 - np.eye(levels)
    else:
        idx = np.arange(levels, dtype=np.float64)
        delta = (idx[:, None] - idx[None, :]) ** 2

    observed = float((coincidence * delta).sum())
    expected = float((np.outer(marginals, marginals) * delta).sum())
    if expected == 0.0:
        return None
    return 1.0 - (n - 1.0) * observed / expected


def agreement_report(aset: AnnotationSet, metric: str = "ordinal") -> AgreementReport:
    """Filter, aggregate, and attach per-attribute alpha in one pass."""
    filtered = filter_responses(aset)
    report = aggregate(filtered, filtered_count=len(aset) - len(filtered))
    for attr in report.per_attribute:
        report.per_attribute[attr]["alpha"] = krippendorff_alpha(filtered, attr, metric)
    return report
