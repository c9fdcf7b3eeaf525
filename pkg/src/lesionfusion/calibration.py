"""Equal-error-rate thresholds, the fusion coefficient, and stratified folds."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .dataset_io import GroundTruthRecord, Label
from .errors import BadK, DegenerateLabels, InvalidConfig, IoFailure, ZeroSkThreshold


@dataclass
class Calibration:
    c_mm_tilde: float
    c_sk: float
    alpha: float
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.alpha >= 0:
            raise InvalidConfig(f"alpha must be >= 0, got {self.alpha}")

    @classmethod
    def manual(cls, c_mm_tilde: float, c_sk: float, alpha: Optional[float] = None) -> "Calibration":
        """Calibration from explicit values; ``alpha`` defaults to the ratio."""
        derived = alpha is None
        if derived:
            if c_sk <= 0:
                raise ZeroSkThreshold("c_sk must be positive to form alpha")
            alpha = c_mm_tilde / c_sk
        return cls(c_mm_tilde, c_sk, alpha, {"source": "manual", "alpha_derived": derived})

    def to_dict(self) -> dict:
        return {
            "c_mm_tilde": self.c_mm_tilde,
            "c_sk": self.c_sk,
            "alpha": self.alpha,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Calibration":
        try:
            return cls(float(d["c_mm_tilde"]), float(d["c_sk"]), float(d["alpha"]),
                       dict(d.get("provenance", {})))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfig(f"bad calibration record: {exc}") from None

    def write(self, path) -> None:
        try:
            Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
                                  encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"{path}: {exc}") from exc

    @classmethod
    def read(cls, path) -> "Calibration":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except OSError as exc:
            raise IoFailure(f"{path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"{path}: {exc}") from None


def candidate_thresholds(scores: np.ndarray) -> np.ndarray:
    """Midpoints between consecutive distinct scores, plus one below the
    minimum and one above the maximum.

    The outer candidates are midpoints towards the [0, 1] score bounds, or
    half a unit beyond the extreme score when it already sits on a bound.
    """
    u = np.unique(scores)
    low = u[0] / 2.0 if u[0] > 0 else u[0] - 0.5
    high = (u[-1] + 1.0) / 2.0 if u[-1] < 1 else u[-1] + 0.5
    return np.r_[low, (u[1:] + u[:-1]) / 2.0, high]


def error_counts(scores, labels, thresholds):
    """False-positive and false-negative counts for each threshold."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    pos = np.sort(scores[labels])
    neg = np.sort(scores[~labels])
    fn = np.searchsorted(pos, thresholds, side="left")
    fp = neg.size - np.searchsorted(neg, thresholds, side="left")
    return fp, fn


def eer_threshold(pairs: Iterable[tuple[float, bool]]) -> tuple[float, float]:
    """Equal-error-rate operating point.

    Scans :func:`candidate_thresholds` with the rule ``score >= t`` means
    positive and keeps the candidate with the smallest ``|FPR - FNR|``,
    then the smallest ``FPR + FNR``, then the smallest ``t``. Comparisons
    run on integer cross-multiplied counts, so ties are exact.

    Returns
    -------
    threshold : float
    eer : float
        ``(FPR + FNR) / 2`` at the chosen threshold.
    """
    pairs = list(pairs)
    scores = np.array([float(s) for s, _ in pairs], dtype=np.float64)
    labels = np.array([bool(y) for _, y in pairs], dtype=bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels(f"EER needs both classes, got {n_pos} positive of {labels.size}")

    cands = candidate_thresholds(scores)
    fp, fn = error_counts(scores, labels, cands)
    # FPR - FNR and FPR + FNR scaled by n_pos * n_neg
    gap = np.abs(fp * n_pos - fn * n_neg)
    total = fp * n_pos + fn * n_neg
    best = np.lexsort((cands, total, gap))[0]
    fpr = fp[best] / n_neg
    fnr = fn[best] / n_pos
    return float(cands[best]), float((fpr + fnr) / 2.0)


def pairs_digest(pairs) -> str:
    h = hashlib.sha256()
    for s, y in sorted((float(s), bool(y)) for s, y in pairs):
        h.update(f"{s!r},{int(y)};".encode())
    return h.hexdigest()


def derive_calibration(mm_pairs, sk_pairs, fold_spec: Optional[dict] = None) -> Calibration:
    """EER thresholds for both base classifiers and ``alpha = c_mm / c_sk``."""
    mm_pairs = list(mm_pairs)
    sk_pairs = list(sk_pairs)
    c_mm, eer_mm = eer_threshold(mm_pairs)
    c_sk, eer_sk = eer_threshold(sk_pairs)
    if c_sk <= 0:
        raise ZeroSkThreshold(f"SK threshold {c_sk} is not positive; alpha undefined")
    provenance = {
        "source": "derived",
        "mm_sha256": pairs_digest(mm_pairs),
        "sk_sha256": pairs_digest(sk_pairs),
        "n_mm": len(mm_pairs),
        "n_sk": len(sk_pairs),
        "eer_mm": eer_mm,
        "eer_sk": eer_sk,
        "folds": fold_spec,
    }
    return Calibration(c_mm, c_sk, c_mm / c_sk, provenance)


@dataclass
class FoldAssignment:
    k: int
    assignment: dict[str, int]

    def fold_ids(self, fold: int) -> list[str]:
        return sorted(i for i, f in self.assignment.items() if f == fold)


def stratified_kfold(truth: Sequence[GroundTruthRecord], k: int, seed: int = 0) -> FoldAssignment:
    """Deal each class round-robin over ``k`` folds after a seeded shuffle.

    Classes are processed in MM, SK, NCN order and the dealer carries on
    from where the previous class stopped, so overall fold sizes also
    differ by at most one.
    """
    if int(k) != k or k < 2:
        raise BadK(f"k must be an integer >= 2, got {k}")
    k = int(k)
    rng = np.random.default_rng(int(seed))
    by_class: dict[Label, list[str]] = {label: [] for label in Label}
    for r in truth:
        by_class[r.label].append(r.id)

    assignment: dict[str, int] = {}
    dealt = 0
    for label in Label:
        ids = sorted(by_class[label])
        for pos in rng.permutation(len(ids)):
            assignment[ids[pos]] = dealt % k
            dealt += 1
    return FoldAssignment(k, assignment)
