"""ROC curves, AUC, average precision and the challenge ranking metric.

Inputs are sequences of ``(score, is_positive)`` pairs. Where ranking ties
must be broken (average precision) the input order is used, so pass pairs
sorted by lesion id, as :func:`lesionfusion.dataset_io.align` returns them.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DegenerateLabels, IoFailure, NoPositives

AP_DEFINITION = "stepwise"


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    # thresholds[i] belongs to point i + 1; point 0 is the (0, 0) origin
    thresholds: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


@dataclass
class EvalReport:
    auc_mm: float
    auc_sk: float
    mean_auc: float
    ap_mm: Optional[float] = None
    ap_sk: Optional[float] = None
    counts: dict = field(default_factory=dict)
    ap_definition: str = AP_DEFINITION

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def write(self, path) -> None:
        try:
            Path(path).write_text(self.to_json(), encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"{path}: {exc}") from exc


def _split(pairs) -> tuple[np.ndarray, np.ndarray]:
    pairs = list(pairs)
    scores = np.array([float(s) for s, _ in pairs], dtype=np.float64)
    labels = np.array([bool(y) for _, y in pairs], dtype=bool)
    return scores, labels


def _check_both_classes(labels: np.ndarray) -> None:
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == labels.size:
        raise DegenerateLabels(
            f"need at least one positive and one negative label, got "
            f"{n_pos} positive of {labels.size}"
        )


def roc_points(pairs: Iterable[tuple[float, bool]]) -> RocCurve:
    """ROC curve under the rule ``score >= threshold`` means positive.

    One point per distinct score, walked from the highest score down, after
    the (0, 0) origin. Tied scores move both rates in a single step.
    """
    scores, labels = _split(pairs)
    _check_both_classes(labels)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    tp = np.cumsum(y)
    fp = np.cumsum(~y)
    # last index of each run of equal scores
    last = np.r_[np.flatnonzero(s[1:] != s[:-1]), s.size - 1]
    n_pos, n_neg = tp[-1], fp[-1]
    fpr = np.r_[0.0, fp[last] / n_neg]
    tpr = np.r_[0.0, tp[last] / n_pos]
    return RocCurve(fpr, tpr, s[last])


def auc_trapezoid(curve: RocCurve) -> float:
    x, y = curve.fpr, curve.tpr
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1])) / 2.0)


def auc_pair_count(pairs: Iterable[tuple[float, bool]]) -> float:
    """AUC as the fraction of concordant positive/negative pairs, ties 1/2.

    Brute force over all ``P * N`` pairs; kept deliberately independent of
    :func:`roc_points`.
    """
    scores, labels = _split(pairs)
    _check_both_classes(labels)
    pos = scores[labels][:, None]
    neg = scores[~labels][None, :]
    wins = np.count_nonzero(pos > neg)
    ties = np.count_nonzero(pos == neg)
    return (wins + 0.5 * ties) / (pos.size * neg.size)


def average_precision(pairs: Sequence[tuple[float, bool]]) -> float:
    """Non-interpolated average precision.

    Ranks by descending score; equal scores keep their input order. AP is
    the mean of the precision values at the ranks of the positives.
    """
    scores, labels = _split(pairs)
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise NoPositives("average precision needs at least one positive")
    order = np.argsort(-scores, kind="stable")
    y = labels[order]
    ranks = np.flatnonzero(y) + 1
    hits = np.arange(1, n_pos + 1)
    return math.fsum(hits / ranks) / n_pos


def mean_auc(auc_mm: float, auc_sk: float) -> float:
    """Challenge ranking metric: the mean of the MM and SK AUCs."""
    return (auc_mm + auc_sk) / 2.0


def evaluate(mm_pairs, sk_pairs, counts: Optional[dict] = None) -> EvalReport:
    """Build an :class:`EvalReport` from binary-labelled MM and SK pairs."""
    mm_pairs = list(mm_pairs)
    sk_pairs = list(sk_pairs)
    auc_mm = auc_trapezoid(roc_points(mm_pairs))
    auc_sk = auc_trapezoid(roc_points(sk_pairs))
    return EvalReport(
        auc_mm=auc_mm,
        auc_sk=auc_sk,
        mean_auc=mean_auc(auc_mm, auc_sk),
        ap_mm=average_precision(mm_pairs),
        ap_sk=average_precision(sk_pairs),
        counts=dict(counts or {}),
    )


def write_roc_csv(curve: RocCurve, path) -> None:
    """Write ``fpr,tpr,threshold``; the origin row carries threshold ``inf``."""
    thresholds = np.r_[math.inf, curve.thresholds]
    lines = ["fpr,tpr,threshold"]
    for f, t, th in zip(curve.fpr, curve.tpr, thresholds):
        lines.append(f"{float(f)!r},{float(t)!r},{float(th)!r}")
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc
