"""Multiclass evaluation: accuracy, sensitivity, specificity, G-mean,
H-measure and F1.

Sensitivity, specificity and F1 are macro averages of per-class one-vs-rest
rates. G-mean is sqrt(macro sensitivity x macro specificity), computed on the
averaged pair rather than averaging per-class G-means. The H-measure is
Hand's coherent alternative to AUC: expected minimum misclassification loss
over a Beta(a, b) distribution of cost ratios, evaluated on the ROC convex
hull and normalized against the best trivial (prior-only) classifier, then
macro-averaged over one-vs-rest problems.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import betainc

from .errors import DataError, MetricConventionWarning


def confusion(true_labels, predicted_labels, n_classes: int) -> np.ndarray:
    """C x C count matrix; rows are true classes, columns predicted."""
    y = np.asarray(true_labels, dtype=np.int64)
    p = np.asarray(predicted_labels, dtype=np.int64)
    if y.size == 0:
        raise DataError("cannot build a confusion matrix from no rows")
    if y.shape != p.shape:
        raise DataError(f"label lengths differ: {y.shape} vs {p.shape}")
    for name, arr in (("true", y), ("predicted", p)):
        if arr.min() < 0 or arr.max() >= n_classes:
            raise DataError(f"{name} label outside [0, {n_classes})")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y, p), 1)
    return cm


@dataclass(frozen=True)
class MetricReport:
    """The six scores plus the per-class one-vs-rest breakdown.

    All values are fractions in [0, 1]. ``h_measure`` is None until filled in
    by :func:`h_measure` (it needs probabilities, not a confusion matrix).
    ``conventions`` lists every 0/0 rate that was set to 1 by convention.
    """

    accuracy: float
    sensitivity: float
    specificity: float
    g_mean: float
    f1: float
    h_measure: float | None
    averaging: str
    per_class_tpr: np.ndarray
    per_class_tnr: np.ndarray
    per_class_f1: np.ndarray
    support: np.ndarray
    conventions: tuple[str, ...]

    def with_h(self, h: float) -> "MetricReport":
        return replace(self, h_measure=h)

    def to_dict(self) -> dict:
        """JSON-friendly view; scalar scores as fractions."""
        return {
            "accuracy": self.accuracy,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "g_mean": self.g_mean,
            "h_measure": self.h_measure,
            "f1": self.f1,
            "averaging": self.averaging,
            "per_class": {
                "tpr": self.per_class_tpr.tolist(),
                "tnr": self.per_class_tnr.tolist(),
                "f1": self.per_class_f1.tolist(),
                "support": self.support.tolist(),
            },
            "conventions": list(self.conventions),
        }


def _rate(numer: np.ndarray, denom: np.ndarray, kind: str, notes: list[str]) -> np.ndarray:
    """Elementwise numer/denom with the 0/0 -> 1 convention, each use noted."""
    out = np.ones_like(numer, dtype=np.float64)
    ok = denom > 0
    out[ok] = numer[ok] / denom[ok]
    for c in np.nonzero(~ok)[0]:
        notes.append(f"class {c}: {kind} 0/0 set to 1 by convention")
    return out


def basic_metrics(cm: np.ndarray) -> MetricReport:
    """All scores except the H-measure, from a confusion matrix."""
    cm = np.asarray(cm)
    total = int(cm.sum())
    if total <= 0:
        raise DataError("confusion matrix is empty")
    if (cm < 0).any():
        raise DataError("confusion matrix has negative counts")
    tp = np.diag(cm).astype(np.float64)
    row = cm.sum(axis=1).astype(np.float64)
    col = cm.sum(axis=0).astype(np.float64)
    fn = row - tp
    fp = col - tp
    tn = total - tp - fn - fp

    notes: list[str] = []
    tpr = _rate(tp, tp + fn, "TPR", notes)
    tnr = _rate(tn, tn + fp, "TNR", notes)
    f1 = _rate(2 * tp, 2 * tp + fp + fn, "F1", notes)
    for note in notes:
        warnings.warn(note, MetricConventionWarning)

    sens = float(tpr.mean())
    spec = float(tnr.mean())
    return MetricReport(
        accuracy=float(tp.sum()) / total,
        sensitivity=sens,
        specificity=spec,
        g_mean=float(np.sqrt(sens * spec)),
        f1=float(f1.mean()),
        h_measure=None,
        averaging="macro",
        per_class_tpr=tpr,
        per_class_tnr=tnr,
        per_class_f1=f1,
        support=row.astype(np.int64),
        conventions=tuple(notes),
    )


def _roc_points(scores: np.ndarray, positive: np.ndarray) -> np.ndarray:
    """ROC step points (fpr, tpr) from (0,0) to (1,1), score ties grouped."""
    n1 = int(positive.sum())
    n0 = len(positive) - n1
    order = np.argsort(-scores, kind="stable")
    y = positive[order]
    tp = np.cumsum(y)
    fp = np.cumsum(1 - y)
    s = scores[order]
    last = np.nonzero(np.diff(s))[0]
    bounds = np.append(last, len(s) - 1)
    pts = np.empty((len(bounds) + 1, 2))
    pts[0] = (0.0, 0.0)
    pts[1:, 0] = fp[bounds] / n0
    pts[1:, 1] = tp[bounds] / n1
    return pts


def _upper_hull(points: np.ndarray) -> np.ndarray:
    """Concave majorant of ROC points, left to right (monotone chain)."""
    hull: list[np.ndarray] = []
    for p in points:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
            if cross >= 0:  # b lies on or under chord a->p
                hull.pop()
            else:
                break
        hull.append(p)
    return np.array(hull)


def _beta_c_integral(u: float, v: float, a: float, b: float) -> float:
    """Integral of c * Beta(c; a, b) density over [u, v]."""
    return a / (a + b) * (betainc(a + 1.0, b, v) - betainc(a + 1.0, b, u))


def _beta_1mc_integral(u: float, v: float, a: float, b: float) -> float:
    """Integral of (1 - c) * Beta(c; a, b) density over [u, v]."""
    return b / (a + b) * (betainc(a, b + 1.0, v) - betainc(a, b + 1.0, u))


def binary_h_measure(scores: np.ndarray, positive: np.ndarray, a: float = 2.0, b: float = 2.0) -> float:
    """Hand's H-measure for one binary problem.

    ``positive`` is a 0/1 indicator; both classes must be present.
    """
    positive = np.asarray(positive, dtype=np.int64)
    scores = np.asarray(scores, dtype=np.float64)
    n = len(positive)
    n1 = int(positive.sum())
    n0 = n - n1
    if n1 == 0 or n0 == 0:
        raise DataError("binary H-measure needs both classes present")
    pi0 = n0 / n
    pi1 = n1 / n

    hull = _upper_hull(_roc_points(scores, positive))
    # cost where adjacent hull vertices i and i+1 swap optimality; decreasing in i
    dfpr = np.diff(hull[:, 0])
    dtpr = np.diff(hull[:, 1])
    switch = pi1 * dtpr / (pi0 * dfpr + pi1 * dtpr)
    # vertex i minimizes the loss for c in [lo_i, hi_i]
    hi = np.concatenate([[1.0], switch])
    lo = np.concatenate([switch, [0.0]])

    numer = 0.0
    for (fpr, tpr), u, v in zip(hull, lo, hi):
        if v <= u:
            continue  # collinear vertices can produce empty intervals
        numer += pi0 * fpr * _beta_c_integral(u, v, a, b)
        numer += pi1 * (1.0 - tpr) * _beta_1mc_integral(u, v, a, b)

    # reference: always-positive (loss c*pi0) below c* = pi1, always-negative
    # (loss (1-c)*pi1) above
    denom = pi0 * _beta_c_integral(0.0, pi1, a, b) + pi1 * _beta_1mc_integral(pi1, 1.0, a, b)
    return 1.0 - numer / denom


def h_measure(
    true_labels,
    scores: np.ndarray,
    a: float = 2.0,
    b: float = 2.0,
    return_detail: bool = False,
):
    """Macro H-measure over one-vs-rest problems.

    ``scores`` is the (n, C) row-stochastic probability matrix; column c is
    the score for class c against the rest. Classes absent from the truth (or
    covering all of it) have no binary problem and are skipped; with
    ``return_detail`` the skipped class list and per-class values are
    returned alongside the macro value.
    """
    y = np.asarray(true_labels, dtype=np.int64)
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[0] != len(y):
        raise DataError("scores must be (n_rows, n_classes)")
    if len(np.unique(y)) < 2:
        raise DataError("H-measure needs at least 2 distinct labels")
    if (scores < -1e-9).any() or np.abs(scores.sum(axis=1) - 1.0).max() > 1e-6:
        raise DataError("scores must be row-stochastic probabilities")
    if a <= 0 or b <= 0:
        raise DataError("Beta severity parameters must be positive")

    n_classes = scores.shape[1]
    per_class: dict[int, float] = {}
    skipped: list[int] = []
    for c in range(n_classes):
        positive = (y == c).astype(np.int64)
        if positive.sum() in (0, len(y)):
            skipped.append(c)
            continue
        per_class[c] = binary_h_measure(scores[:, c], positive, a, b)
    macro = float(np.mean(list(per_class.values())))
    if return_detail:
        return macro, per_class, skipped
    return macro


def evaluate(true_labels, predicted_labels, proba: np.ndarray, n_classes: int) -> MetricReport:
    """Full report: confusion-based scores plus the macro H-measure."""
    report = basic_metrics(confusion(true_labels, predicted_labels, n_classes))
    return report.with_h(h_measure(true_labels, proba))
