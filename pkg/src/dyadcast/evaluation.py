"""Rare-event scoring: contingency metrics, ROC/PR curves, bootstrap
intervals, rolling means, and the coefficient-ratio diagnostic.

Undefined quantities (zero-denominator rates, ratios with a vanishing
denominator) are marked with NaN rather than raising, so callers can
carry them through tables; genuinely unanswerable requests (curves
without both classes) raise EvaluationError instead.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, SchemaError

UNDEFINED = float("nan")


@dataclass(frozen=True)
class ContingencyCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def contingency(scores, labels, threshold: float) -> ContingencyCounts:
    """Counts at a single cut: predicted positive iff score >= threshold."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError(f"scores shape {scores.shape} != labels shape {labels.shape}")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0,1], got {threshold}")
    pred = scores >= threshold
    pos = labels == 1
    tp = int(np.sum(pred & pos))
    fp = int(np.sum(pred & ~pos))
    fn = int(np.sum(~pred & pos))
    tn = int(np.sum(~pred & ~pos))
    return ContingencyCounts(tp, fp, fn, tn)


def metrics(counts: ContingencyCounts):
    """(precision, recall, fpr). Precision over zero predicted positives is
    1 by convention; recall/fpr with empty denominators are NaN."""
    pp = counts.tp + counts.fp
    precision = 1.0 if pp == 0 else counts.tp / pp
    pos = counts.tp + counts.fn
    recall = UNDEFINED if pos == 0 else counts.tp / pos
    neg = counts.fp + counts.tn
    fpr = UNDEFINED if neg == 0 else counts.fp / neg
    return precision, recall, fpr


@dataclass(frozen=True)
class Curve:
    kind: str
    points: tuple
    auc: float

    def write_csv(self, stream) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["x", "y"])
        for x, y in self.points:
            writer.writerow([repr(float(x)), repr(float(y))])


def _grouped_counts(scores, labels):
    """Cumulative (tp, count) at the end of each distinct-score group, in
    descending score order."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape:
        raise ValueError(f"scores shape {scores.shape} != labels shape {labels.shape}")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    # indices of the last element of each tied group
    ends = np.flatnonzero(np.diff(s) != 0)
    ends = np.append(ends, len(s) - 1)
    cum_tp = np.cumsum(y)[ends]
    cum_n = ends + 1
    return cum_tp, cum_n, int(labels.sum()), len(labels)


def roc_curve(scores, labels) -> Curve:
    """One point per distinct score (threshold sweep, descending), anchored
    at (0,0); AUC by trapezoid, which equals the Mann-Whitney statistic
    with half credit for ties."""
    cum_tp, cum_n, P, n = _grouped_counts(scores, labels)
    N = n - P
    if P == 0 or N == 0:
        raise EvaluationError(f"ROC needs both classes, have {P} positives of {n}")
    tpr = cum_tp / P
    fpr = (cum_n - cum_tp) / N
    xs = np.concatenate([[0.0], fpr])
    ys = np.concatenate([[0.0], tpr])
    auc = float(np.trapezoid(ys, xs))
    points = tuple(zip(xs.tolist(), ys.tolist()))
    return Curve(kind="ROC", points=points, auc=auc)


def pr_curve(scores, labels) -> Curve:
    """Precision-recall curve with AUC as average precision.

    Tied scores are processed as one group: every positive in a group
    receives the precision at the group's end. With all scores tied this
    makes the value exactly the positive rate. The curve is anchored at
    (0, 1) per the empty-prediction precision convention.
    """
    cum_tp, cum_n, P, _ = _grouped_counts(scores, labels)
    if P == 0:
        raise EvaluationError("PR is undefined without positives")
    prec = cum_tp / cum_n
    new_tp = np.diff(np.concatenate([[0], cum_tp]))
    auc = float(np.sum(new_tp * prec) / P)
    recall = cum_tp / P
    xs = np.concatenate([[0.0], recall])
    ys = np.concatenate([[1.0], prec])
    points = tuple(zip(xs.tolist(), ys.tolist()))
    return Curve(kind="PR", points=points, auc=auc)


def bootstrap_ci(values, replicates: int = 10000, seed: int = 0, level: float = 0.95):
    """Percentile interval of resampled means."""
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        raise ValueError(f"bootstrap needs >= 2 values, got {len(values)}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0,1), got {level}")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(values), size=(replicates, len(values)))
    means = values[idx].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [alpha, 1.0 - alpha])
    return float(lo), float(hi)


def rolling_mean(series, width: int = 3):
    """Centered rolling mean over a period-indexed series.

    Endpoint windows are truncated to whatever is available. NaN entries
    are excluded from their windows; a window with no defined values
    yields NaN. Returns [(period, mean)] sorted by period.
    """
    if width % 2 != 1 or width < 1:
        raise ValueError(f"width must be odd and positive, got {width}")
    items = sorted(dict(series).items())
    if not items:
        return []
    periods = [p for p, _ in items]
    vals = np.array([v for _, v in items], dtype=float)
    half = width // 2
    out = []
    for i, p in enumerate(periods):
        window = vals[max(0, i - half): i + half + 1]
        defined = window[~np.isnan(window)]
        out.append((p, float(defined.mean()) if len(defined) else UNDEFINED))
    return out


@dataclass(frozen=True)
class RatioEntry:
    feature: str
    ratio: float
    selected: bool | None


SELECTION_THRESHOLD = 0.01


def coefficient_ratio(en_model, logit_model) -> list:
    """Per-feature |beta_elastic-net| / |beta_logit| on the standardized
    scale. A logit coefficient below 1e-12 in magnitude makes the ratio
    NaN (selected flag None); otherwise selected = ratio >= 0.01."""
    en = en_model.coefficients()
    base = logit_model.coefficients()
    if tuple(en) != tuple(base):
        raise SchemaError(f"coefficient schemas differ: {tuple(en)} vs {tuple(base)}")
    entries = []
    for feature in en:
        denom = abs(base[feature])
        if denom < 1e-12:
            entries.append(RatioEntry(feature, UNDEFINED, None))
        else:
            ratio = abs(en[feature]) / denom
            entries.append(RatioEntry(feature, float(ratio), ratio >= SELECTION_THRESHOLD))
    return entries


@dataclass
class RatioSeries:
    """Coefficient ratios over periods for one (lag, spec-class) run.

    rows: (period, feature, ratio, selected). Smoothing adds a 3-period
    centered rolling mean per feature.
    """

    rows: list

    def add(self, period: int, entries) -> None:
        for e in entries:
            self.rows.append((period, e.feature, e.ratio, e.selected))

    def with_smoothing(self, width: int = 3) -> list:
        """Rows (period, feature, ratio, smoothed, selected) sorted by
        (feature, period)."""
        by_feature: dict = {}
        for period, feature, ratio, selected in self.rows:
            by_feature.setdefault(feature, []).append((period, ratio, selected))
        out = []
        for feature in sorted(by_feature):
            items = sorted(by_feature[feature])
            smoothed = dict(rolling_mean([(p, r) for p, r, _ in items], width))
            for period, ratio, selected in items:
                out.append((period, feature, ratio, smoothed[period], selected))
        out.sort(key=lambda row: (row[1], row[0]))
        return out


def is_undefined(x) -> bool:
    return isinstance(x, float) and math.isnan(x)
