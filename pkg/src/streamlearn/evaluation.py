"""Streaming model-quality metrics, ROC/threshold selection, and drift monitors.

Two monitor families are provided: an individuals control chart on residuals
(rule: flag any point outside center +/- 2.66 times the mean moving range)
for regression streams, and an error-rate trace with warning/drift levels at
two/three standard errors above the historical minimum for classifiers.
"""

import math
from collections import deque
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from ._validation import as_vector
from .exceptions import (
    DegenerateLabelsError,
    DegenerateTargetError,
    InsufficientDataError,
    InvalidInputError,
)

# Conventional individuals-chart constant: 3 / d2 with d2 = 1.128 for
# moving ranges of span two.
ICHART_MR_FACTOR = 2.66


class RegressionMetricsReport(NamedTuple):
    sst: float
    sse: float
    n: int
    p: int
    r2: float
    sigma_hat: float
    rmse: float


class ClassificationMetricsReport(NamedTuple):
    accuracy: float
    tpr: float
    tnr: float
    precision: float
    f1: float


class RegressionTally:
    """Single-pass accumulator of residual and target sums.

    SST is maintained from streaming sums as sum(y^2) - (sum y)^2 / n; the
    residual history is bounded (``history_size``) and only used by chart
    refits, never by the metric identities.
    """

    def __init__(self, p, history_size=100_000):
        if p < 1:
            raise InvalidInputError("p must be >= 1")
        self.p = int(p)
        self.n = 0
        self.sse = 0.0
        self.sum_y = 0.0
        self.sum_y2 = 0.0
        self.residuals = deque(maxlen=history_size)

    def update(self, y_true, y_pred):
        r = float(y_true) - float(y_pred)
        self.n += 1
        self.sse += r * r
        self.sum_y += float(y_true)
        self.sum_y2 += float(y_true) * float(y_true)
        self.residuals.append(r)
        return r

    @property
    def sst(self):
        if self.n == 0:
            return 0.0
        return max(self.sum_y2 - self.sum_y * self.sum_y / self.n, 0.0)

    @classmethod
    def from_components(cls, n, p, sse, sum_y, sum_y2):
        tally = cls(p=p)
        tally.n = int(n)
        tally.sse = float(sse)
        tally.sum_y = float(sum_y)
        tally.sum_y2 = float(sum_y2)
        return tally

    def metrics(self):
        return regression_metrics(self)


def regression_metrics(tally):
    """R^2, residual sigma and RMSE from a :class:`RegressionTally`.

    r2 = 1 - sse/sst, sigma_hat = sqrt(sse / (n - p)), rmse = sqrt(sse / n).
    """
    if tally.n <= tally.p:
        raise InsufficientDataError(
            f"need n > p, got n={tally.n}, p={tally.p}"
        )
    sst = tally.sst
    if sst <= 0.0:
        raise DegenerateTargetError("target has zero total variation")
    r2 = 1.0 - tally.sse / sst
    sigma_hat = math.sqrt(tally.sse / (tally.n - tally.p))
    rmse = math.sqrt(tally.sse / tally.n)
    return RegressionMetricsReport(
        sst=sst, sse=tally.sse, n=tally.n, p=tally.p,
        r2=r2, sigma_hat=sigma_hat, rmse=rmse,
    )


class ConfusionTally:
    """Binary confusion counts with streaming updates."""

    def __init__(self, tp=0, fp=0, tn=0, fn=0):
        for name, v in (("tp", tp), ("fp", fp), ("tn", tn), ("fn", fn)):
            if v < 0:
                raise InvalidInputError(f"{name} must be >= 0")
        self.tp, self.fp, self.tn, self.fn = int(tp), int(fp), int(tn), int(fn)

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    def update(self, y_true, y_pred):
        t, p = int(y_true), int(y_pred)
        if t == 1 and p == 1:
            self.tp += 1
        elif t == 0 and p == 1:
            self.fp += 1
        elif t == 0 and p == 0:
            self.tn += 1
        elif t == 1 and p == 0:
            self.fn += 1
        else:
            raise InvalidInputError("labels must be 0 or 1")

    def metrics(self):
        return classification_metrics(self)


def classification_metrics(tally):
    """Accuracy, TPR, TNR, precision and F1; undefined ratios come back NaN."""
    if tally.total == 0:
        raise InsufficientDataError("confusion tally is empty")

    def ratio(num, den):
        return num / den if den > 0 else float("nan")

    accuracy = (tally.tp + tally.tn) / tally.total
    tpr = ratio(tally.tp, tally.tp + tally.fn)
    tnr = ratio(tally.tn, tally.tn + tally.fp)
    precision = ratio(tally.tp, tally.tp + tally.fp)
    if math.isnan(precision) or math.isnan(tpr) or precision + tpr == 0:
        f1 = float("nan")
    else:
        f1 = 2.0 * precision * tpr / (precision + tpr)
    return ClassificationMetricsReport(
        accuracy=accuracy, tpr=tpr, tnr=tnr, precision=precision, f1=f1
    )


def roc_auc(scores, labels):
    """AUC by midrank (Mann-Whitney) plus the Youden-optimal threshold.

    The decision rule is ``score >= threshold -> positive``; the threshold
    maximizing TPR - FPR is returned, ties broken toward the lower value.
    """
    scores = as_vector(scores, "scores")
    labels = as_vector(labels, "labels")
    if labels.shape != scores.shape:
        raise InvalidInputError("scores and labels disagree on length")
    pos = labels == 1
    neg = labels == 0
    if not (np.all(pos | neg)):
        raise InvalidInputError("labels must be 0 or 1")
    n1, n0 = int(pos.sum()), int(neg.sum())
    if n1 == 0 or n0 == 0:
        raise DegenerateLabelsError("both classes must be present")

    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty_like(scores)
    sorted_scores = scores[order]
    # midranks over tied blocks
    i = 0
    rank_vals = np.empty_like(sorted_scores)
    while i < sorted_scores.size:
        j = i
        while j + 1 < sorted_scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        rank_vals[i : j + 1] = 0.5 * (i + j) + 1.0
        i = j + 1
    ranks[order] = rank_vals
    auc = (ranks[pos].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0)

    # Youden scan: predicted positive iff score >= tau.  Sorting descending,
    # each unique score is a candidate tau whose TPR/FPR follow from the
    # cumulative class counts at the end of its tie block.
    desc = np.argsort(-scores, kind="mergesort")
    s_desc = scores[desc]
    pos_desc = pos[desc]
    cum_tp = np.cumsum(pos_desc)
    cum_fp = np.cumsum(~pos_desc)
    block_end = np.append(np.nonzero(np.diff(s_desc) != 0)[0], s_desc.size - 1)
    j_stat = cum_tp[block_end] / n1 - cum_fp[block_end] / n0
    # last index achieving the max = lowest threshold among ties
    best = np.nonzero(j_stat == j_stat.max())[0][-1]
    best_tau = s_desc[block_end[best]]
    return float(auc), float(best_tau)


@dataclass(frozen=True)
class IChart:
    """Fitted individuals-chart limits."""

    center: float
    upper: float
    lower: float
    basis_n: int


def ichart_fit(residuals):
    """Fit chart limits center +/- 2.66 * mean moving range."""
    r = as_vector(residuals, "residuals")
    if r.size < 2:
        raise InsufficientDataError("chart needs at least two residuals")
    center = float(np.mean(r))
    mr_bar = float(np.mean(np.abs(np.diff(r))))
    width = ICHART_MR_FACTOR * mr_bar
    return IChart(center=center, upper=center + width, lower=center - width,
                  basis_n=r.size)


def nelson_rule1(chart, residual):
    """True iff the residual falls strictly outside the chart limits."""
    r = float(residual)
    return r > chart.upper or r < chart.lower


@dataclass(frozen=True)
class DdmTrace:
    """Running error-rate state: p_i, its standard error, and their minima.

    No alarm is raised before ``min_steps`` observations, matching the
    usual burn-in of the error-rate drift detector.
    """

    step: int = 0
    errors: int = 0
    p_i: float = 0.0
    s_i: float = 0.0
    p_min: float = float("inf")
    s_min: float = float("inf")
    min_steps: int = 30


def ddm_update(trace, error):
    """Fold one 0/1 error indicator into the trace.

    Returns (new_trace, status) with status one of "stable", "warning",
    "drift".  Minima update whenever p_i + s_i reaches a new low; alarms
    use strict comparison so the minimum itself never alarms.
    """
    err = int(error)
    if err not in (0, 1):
        raise InvalidInputError("error indicator must be 0 or 1")
    step = trace.step + 1
    errors = trace.errors + err
    p = errors / step
    s = math.sqrt(p * (1.0 - p) / step)
    p_min, s_min = trace.p_min, trace.s_min
    if p + s <= p_min + s_min:
        p_min, s_min = p, s
    out = replace(
        trace, step=step, errors=errors, p_i=p, s_i=s, p_min=p_min, s_min=s_min
    )
    if step < trace.min_steps:
        return out, "stable"
    if p + s > p_min + 3.0 * s_min:
        return out, "drift"
    if p + s > p_min + 2.0 * s_min:
        return out, "warning"
    return out, "stable"


def empirical_coverage(intervals, truths):
    """Fraction of truths inside their [lo, hi] interval, bounds inclusive."""
    truths = as_vector(truths, "truths")
    arr = np.asarray(intervals, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] != truths.shape[0]:
        raise InvalidInputError(
            "intervals must be pairs matching truths in length"
        )
    inside = (truths >= arr[:, 0]) & (truths <= arr[:, 1])
    return float(np.mean(inside))


def log_loss_term(prob, y):
    """Per-step cross entropy -[y ln p + (1-y) ln(1-p)], clamped at 1e-300.

    Summed over a stream this is reported as ``total_log_loss``.
    """
    p = float(prob)
    y = float(y)
    return -(
        y * math.log(max(p, 1e-300)) + (1.0 - y) * math.log(max(1.0 - p, 1e-300))
    )
