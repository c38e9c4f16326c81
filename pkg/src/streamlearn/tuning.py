"""Warm-up estimation: time-ordered CV splits, ridge fits, and lambda selection.

Splits respect temporal causality: every validation range sits immediately
after its training range and never overlaps it.  Ridge systems are solved
through factorizations (lstsq / Cholesky), never an explicit inverse, since
the target use case includes deliberately ill-conditioned designs.
"""

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg, optimize
from scipy.special import expit

from ._validation import as_matrix, as_vector
from .exceptions import (
    InsufficientDataError,
    InvalidInputError,
    InvalidPlanError,
    SingularSystemError,
)


@dataclass(frozen=True)
class SplitPlan:
    """Layout of train/validation splits inside the warm-up segment.

    mode "expanding-window": training ranges are anchored at 0 and grow by
    ``step`` each split.  mode "rolling-increment": training ranges keep the
    fixed size ``initial_train`` and slide forward by ``step``.  Either way
    the validation range is the ``horizon`` rows immediately after training.
    """

    mode: str = "expanding-window"
    initial_train: int = 50
    step: int = 5
    horizon: int = 5
    n_splits: int = 40

    def __post_init__(self):
        if self.mode not in ("expanding-window", "rolling-increment"):
            raise InvalidPlanError(f"unknown mode {self.mode!r}")
        for name in ("initial_train", "step", "horizon", "n_splits"):
            if getattr(self, name) < 1:
                raise InvalidPlanError(f"{name} must be >= 1")

    def required_length(self):
        last_shift = (self.n_splits - 1) * self.step
        return self.initial_train + last_shift + self.horizon


def make_splits(plan, n_total):
    """Materialize the plan as (train_range, validation_range) pairs."""
    if plan.required_length() > n_total:
        raise InvalidPlanError(
            f"plan needs {plan.required_length()} rows, only {n_total} available"
        )
    out = []
    for k in range(plan.n_splits):
        shift = k * plan.step
        if plan.mode == "expanding-window":
            train = range(0, plan.initial_train + shift)
        else:
            train = range(shift, shift + plan.initial_train)
        val = range(train.stop, train.stop + plan.horizon)
        out.append((train, val))
    return out


@dataclass(frozen=True)
class LambdaGrid:
    """Strictly increasing non-negative candidate penalties."""

    values: np.ndarray

    def __post_init__(self):
        vals = as_vector(self.values, "values")
        if vals.size == 0:
            raise InvalidInputError("lambda grid is empty")
        vals = np.sort(vals)
        if vals[0] < 0.0:
            raise InvalidInputError("lambda values must be >= 0")
        if np.any(np.diff(vals) <= 0.0):
            raise InvalidInputError("lambda values must be distinct")
        object.__setattr__(self, "values", vals)

    @classmethod
    def linear(cls, start=0.0, stop=1.0, num=30):
        return cls(values=np.linspace(start, stop, num))


def ridge_fit(X, y, lam):
    """Tikhonov least squares via the augmented-system QR factorization.

    Returns (mu, noise_var) with noise_var = SSE / (n - p); noise_var is NaN
    when n <= p.  A rank-deficient system at lam = 0 raises.
    """
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    n, p = X.shape
    if y.shape[0] != n:
        raise InvalidInputError("X and y disagree on sample count")
    if lam < 0.0:
        raise InvalidInputError("lam must be >= 0")
    if lam == 0.0:
        # cond sets the relative singular-value cutoff for rank detection;
        # deliberately ill-conditioned designs (sv ratios ~1e-3) stay full rank
        mu, _, rank, _ = linalg.lstsq(X, y, cond=1e-10)
        if rank < p:
            raise SingularSystemError(
                f"design has rank {rank} < {p} and lam = 0"
            )
    else:
        aug_X = np.vstack([X, math.sqrt(lam) * np.eye(p)])
        aug_y = np.concatenate([y, np.zeros(p)])
        mu, _, _, _ = linalg.lstsq(aug_X, aug_y)
    resid = y - X @ mu
    noise_var = float(resid @ resid) / (n - p) if n > p else float("nan")
    return mu, noise_var


def init_covariance(X, lam, noise_var):
    """Initial weight covariance noise_var * (X'X + lam I)^-1 via Cholesky."""
    X = as_matrix(X, "X")
    if lam < 0.0 or noise_var < 0.0:
        raise InvalidInputError("lam and noise_var must be >= 0")
    p = X.shape[1]
    gram = X.T @ X + lam * np.eye(p)
    try:
        cho = linalg.cho_factor(gram)
    except linalg.LinAlgError as exc:
        raise SingularSystemError(f"X'X + lam I is singular: {exc}") from exc
    inv = linalg.cho_solve(cho, np.eye(p))
    return noise_var * (inv + inv.T) / 2.0


def logistic_ridge_fit(X, y, lam, tol=1e-10):
    """Penalized logistic regression: minimize sum log-loss + lam ||w||^2.

    Solved with L-BFGS on the exact objective/gradient so the penalty
    convention matches the streaming updates (intercept included).
    """
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    if set(np.unique(y)) - {0.0, 1.0}:
        raise InvalidInputError("labels must be 0 or 1")
    p = X.shape[1]

    def objective(w):
        z = X @ w
        # log(1 + exp(-z)) and log(1 + exp(z)) evaluated stably
        nll = np.logaddexp(0.0, -z) @ y + np.logaddexp(0.0, z) @ (1.0 - y)
        grad = X.T @ (expit(z) - y) + 2.0 * lam * w
        return nll + lam * (w @ w), grad

    result = optimize.minimize(
        objective, np.zeros(p), jac=True, method="L-BFGS-B",
        options={"gtol": tol, "maxiter": 1000},
    )
    return result.x


class ScoreRow(NamedTuple):
    lam: float
    split_index: int
    metric_value: float


@dataclass(frozen=True)
class ScoreTable:
    """Per-(lambda, split) scores plus the aggregate used for selection."""

    rows: tuple
    aggregates: dict
    metric: str

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lambda", "split_index", "metric_value", "aggregate"])
            for row in self.rows:
                writer.writerow(
                    [
                        repr(float(row.lam)),
                        row.split_index,
                        repr(float(row.metric_value)),
                        repr(float(self.aggregates[row.lam])),
                    ]
                )


def _rmse(y_true, y_pred):
    d = y_true - y_pred
    return math.sqrt(float(d @ d) / d.shape[0])


def select_lambda(X, y, plan, grid, metric="rmse"):
    """Pick the penalty with the best mean validation score across splits.

    metric "rmse" fits ridge regressions and minimizes; metric "accuracy"
    fits penalized logistic regressions (cut at 0.5) and maximizes.  Ties
    break toward the smaller lambda.  Per-split failures score NaN and drop
    out of the aggregate rather than aborting the search.
    """
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    if metric not in ("rmse", "accuracy"):
        raise InvalidInputError(f"unknown metric {metric!r}")
    splits = make_splits(plan, X.shape[0])
    rows = []
    aggregates = {}
    for lam in grid.values:
        scores = []
        for k, (train, val) in enumerate(splits):
            tr = slice(train.start, train.stop)
            va = slice(val.start, val.stop)
            try:
                if metric == "rmse":
                    mu, _ = ridge_fit(X[tr], y[tr], lam)
                    score = _rmse(y[va], X[va] @ mu)
                else:
                    w = logistic_ridge_fit(X[tr], y[tr], lam)
                    pred = (expit(X[va] @ w) >= 0.5).astype(float)
                    score = float(np.mean(pred == y[va]))
            except (SingularSystemError, InsufficientDataError):
                score = float("nan")
            rows.append(ScoreRow(lam=float(lam), split_index=k, metric_value=score))
            scores.append(score)
        valid = [s for s in scores if not math.isnan(s)]
        aggregates[float(lam)] = (
            float(np.mean(valid)) if valid else float("nan")
        )
    table = ScoreTable(rows=tuple(rows), aggregates=aggregates, metric=metric)

    best_lam, best_score = None, None
    for lam in grid.values:  # ascending, so ties keep the smaller lambda
        agg = aggregates[float(lam)]
        if math.isnan(agg):
            continue
        better = (
            best_score is None
            or (metric == "rmse" and agg < best_score - 1e-15)
            or (metric == "accuracy" and agg > best_score + 1e-15)
        )
        if better:
            best_lam, best_score = float(lam), agg
    if best_lam is None:
        raise InsufficientDataError("no lambda candidate produced a valid score")
    return best_lam, table
