"""Prediction with expert advice over a finite pool.

Weights live on the probability simplex.  Each step takes a gradient step
against the per-expert loss vector and projects back:

    g <- proj_simplex(g - eta * losses)

Per-step squared-error losses are clamped to [0, loss_clip] before the
step, keeping the bounded-loss assumption honest on Gaussian streams.
"""

import csv
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ._validation import as_matrix, as_vector
from .exceptions import ExpertError, InvalidInputError
from .geometry import check_prob_vector, project_simplex

DEFAULT_LOSS_CLIP = 10.0


@dataclass(frozen=True)
class ExpertPool:
    """A fixed set of prediction callables with display labels."""

    experts: tuple
    labels: tuple = None

    def __post_init__(self):
        experts = tuple(self.experts)
        if len(experts) < 1:
            raise InvalidInputError("pool needs at least one expert")
        labels = self.labels
        if labels is None:
            labels = tuple(f"E{i + 1}" for i in range(len(experts)))
        labels = tuple(labels)
        if len(labels) != len(experts):
            raise InvalidInputError("labels and experts disagree on length")
        object.__setattr__(self, "experts", experts)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return len(self.experts)

    def predictions(self, x):
        """Evaluate every expert on one input; failures carry the index."""
        out = np.empty(self.n)
        for i, h in enumerate(self.experts):
            try:
                out[i] = float(h(x))
            except Exception as exc:  # noqa: BLE001 - context added, re-raised
                raise ExpertError(i, exc) from exc
        return out


@dataclass(frozen=True)
class EnsembleState:
    """Weights plus cumulative loss accounting for one ensemble run."""

    weights: np.ndarray
    eta: float = 0.1
    cumulative_loss: np.ndarray = None
    cumulative_weighted_loss: float = 0.0

    def __post_init__(self):
        weights = check_prob_vector(self.weights)
        cum = self.cumulative_loss
        if cum is None:
            cum = np.zeros(weights.shape[0])
        cum = as_vector(cum, "cumulative_loss")
        if cum.shape != weights.shape:
            raise InvalidInputError("cumulative_loss length mismatch")
        if not self.eta > 0.0:
            raise InvalidInputError("eta must be > 0")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "cumulative_loss", cum)
        object.__setattr__(self, "eta", float(self.eta))

    @classmethod
    def uniform(cls, n, eta=0.1):
        return cls(weights=np.full(n, 1.0 / n), eta=eta)

    @property
    def n(self):
        return self.weights.shape[0]

    def expected_loss(self, losses):
        """Weighted average of the per-expert losses under the current weights."""
        losses = as_vector(losses, "losses")
        if losses.shape[0] != self.n:
            raise InvalidInputError("losses length mismatch")
        return float(self.weights @ losses)

    def update_weights(self, losses):
        """Gradient step then simplex projection; cumulative tallies advance."""
        losses = as_vector(losses, "losses")
        if losses.shape[0] != self.n:
            raise InvalidInputError("losses length mismatch")
        step_weighted = self.expected_loss(losses)
        new_weights = project_simplex(self.weights - self.eta * losses)
        return replace(
            self,
            weights=new_weights,
            cumulative_loss=self.cumulative_loss + losses,
            cumulative_weighted_loss=self.cumulative_weighted_loss + step_weighted,
        )

    def predict_weighted(self, pool, x):
        """Weight-averaged prediction across the pool."""
        return float(self.weights @ pool.predictions(x))

    def predict_best(self, pool, x):
        """Prediction of the highest-weight expert; ties go to the lowest index."""
        index = int(np.argmax(self.weights))
        preds = pool.predictions(x)
        return float(preds[index]), index


class RegretCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool
    rhs_unsquared: float


def regret_check(losses, weights_after, initial_weights, eta, g_star, tol=1e-9):
    """Numerical check of the projected-gradient regret inequality.

    Verifies, for a recorded run,

        2 * sum_t eta_t * (<l_t, g_t> - <l_t, g*>)  <=  ||g_1 - g*||^2

    where g_t are the post-update weights produced from observation t and
    g_1 the initial weights.  The right side uses the squared Euclidean
    norm (the unsquared value is reported alongside for reference).

    Parameters
    ----------
    losses : array (T, n)
        Per-step, per-expert losses.
    weights_after : array (T, n)
        Weights after the update driven by each step's losses.
    initial_weights : array (n,)
        Weights before the first update.
    eta : float or array (T,)
        Learning rate(s) used in the run.
    g_star : array (n,)
        Comparator on the simplex, normally the offline optimum.
    """
    losses = as_matrix(losses, "losses")
    weights_after = as_matrix(weights_after, "weights_after")
    if losses.shape != weights_after.shape:
        raise InvalidInputError("losses and weights_after disagree on shape")
    g1 = check_prob_vector(initial_weights)
    g_star = check_prob_vector(g_star)
    if g1.shape[0] != losses.shape[1] or g_star.shape[0] != losses.shape[1]:
        raise InvalidInputError("weight dimension mismatch")
    etas = np.broadcast_to(np.asarray(eta, dtype=float), (losses.shape[0],))
    per_step = np.einsum("ti,ti->t", losses, weights_after) - losses @ g_star
    lhs = float(2.0 * (etas * per_step).sum())
    diff = g1 - g_star
    rhs = float(diff @ diff)
    return RegretCheck(
        lhs=lhs, rhs=rhs, holds=lhs <= rhs + tol, rhs_unsquared=float(np.sqrt(rhs))
    )


def offline_best_weights(losses, eta=None):
    """Offline optimum of the (eta-weighted) cumulative linear cost over the simplex.

    Linear costs are minimized at a vertex, so this is the indicator of the
    expert with the smallest cumulative weighted loss.
    """
    losses = as_matrix(losses, "losses")
    if eta is None:
        total = losses.sum(axis=0)
    else:
        etas = np.broadcast_to(np.asarray(eta, dtype=float), (losses.shape[0],))
        total = etas @ losses
    out = np.zeros(losses.shape[1])
    out[int(np.argmin(total))] = 1.0
    return out


def squared_error_loss(predictions, y, clip=DEFAULT_LOSS_CLIP):
    """Per-expert squared error, clamped to [0, clip]."""
    predictions = as_vector(predictions, "predictions")
    resid = predictions - float(y)
    return np.minimum(resid * resid, clip)


@dataclass
class EnsembleHistory:
    """Step-indexed trajectory of losses and weights for reporting and checks."""

    initial_weights: np.ndarray
    losses: list = field(default_factory=list)
    weights_after: list = field(default_factory=list)
    etas: list = field(default_factory=list)

    def record(self, losses, state):
        self.losses.append(np.asarray(losses, dtype=float))
        self.weights_after.append(state.weights.copy())
        self.etas.append(state.eta)

    def loss_matrix(self):
        return np.asarray(self.losses)

    def weight_matrix(self):
        return np.asarray(self.weights_after)

    def check_regret(self, g_star=None, tol=1e-9):
        losses = self.loss_matrix()
        if g_star is None:
            g_star = offline_best_weights(losses, np.asarray(self.etas))
        return regret_check(
            losses,
            self.weight_matrix(),
            self.initial_weights,
            np.asarray(self.etas),
            g_star,
            tol=tol,
        )

    def write_csv(self, path):
        """Long-format export: step, expert_index, weight, cumulative_loss."""
        losses = self.loss_matrix()
        weights = self.weight_matrix()
        cum = np.cumsum(losses, axis=0)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "expert_index", "weight", "cumulative_loss"])
            for t in range(weights.shape[0]):
                for i in range(weights.shape[1]):
                    writer.writerow(
                        [t + 1, i, repr(float(weights[t, i])), repr(float(cum[t, i]))]
                    )


class OnlineExpertEnsemble(RegressorMixin, BaseEstimator):
    """Streaming ensemble over a fixed expert pool.

    Each ``partial_fit`` row evaluates all experts, clamps their squared
    errors, and advances the weight vector.  ``predict`` uses either the
    weighted combination or the current best expert.

    Parameters
    ----------
    pool : ExpertPool
    eta : float
        Weight-update learning rate.
    loss_clip : float
        Upper clamp on per-step squared errors.
    prediction : {"weighted", "best"}
    """

    def __init__(self, pool, eta=0.1, loss_clip=DEFAULT_LOSS_CLIP, prediction="weighted"):
        self.pool = pool
        self.eta = eta
        self.loss_clip = loss_clip
        self.prediction = prediction

    def _init_state(self):
        self.state_ = EnsembleState.uniform(self.pool.n, eta=self.eta)
        self.history_ = EnsembleHistory(initial_weights=self.state_.weights.copy())

    def partial_fit(self, X, y):
        X = as_matrix(X, "X")
        y = as_vector(y, "y")
        if y.shape[0] != X.shape[0]:
            raise InvalidInputError("X and y disagree on sample count")
        if not hasattr(self, "state_"):
            self._init_state()
        for xi, yi in zip(X, y):
            preds = self.pool.predictions(xi)
            losses = squared_error_loss(preds, yi, clip=self.loss_clip)
            self.state_ = self.state_.update_weights(losses)
            self.history_.record(losses, self.state_)
        return self

    def fit(self, X, y):
        if hasattr(self, "state_"):
            del self.state_
        return self.partial_fit(X, y)

    def predict(self, X):
        if not hasattr(self, "state_"):
            self._init_state()
        X = as_matrix(X, "X")
        if self.prediction == "best":
            return np.array([self.state_.predict_best(self.pool, row)[0] for row in X])
        return np.array([self.state_.predict_weighted(self.pool, row) for row in X])

    @property
    def weights_(self):
        return self.state_.weights
