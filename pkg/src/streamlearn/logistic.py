"""Online binary classification with logistic loss evaluated at the weight mean.

The expected logistic loss under a Gaussian weight law has no closed form,
so the surrogate plugs the mean into the loss directly.  The covariance
only enters through the Tikhonov term, which makes its gradient the
constant lam * I.
"""

import json
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin

from ._validation import as_matrix, as_vector, check_binary_label
from .exceptions import InvalidInputError
from .geometry import project_psd, symmetrize

PSD_TOL = 1e-10


@dataclass(frozen=True)
class LogisticModel:
    """Immutable state of the online logistic classifier.

    ``threshold`` is the decision cut on the predicted probability; ties
    classify as positive.
    """

    mu: np.ndarray
    sigma: np.ndarray
    lam: float = 0.0
    eta: float = 0.01
    threshold: float = 0.5

    def __post_init__(self):
        mu = as_vector(self.mu, "mu")
        sigma = symmetrize(self.sigma)
        if sigma.shape[0] != mu.shape[0]:
            raise InvalidInputError(
                f"sigma is {sigma.shape}, expected ({mu.size}, {mu.size})"
            )
        if np.linalg.eigvalsh(sigma)[0] < -PSD_TOL:
            raise InvalidInputError("sigma must be positive semidefinite")
        if not self.lam >= 0.0:
            raise InvalidInputError("lam must be >= 0")
        if not self.eta > 0.0:
            raise InvalidInputError("eta must be > 0")
        if not 0.0 < self.threshold < 1.0:
            raise InvalidInputError("threshold must be in (0, 1)")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "threshold", float(self.threshold))

    @classmethod
    def initial(cls, p, lam=0.0, eta=0.01, threshold=0.5, sigma_scale=1.0):
        return cls(
            mu=np.zeros(p),
            sigma=np.eye(p) * sigma_scale,
            lam=lam,
            eta=eta,
            threshold=threshold,
        )

    @property
    def p(self):
        return self.mu.shape[0]

    def _check_x(self, x):
        x = as_vector(x, "x")
        if x.shape[0] != self.p:
            raise InvalidInputError(
                f"x has {x.shape[0]} features, model expects {self.p}"
            )
        return x

    def predict_proba(self, x):
        """sigma(x'mu); expit saturates instead of overflowing."""
        x = self._check_x(x)
        return float(expit(x @ self.mu))

    def surrogate_loss(self, x, y):
        """Cross entropy at the mean plus lam (tr Sigma + mu'mu).

        Log arguments are clamped at 1e-300 so saturated probabilities give
        a large finite loss instead of infinity.
        """
        y = check_binary_label(y)
        h = self.predict_proba(x)
        nll = -(
            y * math.log(max(h, 1e-300))
            + (1 - y) * math.log(max(1.0 - h, 1e-300))
        )
        reg = self.lam * (np.trace(self.sigma) + self.mu @ self.mu)
        return float(nll + reg)

    def update_step(self, x, y):
        """Gradient step on mu, shrinkage step lam * I on sigma, then PSD projection."""
        x = self._check_x(x)
        y = check_binary_label(y)
        grad_mu = x * (expit(x @ self.mu) - y) + 2.0 * self.lam * self.mu
        mu = self.mu - self.eta * grad_mu
        if self.lam == 0.0:
            sigma = self.sigma
        else:
            sigma = project_psd(self.sigma - self.eta * self.lam * np.eye(self.p))
        return replace(self, mu=mu, sigma=sigma)

    def classify(self, x):
        """1 iff the predicted probability reaches the threshold."""
        return int(self.predict_proba(x) >= self.threshold)

    def to_json(self):
        return json.dumps(
            {
                "mu": self.mu.tolist(),
                "sigma": self.sigma.tolist(),
                "lambda": self.lam,
                "eta": self.eta,
                "threshold": self.threshold,
            }
        )

    @classmethod
    def from_json(cls, payload):
        data = json.loads(payload) if isinstance(payload, str) else dict(payload)
        return cls(
            mu=np.asarray(data["mu"], dtype=float),
            sigma=np.asarray(data["sigma"], dtype=float),
            lam=data["lambda"],
            eta=data["eta"],
            threshold=data.get("threshold", 0.5),
        )


class OnlineLogisticClassifier(ClassifierMixin, BaseEstimator):
    """Streaming binary classifier over rows of a model matrix.

    Parameters mirror :class:`~streamlearn.gaussian.OnlineGaussianRegressor`;
    ``threshold`` sets the decision cut and is typically recalibrated from a
    ROC scan after a stream has been processed.
    """

    def __init__(self, eta=0.1, lam=0.0, threshold=0.5, mu0=None, sigma0=None):
        self.eta = eta
        self.lam = lam
        self.threshold = threshold
        self.mu0 = mu0
        self.sigma0 = sigma0

    def _init_state(self, p):
        if self.mu0 is None:
            mu = np.zeros(p)
        else:
            mu = np.broadcast_to(np.asarray(self.mu0, dtype=float), (p,)).copy()
        if self.sigma0 is None:
            sigma = np.eye(p)
        elif np.isscalar(self.sigma0):
            sigma = np.eye(p) * float(self.sigma0)
        else:
            sigma = np.asarray(self.sigma0, dtype=float)
        self.model_ = LogisticModel(
            mu=mu, sigma=sigma, lam=self.lam, eta=self.eta, threshold=self.threshold
        )
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = p

    def partial_fit(self, X, y):
        X = as_matrix(X, "X")
        y = as_vector(y, "y")
        if y.shape[0] != X.shape[0]:
            raise InvalidInputError("X and y disagree on sample count")
        if not hasattr(self, "model_"):
            self._init_state(X.shape[1])
        model = self.model_
        for xi, yi in zip(X, y):
            model = model.update_step(xi, yi)
        self.model_ = model
        return self

    def fit(self, X, y):
        if hasattr(self, "model_"):
            del self.model_
        return self.partial_fit(X, y)

    def warm_start(self, model):
        """Adopt an externally-built :class:`LogisticModel`."""
        self.model_ = model
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = model.p
        return self

    def _require_fitted(self):
        if not hasattr(self, "model_"):
            raise InvalidInputError("classifier is not fitted")

    def decision_scores(self, X):
        """P(y = 1) per row."""
        self._require_fitted()
        X = as_matrix(X, "X")
        return expit(X @ self.model_.mu)

    def predict_proba(self, X):
        scores = self.decision_scores(X)
        return np.column_stack([1.0 - scores, scores])

    def predict(self, X):
        return (self.decision_scores(X) >= self.model_.threshold).astype(int)

    def set_threshold(self, threshold):
        self._require_fitted()
        self.model_ = replace(self.model_, threshold=float(threshold))
        return self
