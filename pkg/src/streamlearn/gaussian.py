"""Online linear regression with a Gaussian law over the weight vector.

The learner keeps a multivariate normal N(mu, sigma) over regression
weights.  Each observation (x, y) contributes the closed-form expected
quadratic loss

    y^2 - 2 y x'mu + x'Sigma x + (x'mu)^2 + lam (tr Sigma + mu'mu)

whose exact gradients drive one projected gradient step per observation:
mu moves along its gradient, sigma takes a gradient step and is projected
back onto the positive-semidefinite cone.
"""

import json
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator, RegressorMixin

from ._validation import as_matrix, as_vector
from .evaluation import RegressionTally
from .exceptions import InvalidInputError
from .geometry import project_psd, symmetrize

PSD_TOL = 1e-10


@dataclass(frozen=True)
class GaussianModel:
    """Immutable state of the Gaussian-weight regressor.

    Fields
    ------
    mu : array, shape (p,)
        Mean of the weight law; also the point-prediction coefficients.
    sigma : array, shape (p, p)
        Covariance of the weight law; kept positive semidefinite.
    lam : float
        Tikhonov strength applied to both mu and sigma.
    eta : float
        Learning rate of the gradient updates.
    noise_var : float
        Residual variance estimate used by prediction intervals; maintained
        externally (see :class:`OnlineGaussianRegressor`) and left untouched
        by :meth:`update_step`.
    """

    mu: np.ndarray
    sigma: np.ndarray
    lam: float = 0.0
    eta: float = 0.01
    noise_var: float = 0.0

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
        if not self.noise_var >= 0.0:
            raise InvalidInputError("noise_var must be >= 0")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "noise_var", float(self.noise_var))

    @classmethod
    def initial(cls, p, lam=0.0, eta=0.01, sigma_scale=1.0, noise_var=0.0):
        """Zero mean and isotropic covariance of the given dimension."""
        return cls(
            mu=np.zeros(p),
            sigma=np.eye(p) * sigma_scale,
            lam=lam,
            eta=eta,
            noise_var=noise_var,
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

    def expected_loss(self, x, y):
        """Closed-form expectation of the regularized quadratic loss."""
        x = self._check_x(x)
        y = float(y)
        xm = x @ self.mu
        quad = y * y - 2.0 * y * xm + x @ self.sigma @ x + xm * xm
        reg = self.lam * (np.trace(self.sigma) + self.mu @ self.mu)
        return float(quad + reg)

    def gradients(self, x, y):
        """Exact gradients of :meth:`expected_loss` in (mu, sigma)."""
        x = self._check_x(x)
        y = float(y)
        grad_mu = 2.0 * x * (x @ self.mu - y) + 2.0 * self.lam * self.mu
        grad_sigma = np.outer(x, x) + self.lam * np.eye(self.p)
        return grad_mu, grad_sigma

    def update_step(self, x, y):
        """One projected gradient step on (mu, sigma) for observation (x, y)."""
        grad_mu, grad_sigma = self.gradients(x, y)
        mu = self.mu - self.eta * grad_mu
        sigma = project_psd(self.sigma - self.eta * grad_sigma)
        return replace(self, mu=mu, sigma=sigma)

    def predict(self, x):
        """Conditional-expectation point prediction x'mu."""
        x = self._check_x(x)
        return float(x @ self.mu)

    def predict_distribution(self, x):
        """Parameters (mean, variance) of the label law induced by the weight law."""
        x = self._check_x(x)
        return float(x @ self.mu), float(x @ self.sigma @ x)

    def predict_interval(self, x, level=0.95):
        """Two-sided prediction interval combining weight and noise variance."""
        if not 0.0 < level < 1.0:
            raise InvalidInputError(f"level must be in (0, 1), got {level}")
        mean, var = self.predict_distribution(x)
        z = stats.norm.ppf(0.5 + level / 2.0)
        half = z * np.sqrt(max(var, 0.0) + self.noise_var)
        return mean - half, mean + half

    def to_json(self):
        return json.dumps(
            {
                "mu": self.mu.tolist(),
                "sigma": self.sigma.tolist(),
                "lambda": self.lam,
                "eta": self.eta,
                "noise_var": self.noise_var,
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
            noise_var=data.get("noise_var", 0.0),
        )


class OnlineGaussianRegressor(RegressorMixin, BaseEstimator):
    """Streaming linear regressor over a Gaussian weight law.

    ``fit``/``partial_fit`` consume rows of an already-built model matrix
    sequentially (the updates are order dependent).  Residuals of the
    prediction made *before* each update feed a running tally, whose
    ``sse / (n - p)`` estimate is injected into the model as ``noise_var``
    for prediction intervals.

    Parameters
    ----------
    eta : float
        Learning rate.
    lam : float
        Tikhonov strength.
    mu0 : array or None
        Initial weight mean; zeros when None.
    sigma0 : array, float or None
        Initial weight covariance; identity when None, scaled identity when
        a float.
    freeze_sigma : bool
        Skip the covariance update (useful after warm-up, since the sigma
        gradient does not depend on sigma and keeps shrinking it).

    Attributes
    ----------
    model_ : GaussianModel
        Current state.
    tally_ : RegressionTally
        Streaming residual accounting behind ``noise_var_``.
    """

    def __init__(self, eta=0.01, lam=0.0, mu0=None, sigma0=None, freeze_sigma=False):
        self.eta = eta
        self.lam = lam
        self.mu0 = mu0
        self.sigma0 = sigma0
        self.freeze_sigma = freeze_sigma

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
        self.model_ = GaussianModel(mu=mu, sigma=sigma, lam=self.lam, eta=self.eta)
        self.tally_ = RegressionTally(p=p)
        self.n_features_in_ = p

    @property
    def noise_var_(self):
        """Current residual-variance estimate sse / (n - p), 0 until n > p."""
        if self.tally_.n > self.tally_.p:
            return self.tally_.sse / (self.tally_.n - self.tally_.p)
        return 0.0

    def partial_fit(self, X, y):
        X = as_matrix(X, "X")
        y = as_vector(y, "y")
        if y.shape[0] != X.shape[0]:
            raise InvalidInputError("X and y disagree on sample count")
        if not hasattr(self, "model_"):
            self._init_state(X.shape[1])
        model = self.model_
        for xi, yi in zip(X, y):
            self.tally_.update(yi, xi @ model.mu)
            stepped = model.update_step(xi, yi)
            if self.freeze_sigma:
                stepped = replace(stepped, sigma=model.sigma)
            model = stepped
        self.model_ = replace(model, noise_var=self.noise_var_)
        return self

    def fit(self, X, y):
        """Reset state and stream through (X, y) in row order."""
        for attr in ("model_", "tally_", "n_features_in_"):
            if hasattr(self, attr):
                delattr(self, attr)
        return self.partial_fit(X, y)

    def warm_start(self, model):
        """Adopt an externally-built :class:`GaussianModel` (e.g. a ridge init)."""
        self.model_ = model
        self.tally_ = RegressionTally(p=model.p)
        self.n_features_in_ = model.p
        return self

    def _require_fitted(self):
        if not hasattr(self, "model_"):
            raise InvalidInputError("regressor is not fitted")

    def predict(self, X):
        self._require_fitted()
        X = as_matrix(X, "X")
        return X @ self.model_.mu

    def predict_interval(self, X, level=0.95):
        """Per-row (lo, hi) bounds at the given coverage level."""
        self._require_fitted()
        X = as_matrix(X, "X")
        live = replace(self.model_, noise_var=self.noise_var_)
        bounds = np.array([live.predict_interval(row, level) for row in X])
        return bounds[:, 0], bounds[:, 1]

    def predict_distribution(self, X):
        self._require_fitted()
        X = as_matrix(X, "X")
        out = np.array([self.model_.predict_distribution(row) for row in X])
        return out[:, 0], out[:, 1]
