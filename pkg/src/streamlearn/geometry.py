"""Dense linear-algebra and projection primitives shared by the learners.

Symmetric matrices and probability vectors are represented as plain numpy
arrays; the constructors here (``symmetrize``, ``project_simplex``) are the
only sanctioned way to build them, so the invariants (symmetry, simplex
membership) are enforced at the boundary rather than by wrapper classes.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import as_square_matrix, as_vector
from .exceptions import (
    DegenerateFeatureError,
    InsufficientDataError,
    InvalidInputError,
)

SYMMETRY_TOL = 1e-10


def symmetrize(m):
    """Return (M + M^T) / 2 as a float array, validating shape and finiteness."""
    arr = as_square_matrix(m, "matrix")
    return (arr + arr.T) / 2.0


def eigh_symmetric(m):
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues, eigenvectors) with eigenvalues sorted in descending
    order and eigenvectors as columns, so ``V @ diag(w) @ V.T`` reconstructs
    the symmetrized input.
    """
    sym = symmetrize(m)
    w, v = np.linalg.eigh(sym)
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def project_psd(m):
    """Project a symmetric matrix onto the positive-semidefinite cone.

    Eigenvalues are clipped at exactly zero and the matrix rebuilt from the
    retained eigenvectors; inputs are symmetrized first because gradient-step
    drift can break symmetry at roundoff level.
    """
    sym = symmetrize(m)
    if sym.shape == (1, 1):
        return np.maximum(sym, 0.0)
    w, v = np.linalg.eigh(sym)
    if w[0] >= 0.0:
        return sym
    w_clipped = np.maximum(w, 0.0)
    out = (v * w_clipped) @ v.T
    return (out + out.T) / 2.0


def project_simplex(z):
    """Euclidean projection of a vector onto the probability simplex.

    Sort-then-threshold algorithm: find the support size rho and shift tau
    so that ``max(z - tau, 0)`` sums to one.
    """
    vec = as_vector(z, "z")
    if vec.size == 0:
        raise InvalidInputError("cannot project an empty vector")
    if vec.size == 1:
        return np.ones(1)
    u = np.sort(vec)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, vec.size + 1)
    cond = u - (css - 1.0) / idx > 0
    rho = int(np.nonzero(cond)[0][-1]) + 1
    tau = (css[rho - 1] - 1.0) / rho
    return np.maximum(vec - tau, 0.0)


def check_prob_vector(w, tol=1e-12):
    """Validate membership in the simplex: entries in [0, 1], summing to 1."""
    vec = as_vector(w, "weights")
    if vec.size == 0:
        raise InvalidInputError("weight vector is empty")
    if np.any(vec < -tol) or np.any(vec > 1.0 + tol):
        raise InvalidInputError("weights must lie in [0, 1]")
    if abs(vec.sum() - 1.0) > max(tol, 1e-12 * vec.size):
        raise InvalidInputError(f"weights sum to {vec.sum()!r}, expected 1")
    return vec


@dataclass(frozen=True)
class RunningStandardizer:
    """Single-pass per-feature mean/variance tracker (Welford update).

    ``m2`` holds the running sum of squared deviations, so the sample
    variance is ``m2 / (count - 1)``.  ``intercept_col`` marks a column that
    is passed through unscaled (its variance is zero by construction).
    Instances are immutable; ``update`` returns a new tracker.
    """

    count: int = 0
    mean: np.ndarray = field(default=None)
    m2: np.ndarray = field(default=None)
    intercept_col: int | None = None

    @classmethod
    def empty(cls, dim, intercept_col=None):
        return cls(
            count=0,
            mean=np.zeros(dim),
            m2=np.zeros(dim),
            intercept_col=intercept_col,
        )

    @property
    def dim(self):
        return self.mean.shape[0]

    def update(self, x):
        x = as_vector(x, "x")
        if x.shape[0] != self.dim:
            raise InvalidInputError(
                f"sample has {x.shape[0]} features, tracker expects {self.dim}"
            )
        count = self.count + 1
        delta = x - self.mean
        mean = self.mean + delta / count
        m2 = self.m2 + delta * (x - mean)
        return replace(self, count=count, mean=mean, m2=m2)

    def update_many(self, rows):
        state = self
        for row in rows:
            state = state.update(row)
        return state

    def variance(self):
        """Sample variance per feature; zeros until two samples are seen."""
        if self.count < 2:
            return np.zeros(self.dim)
        return self.m2 / (self.count - 1)

    def std(self):
        return np.sqrt(self.variance())

    def _scale(self):
        std = self.std()
        mask = np.ones(self.dim, dtype=bool)
        if self.intercept_col is not None:
            mask[self.intercept_col] = False
        if np.any(std[mask] <= 0.0):
            bad = int(np.nonzero(mask & (std <= 0.0))[0][0])
            raise DegenerateFeatureError(
                f"feature {bad} has zero standard deviation"
            )
        return std, mask

    def standardize_row(self, x):
        """(x - mean) / std per feature; the intercept column passes through."""
        x = as_vector(x, "x")
        if x.shape[0] != self.dim:
            raise InvalidInputError(
                f"row has {x.shape[0]} features, tracker expects {self.dim}"
            )
        if self.count < 2:
            raise InsufficientDataError(
                "standardization needs at least two samples"
            )
        std, mask = self._scale()
        out = x.copy()
        out[mask] = (x[mask] - self.mean[mask]) / std[mask]
        return out

    def destandardize_row(self, z):
        """Inverse of :meth:`standardize_row`."""
        z = as_vector(z, "z")
        if self.count < 2:
            raise InsufficientDataError(
                "standardization needs at least two samples"
            )
        std, mask = self._scale()
        out = z.copy()
        out[mask] = z[mask] * std[mask] + self.mean[mask]
        return out

    def standardize_matrix(self, X):
        return np.vstack([self.standardize_row(row) for row in np.asarray(X, dtype=float)])
