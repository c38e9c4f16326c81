"""Feature-dictionary construction: intercept, interactions, squares, trig terms.

The dictionary maps a raw feature vector to the augmented basis the linear
learners operate in.  Output ordering is fixed: intercept, raw features,
pairwise interactions (i < j in lexicographic index order), squares, sines,
cosines.
"""

import itertools
import json
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import as_matrix, as_vector
from .exceptions import InvalidConfigError, InvalidInputError


@dataclass(frozen=True)
class DictionarySpec:
    """Declarative description of the feature augmentation.

    ``trig_frequency`` scales the argument of the sine/cosine terms; raw
    features are expected to be standardized first so the trig arguments
    stay bounded.
    """

    base_dim: int
    include_intercept: bool = True
    interactions: bool = False
    squares: bool = False
    sine: bool = False
    cosine: bool = False
    trig_frequency: float = 1.0

    def __post_init__(self):
        if self.base_dim < 1:
            raise InvalidConfigError("base_dim must be >= 1")

    def dimension(self):
        """Number of output features."""
        p = self.base_dim
        total = p
        if self.include_intercept:
            total += 1
        if self.interactions:
            total += p * (p - 1) // 2
        if self.squares:
            total += p
        if self.sine:
            total += p
        if self.cosine:
            total += p
        return total

    def feature_names(self, input_features=None):
        if input_features is None:
            input_features = [f"x{i}" for i in range(self.base_dim)]
        if len(input_features) != self.base_dim:
            raise InvalidInputError(
                f"expected {self.base_dim} input feature names"
            )
        names = []
        if self.include_intercept:
            names.append("1")
        names.extend(input_features)
        if self.interactions:
            for i, j in itertools.combinations(range(self.base_dim), 2):
                names.append(f"{input_features[i]}*{input_features[j]}")
        if self.squares:
            names.extend(f"{f}^2" for f in input_features)
        if self.sine:
            names.extend(f"sin({f})" for f in input_features)
        if self.cosine:
            names.extend(f"cos({f})" for f in input_features)
        return names

    def transform(self, x):
        """Map one raw feature vector to the augmented basis."""
        x = as_vector(x, "x")
        if x.shape[0] != self.base_dim:
            raise InvalidInputError(
                f"expected {self.base_dim} raw features, got {x.shape[0]}"
            )
        parts = []
        if self.include_intercept:
            parts.append(np.ones(1))
        parts.append(x)
        if self.interactions:
            idx = np.triu_indices(self.base_dim, k=1)
            parts.append(np.outer(x, x)[idx])
        if self.squares:
            parts.append(x * x)
        if self.sine:
            parts.append(np.sin(self.trig_frequency * x))
        if self.cosine:
            parts.append(np.cos(self.trig_frequency * x))
        return np.concatenate(parts)

    def transform_matrix(self, X):
        X = as_matrix(X, "X")
        return np.vstack([self.transform(row) for row in X])

    def to_json(self):
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, payload):
        data = json.loads(payload) if isinstance(payload, str) else dict(payload)
        try:
            return cls(**data)
        except TypeError as exc:
            raise InvalidConfigError(f"bad dictionary spec: {exc}") from exc


def dimension(spec):
    return spec.dimension()


def transform(spec, x):
    return spec.transform(x)


# Flag table for the nine-expert dictionary grid:
# (interactions, squares, sine, cosine) per expert, E1..E9.
_EXPERT_FLAGS = [
    (False, False, False, False),
    (True, False, False, False),
    (False, True, False, False),
    (False, False, True, False),
    (False, False, False, True),
    (True, True, False, False),
    (True, True, True, False),
    (True, True, True, True),
    (False, False, True, True),
]


def expert_grid(base_dim):
    """The nine standard dictionary configurations, E1 through E9."""
    if base_dim < 1:
        raise InvalidConfigError("base_dim must be >= 1")
    return [
        DictionarySpec(
            base_dim=base_dim,
            include_intercept=True,
            interactions=inter,
            squares=sq,
            sine=sin,
            cosine=cos,
        )
        for inter, sq, sin, cos in _EXPERT_FLAGS
    ]


class DictionaryExpander(TransformerMixin, BaseEstimator):
    """sklearn-style transformer wrapping a :class:`DictionarySpec`.

    Parameters
    ----------
    include_intercept, interactions, squares, sine, cosine : bool
        Which augmentation blocks to emit.
    trig_frequency : float
        Frequency of the sine/cosine terms.
    """

    def __init__(
        self,
        include_intercept=True,
        interactions=False,
        squares=False,
        sine=False,
        cosine=False,
        trig_frequency=1.0,
    ):
        self.include_intercept = include_intercept
        self.interactions = interactions
        self.squares = squares
        self.sine = sine
        self.cosine = cosine
        self.trig_frequency = trig_frequency

    def fit(self, X, y=None):
        X = as_matrix(X, "X")
        self.n_features_in_ = X.shape[1]
        self.spec_ = DictionarySpec(
            base_dim=X.shape[1],
            include_intercept=self.include_intercept,
            interactions=self.interactions,
            squares=self.squares,
            sine=self.sine,
            cosine=self.cosine,
            trig_frequency=self.trig_frequency,
        )
        return self

    def transform(self, X):
        if not hasattr(self, "spec_"):
            raise InvalidInputError("transformer is not fitted")
        return self.spec_.transform_matrix(X)

    def get_feature_names_out(self, input_features=None):
        if not hasattr(self, "spec_"):
            raise InvalidInputError("transformer is not fitted")
        return np.asarray(self.spec_.feature_names(input_features), dtype=object)
