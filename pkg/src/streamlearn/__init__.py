"""Streaming learners with Gaussian weight laws, expert ensembles, warm-up
tuning, prediction intervals, and drift monitoring."""

from .datasets import (
    CsvSchema,
    GeneratorConfig,
    Observation,
    generate,
    generate_arrays,
    inverse_logit_rate,
    load_csv_stream,
    logit_rate,
)
from .evaluation import (
    ConfusionTally,
    DdmTrace,
    IChart,
    RegressionTally,
    classification_metrics,
    ddm_update,
    empirical_coverage,
    ichart_fit,
    nelson_rule1,
    regression_metrics,
    roc_auc,
)
from .exceptions import (
    DegenerateFeatureError,
    DegenerateLabelsError,
    DegenerateTargetError,
    ExpertError,
    InsufficientDataError,
    InvalidConfigError,
    InvalidInputError,
    InvalidPlanError,
    ParseError,
    SchemaError,
    SingularSystemError,
    StreamLearnError,
)
from .experts import (
    EnsembleHistory,
    EnsembleState,
    ExpertPool,
    OnlineExpertEnsemble,
    offline_best_weights,
    regret_check,
    squared_error_loss,
)
from .features import DictionaryExpander, DictionarySpec, expert_grid
from .gaussian import GaussianModel, OnlineGaussianRegressor
from .geometry import (
    RunningStandardizer,
    eigh_symmetric,
    project_psd,
    project_simplex,
    symmetrize,
)
from .logistic import LogisticModel, OnlineLogisticClassifier
from .tuning import (
    LambdaGrid,
    ScoreTable,
    SplitPlan,
    init_covariance,
    logistic_ridge_fit,
    make_splits,
    ridge_fit,
    select_lambda,
)

__version__ = "0.1.0"

__all__ = [
    "CsvSchema",
    "GeneratorConfig",
    "Observation",
    "generate",
    "generate_arrays",
    "inverse_logit_rate",
    "load_csv_stream",
    "logit_rate",
    "ConfusionTally",
    "DdmTrace",
    "IChart",
    "RegressionTally",
    "classification_metrics",
    "ddm_update",
    "empirical_coverage",
    "ichart_fit",
    "nelson_rule1",
    "regression_metrics",
    "roc_auc",
    "StreamLearnError",
    "InvalidInputError",
    "InvalidConfigError",
    "InvalidPlanError",
    "DegenerateFeatureError",
    "DegenerateTargetError",
    "DegenerateLabelsError",
    "SingularSystemError",
    "InsufficientDataError",
    "SchemaError",
    "ParseError",
    "ExpertError",
    "EnsembleHistory",
    "EnsembleState",
    "ExpertPool",
    "OnlineExpertEnsemble",
    "offline_best_weights",
    "regret_check",
    "squared_error_loss",
    "DictionaryExpander",
    "DictionarySpec",
    "expert_grid",
    "GaussianModel",
    "OnlineGaussianRegressor",
    "RunningStandardizer",
    "eigh_symmetric",
    "project_psd",
    "project_simplex",
    "symmetrize",
    "LogisticModel",
    "OnlineLogisticClassifier",
    "LambdaGrid",
    "ScoreTable",
    "SplitPlan",
    "init_covariance",
    "logistic_ridge_fit",
    "make_splits",
    "ridge_fit",
    "select_lambda",
]
