"""End-to-end streaming pipelines and the built-in experiment runners.

A pipeline run has two phases.  The warm-up phase selects the Tikhonov
penalty by time-ordered cross validation, fits a ridge (or penalized
logistic) initializer, then streams the warm-up rows through the online
updates to build the residual baseline.  The real-time phase processes the
remaining rows one at a time: update the standardizer, predict before
learning, record interval/residual/drift information, then update the
model.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .datasets import (
    ENSEMBLE_COEFFS,
    GeneratorConfig,
    generate_arrays,
    inverse_logit_rate,
    logit_rate,
)
from .evaluation import (
    ConfusionTally,
    DdmTrace,
    RegressionTally,
    ddm_update,
    empirical_coverage,
    ichart_fit,
    log_loss_term,
    nelson_rule1,
    roc_auc,
)
from .exceptions import InvalidConfigError, InvalidPlanError
from .experts import (
    EnsembleHistory,
    EnsembleState,
    ExpertPool,
    squared_error_loss,
)
from .features import DictionarySpec, expert_grid
from .gaussian import GaussianModel
from .geometry import RunningStandardizer
from .logistic import LogisticModel
from .tuning import (
    LambdaGrid,
    SplitPlan,
    init_covariance,
    logistic_ridge_fit,
    ridge_fit,
    select_lambda,
)


@dataclass
class StreamRecord:
    """Per-step trace row emitted by the pipelines."""

    step: int
    phase: str  # "warmup" or "stream"
    y: float
    prediction: float
    lo: float = float("nan")
    hi: float = float("nan")
    residual: float = float("nan")
    nelson: bool = False
    ddm_status: str = ""


@dataclass
class RegressionStreamConfig:
    eta: float = 1e-3
    lam: float = None  # None -> select from the grid
    warmup: int = 250
    plan: SplitPlan = field(default_factory=SplitPlan)
    grid: LambdaGrid = field(default_factory=LambdaGrid.linear)
    dictionary: DictionarySpec = None  # None -> intercept + raw features
    interval_level: float = 0.95
    chart_basis: str = "warmup"  # or "expanding"
    freeze_sigma: bool = False
    standardize: bool = True


@dataclass
class RegressionStreamResult:
    records: list
    lambda_star: float
    score_table: object
    model: GaussianModel
    tally: RegressionTally
    chart: object
    coverage: float
    drift_steps: list
    mu_trajectory: list
    sigma_diag_trajectory: list
    metrics_rows: list  # (step, sst, sse, n, p, r2, sigma_hat, rmse)

    def final_metrics(self):
        return self.tally.metrics()


def _prepare_row(x_raw, standardizer, dictionary):
    if standardizer is not None:
        x_raw = standardizer.standardize_row(x_raw)
    return dictionary.transform(x_raw)


def run_regression_stream(X_raw, y, config):
    """Warm-up then real-time regression over (X_raw, y) rows.

    X_raw carries raw features only; the intercept comes from the
    dictionary expansion.
    """
    X_raw = np.asarray(X_raw, dtype=float)
    y = np.asarray(y, dtype=float)
    n, base_dim = X_raw.shape
    warm = config.warmup
    if not 0 < warm <= n:
        raise InvalidPlanError(f"warm-up length {warm} outside stream of {n}")
    dictionary = config.dictionary or DictionarySpec(base_dim=base_dim)
    if dictionary.base_dim != base_dim:
        raise InvalidConfigError(
            f"dictionary expects {dictionary.base_dim} raw features, data has {base_dim}"
        )

    standardizer = None
    if config.standardize:
        standardizer = RunningStandardizer.empty(base_dim).update_many(X_raw[:warm])

    Z_warm = np.vstack(
        [_prepare_row(row, standardizer, dictionary) for row in X_raw[:warm]]
    )
    y_warm = y[:warm]

    if config.lam is None:
        lambda_star, table = select_lambda(
            Z_warm, y_warm, config.plan, config.grid, metric="rmse"
        )
    else:
        lambda_star, table = float(config.lam), None

    mu0, noise_var0 = ridge_fit(Z_warm, y_warm, lambda_star)
    sigma0 = init_covariance(Z_warm, lambda_star, noise_var0)
    model = GaussianModel(
        mu=mu0, sigma=sigma0, lam=lambda_star, eta=config.eta, noise_var=noise_var0
    )

    p = dictionary.dimension()
    tally = RegressionTally(p=p)
    records = []
    mu_traj, sigma_traj, metrics_rows = [], [], []

    def snapshot(step):
        if tally.n > tally.p and tally.sst > 0:
            m = tally.metrics()
            metrics_rows.append(
                (step, m.sst, m.sse, m.n, m.p, m.r2, m.sigma_hat, m.rmse)
            )

    # Warm-up streaming: progressive residuals build the chart baseline.
    for t in range(warm):
        z = Z_warm[t]
        pred = model.predict(z)
        resid = tally.update(y_warm[t], pred)
        model = replace(
            model,
            noise_var=(
                tally.sse / (tally.n - p) if tally.n > p else model.noise_var
            ),
        )
        lo, hi = model.predict_interval(z, config.interval_level)
        records.append(
            StreamRecord(
                step=t + 1, phase="warmup", y=float(y_warm[t]), prediction=pred,
                lo=lo, hi=hi, residual=resid,
            )
        )
        stepped = model.update_step(z, y_warm[t])
        if config.freeze_sigma:
            stepped = replace(stepped, sigma=model.sigma)
        model = stepped
        mu_traj.append(model.mu.copy())
        sigma_traj.append(np.diag(model.sigma).copy())
        snapshot(t + 1)

    warm_residuals = list(tally.residuals)
    chart = ichart_fit(warm_residuals)

    drift_steps = []
    stream_intervals, stream_truths = [], []
    for t in range(warm, n):
        if standardizer is not None:
            standardizer = standardizer.update(X_raw[t])
        z = _prepare_row(X_raw[t], standardizer, dictionary)
        pred = model.predict(z)
        lo, hi = model.predict_interval(z, config.interval_level)
        resid = tally.update(y[t], pred)
        model = replace(model, noise_var=tally.sse / (tally.n - p))
        if config.chart_basis == "expanding":
            chart = ichart_fit(list(tally.residuals))
        flagged = nelson_rule1(chart, resid)
        if flagged:
            drift_steps.append(t + 1)
        stream_intervals.append((lo, hi))
        stream_truths.append(y[t])
        records.append(
            StreamRecord(
                step=t + 1, phase="stream", y=float(y[t]), prediction=pred,
                lo=lo, hi=hi, residual=resid, nelson=flagged,
            )
        )
        stepped = model.update_step(z, y[t])
        if config.freeze_sigma:
            stepped = replace(stepped, sigma=model.sigma)
        model = stepped
        mu_traj.append(model.mu.copy())
        sigma_traj.append(np.diag(model.sigma).copy())
        snapshot(t + 1)

    coverage = (
        empirical_coverage(stream_intervals, stream_truths)
        if stream_intervals
        else float("nan")
    )
    return RegressionStreamResult(
        records=records, lambda_star=lambda_star, score_table=table, model=model,
        tally=tally, chart=chart, coverage=coverage, drift_steps=drift_steps,
        mu_trajectory=mu_traj, sigma_diag_trajectory=sigma_traj,
        metrics_rows=metrics_rows,
    )


@dataclass
class ClassificationStreamConfig:
    eta: float = 0.1
    lam: float = None  # None -> select from the grid by accuracy
    warmup: int = 250
    plan: SplitPlan = field(
        default_factory=lambda: SplitPlan(initial_train=100, step=25, horizon=25, n_splits=5)
    )
    grid: LambdaGrid = field(default_factory=LambdaGrid.linear)
    dictionary: DictionarySpec = None
    threshold: float = 0.5
    standardize: bool = False
    ddm_min_steps: int = 30


@dataclass
class ClassificationStreamResult:
    records: list
    lambda_star: float
    score_table: object
    model: LogisticModel
    scores: np.ndarray  # pre-update stream scores
    labels: np.ndarray
    auc: float
    optimal_threshold: float
    confusion: ConfusionTally
    total_log_loss: float
    ddm_events: list  # (step, status) for warning/drift
    mu_trajectory: list


def run_classification_stream(X_raw, y, config):
    """Warm-up then real-time binary classification; scores are pre-update."""
    X_raw = np.asarray(X_raw, dtype=float)
    y = np.asarray(y, dtype=float)
    n, base_dim = X_raw.shape
    warm = config.warmup
    if not 0 < warm < n:
        raise InvalidPlanError(f"warm-up length {warm} outside stream of {n}")
    dictionary = config.dictionary or DictionarySpec(base_dim=base_dim)

    standardizer = None
    if config.standardize:
        standardizer = RunningStandardizer.empty(base_dim).update_many(X_raw[:warm])
    Z_warm = np.vstack(
        [_prepare_row(row, standardizer, dictionary) for row in X_raw[:warm]]
    )
    y_warm = y[:warm]

    if config.lam is None:
        lambda_star, table = select_lambda(
            Z_warm, y_warm, config.plan, config.grid, metric="accuracy"
        )
    else:
        lambda_star, table = float(config.lam), None

    mu0 = logistic_ridge_fit(Z_warm, y_warm, lambda_star)
    p = dictionary.dimension()
    model = LogisticModel(
        mu=mu0, sigma=np.eye(p), lam=lambda_star, eta=config.eta,
        threshold=config.threshold,
    )

    records, mu_traj = [], []
    scores, labels = [], []
    ddm = DdmTrace(min_steps=config.ddm_min_steps)
    ddm_events = []  # status transitions only, to keep the event log readable
    prev_status = "stable"
    confusion = ConfusionTally()
    total_log_loss = 0.0

    for t in range(warm, n):
        if standardizer is not None:
            standardizer = standardizer.update(X_raw[t])
        z = _prepare_row(X_raw[t], standardizer, dictionary)
        prob = model.predict_proba(z)
        pred = model.classify(z)
        err = int(pred != int(y[t]))
        confusion.update(int(y[t]), pred)
        total_log_loss += log_loss_term(prob, y[t])
        ddm, status = ddm_update(ddm, err)
        if status != prev_status and status != "stable":
            ddm_events.append((t + 1, status))
        prev_status = status
        scores.append(prob)
        labels.append(float(y[t]))
        records.append(
            StreamRecord(
                step=t + 1, phase="stream", y=float(y[t]), prediction=prob,
                residual=float(err), ddm_status=status,
            )
        )
        model = model.update_step(z, y[t])
        mu_traj.append(model.mu.copy())

    scores = np.asarray(scores)
    labels = np.asarray(labels)
    auc, opt_thr = roc_auc(scores, labels)
    return ClassificationStreamResult(
        records=records, lambda_star=lambda_star, score_table=table, model=model,
        scores=scores, labels=labels, auc=auc, optimal_threshold=opt_thr,
        confusion=confusion, total_log_loss=total_log_loss,
        ddm_events=ddm_events, mu_trajectory=mu_traj,
    )


# ---------------------------------------------------------------------------
# Experiment 1: noisy-line Monte Carlo, vectorized across replicates.
# ---------------------------------------------------------------------------


@dataclass
class LineReplicateResults:
    slope: np.ndarray
    r2: np.ndarray
    sigma_hat: np.ndarray
    rmse: np.ndarray
    sigma_weight: np.ndarray
    predictions_first: np.ndarray  # pre-update predictions of replicate 0
    y_first: np.ndarray
    mu_trajectory_first: np.ndarray

    def summary(self):
        lo, hi = np.quantile(self.slope, [0.025, 0.975])
        return {
            "mean_slope": float(np.mean(self.slope)),
            "slope_q025": float(lo),
            "slope_q975": float(hi),
            "mean_r2": float(np.mean(self.r2)),
            "mean_sigma_hat": float(np.mean(self.sigma_hat)),
            "mean_rmse": float(np.mean(self.rmse)),
        }


def replicate_seeds(seed, n_replicates):
    """Deterministic per-replicate seeds via SeedSequence state expansion."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n_replicates)]


def run_line_replicates(n_replicates, n, noise, eta, lam=0.0, seed=0):
    """All replicates advance in lockstep; each column step applies the same
    scalar-dimension update as GaussianModel.update_step (tested equivalent).
    """
    seeds = replicate_seeds(seed, n_replicates)
    Xs = np.empty((n_replicates, n))
    Ys = np.empty((n_replicates, n))
    for r, s in enumerate(seeds):
        X, yv = generate_arrays(GeneratorConfig(experiment=1, n=n, noise=noise, seed=s))
        Xs[r] = X[:, 0]
        Ys[r] = yv

    R = n_replicates
    mu = np.zeros(R)
    sigma = np.ones(R)
    sse = np.zeros(R)
    sy = np.zeros(R)
    syy = np.zeros(R)
    preds_first = np.empty(n)
    mu_first = np.empty(n)
    for t in range(n):
        x = Xs[:, t]
        yt = Ys[:, t]
        pred = x * mu
        preds_first[t] = pred[0]
        resid = yt - pred
        sse += resid * resid
        sy += yt
        syy += yt * yt
        mu = mu - eta * (2.0 * x * (x * mu - yt) + 2.0 * lam * mu)
        sigma = np.maximum(sigma - eta * (x * x + lam), 0.0)
        mu_first[t] = mu[0]

    sst = syy - sy * sy / n
    r2 = 1.0 - sse / sst
    sigma_hat = np.sqrt(sse / (n - 1))
    rmse = np.sqrt(sse / n)
    return LineReplicateResults(
        slope=mu, r2=r2, sigma_hat=sigma_hat, rmse=rmse, sigma_weight=sigma,
        predictions_first=preds_first, y_first=Ys[0], mu_trajectory_first=mu_first,
    )


# ---------------------------------------------------------------------------
# Experiment 4: fixed expert pool on the four-factor generator.
# ---------------------------------------------------------------------------


def four_factor_experts():
    """The ten reference predictors used by the ensemble benchmark."""
    b = ENSEMBLE_COEFFS

    def single(i):
        return lambda x: x[i]

    def affine(i):
        return lambda x: b[0] + b[i + 1] * x[i]

    experts = [single(i) for i in range(4)]
    experts += [affine(i) for i in range(4)]
    experts.append(lambda x: b[0] + b[1] * x[0] + b[2] * x[1] + b[3] * x[2])
    experts.append(lambda x: b[0] + x @ b[1:])
    labels = [f"E{i}" for i in range(1, 11)]
    return ExpertPool(experts=tuple(experts), labels=tuple(labels))


@dataclass
class EnsembleRunResult:
    history: EnsembleHistory
    state: EnsembleState
    pool: ExpertPool
    records: list  # (step, y, weighted_pred, best_pred, best_index)
    regret: object

    def weight_at(self, step):
        """Post-update weights after the given 1-based step."""
        return self.history.weight_matrix()[step - 1]


def run_expert_stream(pool, X, y, eta=0.1, loss_clip=10.0):
    """Stream (X, y) through a weighted expert ensemble, predicting before
    each weight update."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    state = EnsembleState.uniform(pool.n, eta=eta)
    history = EnsembleHistory(initial_weights=state.weights.copy())
    records = []
    for t in range(X.shape[0]):
        preds = pool.predictions(X[t])
        weighted = float(state.weights @ preds)
        best_idx = int(np.argmax(state.weights))
        losses = squared_error_loss(preds, y[t], clip=loss_clip)
        state = state.update_weights(losses)
        history.record(losses, state)
        records.append((t + 1, float(y[t]), weighted, float(preds[best_idx]), best_idx))
    regret = history.check_regret()
    return EnsembleRunResult(
        history=history, state=state, pool=pool, records=records, regret=regret
    )


def run_experiment4(n=100, eta=0.1, noise=0.5, loss_clip=10.0, seed=0):
    X, y = generate_arrays(GeneratorConfig(experiment=4, n=n, noise=noise, seed=seed))
    return run_expert_stream(four_factor_experts(), X, y, eta=eta, loss_clip=loss_clip)


# ---------------------------------------------------------------------------
# Experiment 6: ensemble of dictionary-augmented adaptive regressors.
# ---------------------------------------------------------------------------


@dataclass
class DictionaryEnsembleResult:
    history: EnsembleHistory
    state: EnsembleState
    specs: list
    records: list
    lambda_stars: list


def run_dictionary_ensemble(
    X_raw,
    y,
    warmup,
    eta_model=1e-3,
    eta_weights=0.1,
    loss_clip=10.0,
    plan=None,
    grid=None,
):
    """Nine dictionary-augmented online regressors weighted by expert advice.

    Each expert standardizes shared raw features, expands them with its own
    dictionary, warm-up fits a ridge initializer (with its own selected
    penalty), then updates online.  Ensemble weights advance on clamped
    squared prediction errors from the warm-up stream onward.
    """
    X_raw = np.asarray(X_raw, dtype=float)
    y = np.asarray(y, dtype=float)
    n, base_dim = X_raw.shape
    if not 0 < warmup < n:
        raise InvalidPlanError("warm-up must be inside the stream")
    plan = plan or SplitPlan(initial_train=50, step=5, horizon=5, n_splits=10)
    grid = grid or LambdaGrid.linear(0.0, 1.0, 10)
    specs = expert_grid(base_dim)

    standardizer = RunningStandardizer.empty(base_dim).update_many(X_raw[:warmup])
    models = []
    lambda_stars = []
    for spec in specs:
        Z = np.vstack(
            [spec.transform(standardizer.standardize_row(r)) for r in X_raw[:warmup]]
        )
        lam, _ = select_lambda(Z, y[:warmup], plan, grid, metric="rmse")
        mu0, nv0 = ridge_fit(Z, y[:warmup], lam)
        sigma0 = init_covariance(Z, lam, nv0)
        models.append(
            GaussianModel(mu=mu0, sigma=sigma0, lam=lam, eta=eta_model, noise_var=nv0)
        )
        lambda_stars.append(lam)

    state = EnsembleState.uniform(len(specs), eta=eta_weights)
    history = EnsembleHistory(initial_weights=state.weights.copy())
    records = []
    for t in range(n):
        if t >= warmup:
            standardizer = standardizer.update(X_raw[t])
        x_std = standardizer.standardize_row(X_raw[t])
        zs = [spec.transform(x_std) for spec in specs]
        preds = np.array([m.predict(z) for m, z in zip(models, zs)])
        weighted = float(state.weights @ preds)
        losses = squared_error_loss(preds, y[t], clip=loss_clip)
        state = state.update_weights(losses)
        history.record(losses, state)
        models = [m.update_step(z, y[t]) for m, z in zip(models, zs)]
        records.append((t + 1, float(y[t]), weighted))
    return DictionaryEnsembleResult(
        history=history, state=state, specs=specs, records=records,
        lambda_stars=lambda_stars,
    )
