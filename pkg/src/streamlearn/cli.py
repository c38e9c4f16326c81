"""Command-line surface: run built-in experiments or stream-fit CSV data.

Usage:
    streamlearn run-experiment ID [options]
    streamlearn fit-stream --model gaussian|logistic (--input data.csv | --synthetic 2|3) [options]

Options may also be supplied as a JSON file via --config; explicit flags
override file values.  Exit codes: 0 success, 1 configuration error,
2 I/O error, 3 numeric failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from .datasets import (
    CsvSchema,
    GeneratorConfig,
    generate_arrays,
    inverse_logit_rate,
    load_csv_stream,
    logit_rate,
)
from .exceptions import (
    InvalidConfigError,
    InvalidInputError,
    InvalidPlanError,
    ParseError,
    SchemaError,
    StreamLearnError,
)
from .experiments import (
    ClassificationStreamConfig,
    RegressionStreamConfig,
    run_classification_stream,
    run_dictionary_ensemble,
    run_experiment4,
    run_line_replicates,
    run_regression_stream,
)
from .features import DictionarySpec
from .reports import (
    DRIFT_HEADER,
    METRICS_HEADER,
    PREDICTIONS_HEADER,
    WEIGHTS_HEADER,
    ensure_outdir,
    write_csv,
    write_summary,
)
from .tuning import LambdaGrid, SplitPlan


class _CliConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here is exit 1.
    def error(self, message):
        raise _CliConfigError(message)


def _build_parser():
    parser = _Parser(prog="streamlearn", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    exp = sub.add_parser("run-experiment", help="run a built-in experiment")
    exp.add_argument("experiment", type=int, help="experiment id, 1-7")
    _common_options(exp)
    exp.add_argument("--replicates", type=int, default=None)
    exp.add_argument("--noise", type=float, default=None)

    fit = sub.add_parser("fit-stream", help="stream-fit a model on CSV data")
    fit.add_argument("--model", choices=["gaussian", "logistic"], default=None)
    _common_options(fit)
    return parser


def _common_options(p):
    p.add_argument("--config", default=None, help="JSON file with option defaults")
    p.add_argument("--input", default=None, help="input CSV path")
    p.add_argument("--synthetic", type=int, default=None,
                   help="use the built-in generator of this experiment id")
    p.add_argument("--n", type=int, default=None, help="synthetic stream length")
    p.add_argument("--warmup", type=int, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--lam", type=float, default=None,
                   help="fixed penalty; omit to select from the grid")
    p.add_argument("--grid-size", type=int, default=None)
    p.add_argument("--grid-max", type=float, default=None)
    p.add_argument("--initial-train", type=int, default=None)
    p.add_argument("--split-step", type=int, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--n-splits", type=int, default=None)
    p.add_argument("--interval-level", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--outdir", default=None)
    p.add_argument("--label-transform", choices=["none", "logit-rate"], default=None)
    p.add_argument("--standardize", dest="standardize", action="store_true", default=None)
    p.add_argument("--no-standardize", dest="standardize", action="store_false")
    p.add_argument("--interactions", action="store_true", default=None)
    p.add_argument("--squares", action="store_true", default=None)
    p.add_argument("--sine", action="store_true", default=None)
    p.add_argument("--cosine", action="store_true", default=None)


def _merge_config(args):
    """Resolve option precedence: explicit flag > config file > None."""
    merged = {}
    if args.config is not None:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise InvalidConfigError("config file must hold a JSON object")
        merged.update(file_cfg)
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        if value is not None:
            merged[key] = value
    return merged


def _opt(cfg, key, default):
    value = cfg.get(key)
    return default if value is None else value


def _default_outdir(cfg):
    return _opt(cfg, "outdir", os.environ.get("STREAMLEARN_OUTDIR", "streamlearn-out"))


def _plan(cfg, initial, step, horizon, n_splits):
    return SplitPlan(
        initial_train=int(_opt(cfg, "initial_train", initial)),
        step=int(_opt(cfg, "split_step", step)),
        horizon=int(_opt(cfg, "horizon", horizon)),
        n_splits=int(_opt(cfg, "n_splits", n_splits)),
    )


def _grid(cfg):
    return LambdaGrid.linear(
        0.0, float(_opt(cfg, "grid_max", 1.0)), int(_opt(cfg, "grid_size", 30))
    )


def _dictionary(cfg, base_dim):
    return DictionarySpec(
        base_dim=base_dim,
        include_intercept=True,
        interactions=bool(_opt(cfg, "interactions", False)),
        squares=bool(_opt(cfg, "squares", False)),
        sine=bool(_opt(cfg, "sine", False)),
        cosine=bool(_opt(cfg, "cosine", False)),
    )


def _load_schema(cfg):
    raw = cfg.get("schema")
    if raw is None:
        raise InvalidConfigError(
            "CSV input needs a schema: pass --config with a 'schema' object "
            '{"columns": [["name", "float"], ...], "label": "name"}'
        )
    return CsvSchema(
        columns=tuple((c[0], c[1]) for c in raw["columns"]),
        label_column=raw["label"],
        feature_columns=tuple(raw["features"]) if "features" in raw else None,
    )


def _load_input(cfg, synthetic_default, n_default):
    """Rows from a CSV path or a built-in generator."""
    path = cfg.get("input")
    if path is not None:
        schema = _load_schema(cfg)
        observations, _ = load_csv_stream(path, schema)
        if not observations:
            raise SchemaError(f"{path} has no data rows")
        X = np.vstack([o.x for o in observations])
        y = np.array([o.y for o in observations])
        if _opt(cfg, "label_transform", "none") == "logit-rate":
            y = np.array([logit_rate(v) for v in y])
        return X, y
    synthetic = int(_opt(cfg, "synthetic", synthetic_default or 0))
    if synthetic not in (1, 2, 3, 4):
        raise InvalidConfigError("need --input CSV or a --synthetic generator id")
    n = int(_opt(cfg, "n", n_default))
    gen = GeneratorConfig(
        experiment=synthetic, n=n, noise=cfg.get("noise"),
        seed=int(_opt(cfg, "seed", 0)),
    )
    return generate_arrays(gen)


def _write_placeholder(outdir, names):
    headers = {
        "predictions.csv": PREDICTIONS_HEADER,
        "metrics.csv": METRICS_HEADER,
        "drift_events.csv": DRIFT_HEADER,
        "weights.csv": WEIGHTS_HEADER,
        "params_trajectory.csv": ["step"],
    }
    for name in names:
        write_csv(outdir / name, headers[name], [])


def _write_regression_outputs(outdir, result, level):
    write_csv(
        outdir / "predictions.csv",
        PREDICTIONS_HEADER,
        [
            (r.step, r.phase, r.y, r.prediction, r.lo, r.hi, r.residual)
            for r in result.records
        ],
    )
    p = len(result.mu_trajectory[0])
    write_csv(
        outdir / "params_trajectory.csv",
        ["step"] + [f"mu_{i}" for i in range(p)] + [f"sigma_{i}{i}" for i in range(p)],
        [
            (t + 1, *mu, *sd)
            for t, (mu, sd) in enumerate(
                zip(result.mu_trajectory, result.sigma_diag_trajectory)
            )
        ],
    )
    write_csv(outdir / "metrics.csv", METRICS_HEADER, result.metrics_rows)
    chart = result.chart
    drift_rows = []
    for r in result.records:
        if r.nelson:
            drift_rows.append((r.step, "nelson1", r.residual, chart.lower, chart.upper))
    write_csv(outdir / "drift_events.csv", DRIFT_HEADER, drift_rows)
    _write_placeholder(outdir, ["weights.csv"])
    if result.score_table is not None:
        result.score_table.write_csv(outdir / "lambda_scores.csv")
    final = result.final_metrics()
    return {
        "lambda_star": result.lambda_star,
        "coverage": result.coverage,
        "interval_level": level,
        "chart": {
            "upper": chart.upper, "center": chart.center, "lower": chart.lower,
        },
        "final_metrics": final._asdict(),
        "n_drift_events": len(result.drift_steps),
        "mu_final": list(result.model.mu),
    }


def _write_classification_outputs(outdir, result):
    write_csv(
        outdir / "predictions.csv",
        PREDICTIONS_HEADER,
        [
            (r.step, r.phase, r.y, r.prediction, r.lo, r.hi, r.residual)
            for r in result.records
        ],
    )
    p = len(result.mu_trajectory[0])
    write_csv(
        outdir / "params_trajectory.csv",
        ["step"] + [f"mu_{i}" for i in range(p)],
        [(t + 1, *mu) for t, mu in enumerate(result.mu_trajectory)],
    )
    cm = result.confusion.metrics()
    write_csv(
        outdir / "metrics.csv",
        ["step", "accuracy", "tpr", "tnr", "precision", "f1",
         "auc", "optimal_threshold", "total_log_loss"],
        [(
            result.records[-1].step, cm.accuracy, cm.tpr, cm.tnr, cm.precision,
            cm.f1, result.auc, result.optimal_threshold, result.total_log_loss,
        )],
    )
    write_csv(
        outdir / "drift_events.csv",
        ["step", "rule", "residual", "lower", "upper"],
        [(step, f"ddm_{status}", "", "", "") for step, status in result.ddm_events],
    )
    _write_placeholder(outdir, ["weights.csv"])
    if result.score_table is not None:
        result.score_table.write_csv(outdir / "lambda_scores.csv")
    return {
        "lambda_star": result.lambda_star,
        "auc": result.auc,
        "optimal_threshold": result.optimal_threshold,
        "metrics": cm._asdict(),
        "total_log_loss": result.total_log_loss,
        "n_ddm_events": len(result.ddm_events),
        "mu_final": list(result.model.mu),
    }


def _write_ensemble_outputs(outdir, history, records, extra_pred_cols=()):
    history.write_csv(outdir / "weights.csv")
    header = ["step", "y", "prediction"] + list(extra_pred_cols)
    write_csv(outdir / "predictions.csv", header, records)
    _write_placeholder(
        outdir, ["metrics.csv", "drift_events.csv", "params_trajectory.csv"]
    )


def _run_experiment1(cfg, outdir):
    replicates = int(_opt(cfg, "replicates", 100))
    n = int(_opt(cfg, "n", 10_000))
    noise = float(_opt(cfg, "noise", 0.1))
    eta = float(_opt(cfg, "eta", 0.1))
    lam = float(_opt(cfg, "lam", 0.0))
    seed = int(_opt(cfg, "seed", 0))
    res = run_line_replicates(replicates, n, noise, eta, lam=lam, seed=seed)
    write_csv(
        outdir / "metrics.csv",
        ["replicate", "slope", "r2", "sigma_hat", "rmse"],
        [
            (r, res.slope[r], res.r2[r], res.sigma_hat[r], res.rmse[r])
            for r in range(replicates)
        ],
    )
    resid = res.y_first - res.predictions_first
    write_csv(
        outdir / "predictions.csv",
        PREDICTIONS_HEADER,
        [
            (t + 1, "stream", res.y_first[t], res.predictions_first[t],
             float("nan"), float("nan"), resid[t])
            for t in range(n)
        ],
    )
    write_csv(
        outdir / "params_trajectory.csv",
        ["step", "mu_0"],
        [(t + 1, res.mu_trajectory_first[t]) for t in range(n)],
    )
    _write_placeholder(outdir, ["drift_events.csv", "weights.csv"])
    summary = res.summary()
    config_echo = {
        "replicates": replicates, "n": n, "noise": noise, "eta": eta, "lam": lam,
    }
    return config_echo, summary, seed


def _run_regression_experiment(cfg, synthetic_default):
    seed = int(_opt(cfg, "seed", 0))
    n_default = 500
    X, y = _load_input(cfg, synthetic_default, n_default)
    warmup = int(_opt(cfg, "warmup", min(250, max(2, X.shape[0] // 2))))
    stream_cfg = RegressionStreamConfig(
        eta=float(_opt(cfg, "eta", 1e-3)),
        lam=cfg.get("lam"),
        warmup=warmup,
        plan=_plan(cfg, 50, 5, 5, 40),
        grid=_grid(cfg),
        dictionary=_dictionary(cfg, X.shape[1]),
        interval_level=float(_opt(cfg, "interval_level", 0.95)),
        standardize=bool(_opt(cfg, "standardize", True)),
    )
    result = run_regression_stream(X, y, stream_cfg)
    config_echo = {
        "warmup": warmup, "eta": stream_cfg.eta,
        "interval_level": stream_cfg.interval_level,
        "standardize": stream_cfg.standardize,
        "n": int(X.shape[0]),
    }
    return result, stream_cfg, config_echo, seed


def _run_classification_experiment(cfg, synthetic_default, select_penalty):
    seed = int(_opt(cfg, "seed", 0))
    n_default = 2000 if select_penalty else 1000
    X, y = _load_input(cfg, synthetic_default, n_default)
    warmup = int(_opt(cfg, "warmup", X.shape[0] // 2))
    stream_cfg = ClassificationStreamConfig(
        eta=float(_opt(cfg, "eta", 0.1)),
        lam=cfg.get("lam") if select_penalty else float(_opt(cfg, "lam", 0.0)),
        warmup=warmup,
        plan=_plan(cfg, 300, 50, 100, 5) if select_penalty else _plan(cfg, 100, 25, 25, 5),
        grid=_grid(cfg),
        standardize=bool(_opt(cfg, "standardize", False)),
    )
    result = run_classification_stream(X, y, stream_cfg)
    config_echo = {
        "warmup": warmup, "eta": stream_cfg.eta, "n": int(X.shape[0]),
        "standardize": stream_cfg.standardize,
    }
    return result, config_echo, seed


def run_experiment(experiment, cfg):
    """Dispatch one experiment id; returns (results, summary payload pieces)."""
    outdir = ensure_outdir(_default_outdir(cfg))
    if experiment == 1:
        config_echo, summary, seed = _run_experiment1(cfg, outdir)
    elif experiment in (2, 5):
        result, stream_cfg, config_echo, seed = _run_regression_experiment(
            cfg, synthetic_default=2
        )
        summary = _write_regression_outputs(outdir, result, stream_cfg.interval_level)
        if _opt(cfg, "label_transform", "none") == "logit-rate":
            last = result.records[-1]
            summary["final_forecast_original_scale"] = {
                "prediction": inverse_logit_rate(last.prediction),
                "lo": inverse_logit_rate(last.lo),
                "hi": inverse_logit_rate(last.hi),
            }
    elif experiment in (3, 7):
        result, config_echo, seed = _run_classification_experiment(
            cfg, synthetic_default=3, select_penalty=(experiment == 7)
        )
        summary = _write_classification_outputs(outdir, result)
    elif experiment == 4:
        seed = int(_opt(cfg, "seed", 0))
        n = int(_opt(cfg, "n", 100))
        eta = float(_opt(cfg, "eta", 0.1))
        noise = float(_opt(cfg, "noise", 0.5))
        res = run_experiment4(n=n, eta=eta, noise=noise, seed=seed)
        _write_ensemble_outputs(
            outdir, res.history,
            [(s, yv, wp, bp, bi) for s, yv, wp, bp, bi in res.records],
            extra_pred_cols=("best_prediction", "best_index"),
        )
        weights = res.state.weights
        config_echo = {"n": n, "eta": eta, "noise": noise}
        summary = {
            "final_weights": {
                res.pool.labels[i]: float(weights[i]) for i in range(res.pool.n)
            },
            "regret": {
                "lhs": res.regret.lhs, "rhs": res.regret.rhs,
                "holds": res.regret.holds,
            },
        }
    elif experiment == 6:
        seed = int(_opt(cfg, "seed", 0))
        X, y = _load_input(cfg, synthetic_default=2, n_default=500)
        warmup = int(_opt(cfg, "warmup", min(250, X.shape[0] // 2)))
        res = run_dictionary_ensemble(
            X, y, warmup,
            eta_model=float(_opt(cfg, "eta", 1e-3)),
            eta_weights=float(_opt(cfg, "eta_weights", 0.1)),
        )
        _write_ensemble_outputs(
            outdir, res.history, [(s, yv, wp) for s, yv, wp in res.records]
        )
        config_echo = {"warmup": warmup, "n": int(X.shape[0])}
        summary = {
            "final_weights": {
                f"E{i + 1}": float(w) for i, w in enumerate(res.state.weights)
            },
            "dimensions": [spec.dimension() for spec in res.specs],
            "lambda_stars": res.lambda_stars,
        }
    else:
        raise InvalidConfigError(f"unknown experiment id {experiment}")

    payload = write_summary(
        outdir / "summary.json", mode="experiment", seed=seed, config=config_echo,
        results=summary, experiment=experiment, model=None,
        outputs={
            "predictions": "predictions.csv",
            "params_trajectory": "params_trajectory.csv",
            "metrics": "metrics.csv",
            "drift_events": "drift_events.csv",
            "weights": "weights.csv",
        },
    )
    return payload


def run_fit_stream(cfg):
    model = _opt(cfg, "model", "gaussian")
    outdir = ensure_outdir(_default_outdir(cfg))
    if model == "gaussian":
        result, stream_cfg, config_echo, seed = _run_regression_experiment(
            cfg, synthetic_default=None
        )
        summary = _write_regression_outputs(outdir, result, stream_cfg.interval_level)
    elif model == "logistic":
        result, config_echo, seed = _run_classification_experiment(
            cfg, synthetic_default=None, select_penalty=True
        )
        summary = _write_classification_outputs(outdir, result)
    else:
        raise InvalidConfigError(f"unknown model {model!r}")
    return write_summary(
        outdir / "summary.json", mode="fit-stream", seed=seed, config=config_echo,
        results=summary, experiment=None, model=model,
        outputs={
            "predictions": "predictions.csv",
            "params_trajectory": "params_trajectory.csv",
            "metrics": "metrics.csv",
            "drift_events": "drift_events.csv",
            "weights": "weights.csv",
        },
    )


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        cfg = _merge_config(args)
        if args.command == "run-experiment":
            if args.experiment not in range(1, 8):
                print(
                    f"error: experiment id must be 1-7, got {args.experiment}",
                    file=sys.stderr,
                )
                parser.print_usage(sys.stderr)
                return 1
            run_experiment(args.experiment, cfg)
        else:
            run_fit_stream(cfg)
        return 0
    except _CliConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except (InvalidConfigError, InvalidPlanError, InvalidInputError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, OSError, SchemaError, ParseError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except (StreamLearnError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
