"""Plot-ready CSV/JSON report writing shared by the CLI runners.

Floats are serialized with ``repr`` so identical runs produce byte-identical
files.  ``summary.json`` follows the JSON schema shipped in
``streamlearn/schemas/summary.schema.json`` (``schema_version`` "1").
"""

import csv
import importlib.resources
import json
import math
from pathlib import Path

import numpy as np

SCHEMA_VERSION = "1"

PREDICTIONS_HEADER = ["step", "phase", "y", "prediction", "lo", "hi", "residual"]
METRICS_HEADER = ["step", "sst", "sse", "n", "p", "r2", "sigma_hat", "rmse"]
DRIFT_HEADER = ["step", "rule", "residual", "lower", "upper"]
PARAMS_HEADER_PREFIX = ["step"]
WEIGHTS_HEADER = ["step", "expert_index", "weight", "cumulative_loss"]


def _fmt(value):
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(float(value))
    if isinstance(value, (np.integer, np.bool_)):
        return value.item()
    return value


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_summary(path, mode, seed, config, results, outputs,
                  experiment=None, model=None):
    payload = {
        "schema_version": SCHEMA_VERSION,
        "mode": mode,
        "experiment": experiment,
        "model": model,
        "seed": seed,
        "config": config,
        "results": results,
        "outputs": outputs,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return payload


def summary_schema():
    """The published JSON schema for summary.json."""
    ref = importlib.resources.files("streamlearn") / "schemas" / "summary.schema.json"
    return json.loads(ref.read_text())


def ensure_outdir(outdir):
    path = Path(outdir)
    path.mkdir(parents=True, exist_ok=True)
    return path
