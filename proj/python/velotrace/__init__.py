#
# Copyright 2026 The Velotrace Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

"""GPS cycling trip analytics and demand forecasting."""

import json
import os

from . import _core
from ._core import VelotraceError, haversine, pearson

__all__ = [
    "VelotraceError",
    "chronological_split",
    "evaluate",
    "haversine",
    "ingest",
    "metrics",
    "pearson",
    "run_command",
    "simulate",
]
__version__ = _core.__version__


def metrics(actual, predicted):
    """MAE, MSE, RMSE and R2 (None when the actuals are constant)."""
    return json.loads(_core.metrics_json(list(actual), list(predicted)))


def ingest(points_path):
    """Assembles trips from a point CSV; returns trips and rejections."""
    return json.loads(_core.ingest_json(os.fspath(points_path)))


def simulate(config, out_dir):
    """Writes a synthetic city to out_dir and returns the planted truth."""
    return json.loads(_core.simulate_json(json.dumps(config), os.fspath(out_dir)))


def chronological_split(n_rows, ratio="90/10", folds=10):
    return json.loads(_core.split_json(n_rows, ratio, folds))


def evaluate(features_path, spec, ratio="90/10", folds=10):
    """Trains one model spec on a features.csv and scores the test range."""
    return json.loads(
        _core.evaluate_json(os.fspath(features_path), json.dumps(spec), ratio, folds)
    )


def run_command(command, config=None, **overrides):
    """Runs one pipeline command ("synth", "ingest", ..., "predict")."""
    cfg = dict(config or {})
    cfg.update(overrides)
    if "out" in cfg:
        cfg["out"] = os.fspath(cfg["out"])
    return json.loads(_core.run_command_json(command, json.dumps(cfg)))
