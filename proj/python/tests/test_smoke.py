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

import json
import math

import pytest

import velotrace


def test_haversine_one_degree_of_longitude_at_equator():
    assert velotrace.haversine(0, 0, 0, 1) == pytest.approx(111194.93, abs=0.01)


def test_metrics_example():
    m = velotrace.metrics([0, 2], [1, 1])
    assert m["mae"] == pytest.approx(1.0)
    assert m["rmse"] == pytest.approx(1.0)
    assert m["r2"] == pytest.approx(0.0)
    assert velotrace.metrics([3, 3], [2, 4])["r2"] is None


def test_errors_carry_kind_and_exit_code():
    with pytest.raises(velotrace.VelotraceError) as info:
        velotrace.pearson([1, 1, 1], [1, 2, 3])
    assert info.value.kind == "undefined"
    with pytest.raises(velotrace.VelotraceError) as info:
        velotrace.ingest("/nonexistent/points.csv")
    assert info.value.exit_code == 2


def test_split():
    plan = velotrace.chronological_split(10, "80/20", 0)
    assert plan["train_rows"] == [0, 8]
    assert plan["test_rows"] == [8, 10]
    assert plan["cv_folds"] == []


def test_simulate_and_ingest(tmp_path):
    truth = velotrace.simulate(
        {"seed": 2, "start": "2017-05-01", "end": "2017-05-03", "base_trips_per_day": 80},
        tmp_path,
    )
    assert truth["total_trips"] > 0
    result = velotrace.ingest(tmp_path / "points.csv")
    assert len(result["trips"]) == truth["total_trips"]
    for trip in result["trips"][:20]:
        assert trip["avg_speed_mps"] * trip["duration_s"] == pytest.approx(trip["distance_m"])


def test_pipeline_train(tmp_path):
    cfg = {
        "out": str(tmp_path),
        "seed": 4,
        "folds": 2,
        "models": ["linear", "boost"],
        "hyperparameters": {"boost": {"rounds": 10}},
        "synth": {"start": "2017-05-01", "end": "2017-05-12", "base_trips_per_day": 100},
    }
    for command in ("synth", "ingest", "features", "train"):
        out = velotrace.run_command(command, cfg)
        assert out["command"] == command
    report = json.loads((tmp_path / "eval_report.json").read_text())
    assert set(report) == {"90/10|60|linear", "90/10|60|boost"}
    scored = velotrace.evaluate(tmp_path / "features.csv", {"kind": "linear"}, "90/10", 0)
    assert math.isclose(scored["test"]["mae"], report["90/10|60|linear"]["test"]["mae"])
