/*
 * Copyright 2026 The Velotrace Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Python bindings. Structured results cross the boundary as JSON text and are
// decoded by the package wrapper.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <numeric>

#include "velotrace/covariates.hpp"
#include "velotrace/error.hpp"
#include "velotrace/evaluate.hpp"
#include "velotrace/features.hpp"
#include "velotrace/geo.hpp"
#include "velotrace/ingest.hpp"
#include "velotrace/metrics.hpp"
#include "velotrace/pipeline.hpp"
#include "velotrace/synth.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace velotrace {
namespace {

std::string MetricsJson(const std::vector<double>& actual,
                        const std::vector<double>& predicted) {
  return MetricsToJson(ComputeMetrics(actual, predicted)).dump();
}

std::string IngestJson(const std::string& points_path) {
  const Assembly a = AssembleTrips(ReadPointsFile(points_path));
  json trips = json::array();
  for (const Trip& t : a.trips) {
    trips.push_back({{"trip_id", t.trip_id},
                     {"start_time", FormatTimestamp(t.start_time)},
                     {"end_time", FormatTimestamp(t.end_time)},
                     {"points", t.points.size()},
                     {"distance_m", t.distance_m},
                     {"duration_s", t.duration_s},
                     {"avg_speed_mps", t.avg_speed_mps}});
  }
  json rejections = json::array();
  for (const Rejection& r : a.rejections) {
    rejections.push_back({{"activity_id", r.activity_id},
                          {"reason", RejectReasonName(r.reason)},
                          {"points", r.points}});
  }
  return json{{"trips", trips},
              {"rejections", rejections},
              {"rejected_points", a.rejected_points}}
      .dump();
}

std::string SimulateJson(const std::string& config_json, const std::string& out_dir) {
  const SynthData data = Simulate(SynthConfigFromJson(json::parse(config_json)));
  Generate(data, out_dir);
  return data.TruthJson().dump();
}

std::string SplitJson(std::size_t n_rows, const std::string& ratio, int folds) {
  return SplitPlanToJson(ChronologicalSplit(n_rows, ParseSplitRatio(ratio), folds));
}

std::string EvaluateJson(const std::string& features_path, const std::string& spec_json,
                         const std::string& ratio, int folds) {
  const FeatureMatrix m = ReadFeaturesCsv(features_path);
  const SplitPlan plan = ChronologicalSplit(m.n_rows, ParseSplitRatio(ratio), folds);
  const ModelSpec spec = SpecFromJson(json::parse(spec_json));
  const ModelEvaluation e = EvaluateModel(m, plan, spec, EvalOptions{folds > 0});
  json cv = json::array();
  for (const FoldResult& f : e.cv) cv.push_back(json(MetricsToJson(f.metrics)));
  return json{{"test", MetricsToJson(e.test)},
              {"cv", cv},
              {"parameter_hash", e.parameter_hash},
              {"rows_used", e.info.rows_used}}
      .dump();
}

std::string RunCommandJson(const std::string& command, const std::string& config_json) {
  const CommandResult r = RunCommand(command, RunConfigFromJson(json::parse(config_json)));
  json outputs = json::array();
  for (const auto& p : r.outputs) outputs.push_back(p.string());
  return json{{"command", r.command}, {"summary", r.summary}, {"outputs", outputs}}.dump();
}

}  // namespace
}  // namespace velotrace

PYBIND11_MODULE(_core, m) {
  using namespace velotrace;
  m.doc() = "velotrace native core";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::object(py::exception<Error>(m, "VelotraceError")); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& type = error_type.get_stored();
      py::object exc = type(py::str(e.what()));
      exc.attr("kind") = std::string(ErrorKindName(e.kind()));
      exc.attr("exit_code") = ExitCodeFor(e.kind());
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });

  m.def("haversine",
        [](double lat1, double lon1, double lat2, double lon2) {
          return Haversine({lat1, lon1}, {lat2, lon2});
        },
        py::arg("lat1"), py::arg("lon1"), py::arg("lat2"), py::arg("lon2"));
  m.def("pearson",
        [](const std::vector<double>& x, const std::vector<double>& y) { return Pearson(x, y); },
        py::arg("x"), py::arg("y"));
  m.def("metrics_json", &MetricsJson, py::arg("actual"), py::arg("predicted"));
  m.def("ingest_json", &IngestJson, py::arg("points_path"),
        py::call_guard<py::gil_scoped_release>());
  m.def("simulate_json", &SimulateJson, py::arg("config_json"), py::arg("out_dir"),
        py::call_guard<py::gil_scoped_release>());
  m.def("split_json", &SplitJson, py::arg("n_rows"), py::arg("ratio"), py::arg("folds"));
  m.def("evaluate_json", &EvaluateJson, py::arg("features_path"), py::arg("spec_json"),
        py::arg("ratio"), py::arg("folds"), py::call_guard<py::gil_scoped_release>());
  m.def("run_command_json", &RunCommandJson, py::arg("command"), py::arg("config_json"),
        py::call_guard<py::gil_scoped_release>());
  m.attr("__version__") = "0.1.0";
}
