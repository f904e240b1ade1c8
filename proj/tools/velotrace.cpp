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

#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "velotrace/error.hpp"
#include "velotrace/pipeline.hpp"

namespace {

using velotrace::Error;
using velotrace::ErrorKind;

void PrintError(std::string_view kind, std::string_view message, int code) {
  nlohmann::json j = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"velotrace: cycling trip analytics and short-term demand forecasting"};
  app.require_subcommand(1, 1);

  std::string config_path, out_dir, split, models, model_file, week_a, week_b;
  std::uint64_t seed = 0;
  int utc_offset = 0, width = 0, horizon = 0, folds = 0;
  bool no_cv = false;

  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--utc-offset-min", utc_offset, "local time offset in minutes")
      ->check(CLI::Range(-14 * 60, 14 * 60));

  const char* kCommands[][2] = {
      {"synth", "generate a synthetic city dataset"},
      {"ingest", "assemble trips from GPS points"},
      {"describe", "distance/duration/speed histograms and temporal profiles"},
      {"spatial", "density grids and hub destination rankings"},
      {"covariates", "weather, pollution and calendar effects"},
      {"features", "slot aggregation and the model feature matrix"},
      {"train", "train and evaluate the forecasting models"},
      {"predict", "forecast the slot after the data"}};
  for (const auto& [name, help] : kCommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    const std::string n = name;
    if (n == "features" || n == "train" || n == "predict") {
      sub->add_option("--width", width, "slot width in minutes")
          ->check(CLI::IsMember({30, 60}));
    }
    if (n == "features" || n == "train") {
      sub->add_option("--split", split, "train/test ratio")
          ->check(CLI::IsMember({"90/10", "80/20", "70/30", "60/40"}));
      sub->add_option("--folds", folds, "cross-validation folds (0 disables)")
          ->check(CLI::NonNegativeNumber);
    }
    if (n == "train" || n == "predict") {
      sub->add_option("--model", models, "linear, forest, boost, lstm or all");
    }
    if (n == "train") sub->add_flag("--no-cv", no_cv, "skip cross-validation");
    if (n == "predict") {
      sub->add_option("--model-file", model_file, "trained model artifact");
      sub->add_option("--horizon", horizon, "forecast horizon in minutes")
          ->check(CLI::IsMember({30, 60}));
    }
    if (n == "covariates") {
      sub->add_option("--week-a", week_a, "first day of the rainy week (YYYY-MM-DD)");
      sub->add_option("--week-b", week_b, "first day of the comparison week");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    PrintError("usage", e.what(), 3);
    return 3;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  auto given = [&](const std::string& flag) {
    for (CLI::App* a : {&app, app.get_subcommands().front()}) {
      if (CLI::Option* o = a->get_option_no_throw(flag); o && o->count() > 0) return true;
    }
    return false;
  };
  try {
    velotrace::RunConfig cfg;
    if (!config_path.empty()) cfg = velotrace::LoadRunConfig(config_path);
    if (given("--out")) cfg.out = out_dir;
    if (given("--seed")) cfg.seed = seed;
    if (given("--utc-offset-min")) cfg.utc_offset_min = utc_offset;
    if (given("--width")) cfg.width_min = width;
    if (given("--split")) cfg.split = split;
    if (given("--folds")) cfg.folds = folds;
    if (given("--model")) cfg.models = velotrace::ParseModelList(models);
    if (no_cv) cfg.run_cv = false;
    if (given("--model-file")) cfg.model_file = model_file;
    if (given("--horizon")) cfg.horizon_min = horizon;
    if (given("--week-a")) cfg.week_a = velotrace::ParseDate(week_a);
    if (given("--week-b")) cfg.week_b = velotrace::ParseDate(week_b);
    const velotrace::CommandResult result = velotrace::RunCommand(command, cfg);
    std::cout << nlohmann::json{{"command", result.command}, {"summary", result.summary}}.dump()
              << '\n';
    return 0;
  } catch (const Error& e) {
    const int code = velotrace::ExitCodeFor(e.kind());
    PrintError(velotrace::ErrorKindName(e.kind()), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    PrintError("internal", e.what(), 1);
    return 1;
  }
}
