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

#include "velotrace/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "velotrace/covariates.hpp"
#include "velotrace/csv.hpp"
#include "velotrace/evaluate.hpp"
#include "velotrace/features.hpp"
#include "velotrace/hash.hpp"
#include "velotrace/ingest.hpp"
#include "velotrace/stats.hpp"

namespace velotrace {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr std::string_view kVersion = "0.1.0";

// Collects the files a command writes and records them in manifest.json.
class Outputs {
 public:
  Outputs(std::string command, const RunConfig& cfg) : command_(std::move(command)), cfg_(cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (ec) throw Error(ErrorKind::kIo, "cannot create output directory " + cfg.out.string());
  }

  void Input(const fs::path& path) {
    inputs_.push_back({{"file", path.filename().string()}, {"sha256", Sha256Hex(ReadFile(path))}});
  }

  void Write(const std::string& name, const std::string& content) {
    const fs::path path = cfg_.out / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
    outputs_.push_back({{"file", name}, {"bytes", content.size()}, {"sha256", Sha256Hex(content)}});
    result_.outputs.push_back(path);
  }

  template <typename F>
  void WriteWith(const std::string& name, F&& fill) {
    std::ostringstream s;
    fill(s);
    Write(name, s.str());
  }

  CommandResult Finish(json summary) {
    const fs::path path = cfg_.out / "manifest.json";
    json manifest;
    if (fs::exists(path)) {
      try {
        manifest = json::parse(ReadFile(path));
      } catch (const json::exception&) {
        manifest = json::object();
      }
    }
    manifest["tool"] = "velotrace";
    manifest["version"] = kVersion;
    manifest["commands"][command_] = {
        {"config_sha256", Sha256Hex(cfg_.ToJson(false).dump())},
        {"inputs", inputs_},
        {"outputs", outputs_}};
    std::ofstream out(path, std::ios::binary);
    out << manifest.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
    result_.command = command_;
    result_.summary = std::move(summary);
    return std::move(result_);
  }

 private:
  std::string command_;
  const RunConfig& cfg_;
  json inputs_ = json::array();
  json outputs_ = json::array();
  CommandResult result_;
};

fs::path Resolve(const fs::path& configured, const RunConfig& cfg, const char* name) {
  return configured.empty() ? cfg.out / name : configured;
}

template <typename T>
void Get(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

BBox DataBBox(std::span<const LatLon> points) {
  if (points.empty()) throw Error(ErrorKind::kInput, "no positions to derive a bounding box");
  BBox b{points[0].lat, points[0].lon, points[0].lat, points[0].lon};
  for (const auto& p : points) {
    b.min_lat = std::min(b.min_lat, p.lat);
    b.max_lat = std::max(b.max_lat, p.lat);
    b.min_lon = std::min(b.min_lon, p.lon);
    b.max_lon = std::max(b.max_lon, p.lon);
  }
  if (b.max_lat - b.min_lat < 1e-3) b.min_lat -= 5e-4, b.max_lat += 5e-4;
  if (b.max_lon - b.min_lon < 1e-3) b.min_lon -= 5e-4, b.max_lon += 5e-4;
  return b;
}

std::pair<UtcTime, UtcTime> TripSlotSpan(std::span<const Trip> trips, int width_min) {
  if (trips.empty()) throw Error(ErrorKind::kInput, "no trips to aggregate");
  UtcTime lo = trips[0].start_time, hi = lo;
  for (const auto& t : trips) {
    lo = std::min(lo, t.start_time);
    hi = std::max(hi, t.start_time);
  }
  const auto width = std::chrono::minutes(width_min);
  return {lo - lo.time_since_epoch() % width, hi - hi.time_since_epoch() % width + width};
}

std::string Dump(const ojson& j) { return j.dump(2) + "\n"; }

FeatureOptions OptionsFor(const RunConfig& cfg, std::span<const PollutionRecord> pollution) {
  FeatureOptions o;
  o.numeric_hour = cfg.numeric_hour;
  o.include_wind = cfg.include_wind;
  o.pollution = pollution;
  return o;
}

}  // namespace

ModelSpec RunConfig::Spec(ModelKind kind) const {
  ModelSpec s;
  s.kind = kind;
  s.forest = forest;
  s.boost = boost;
  s.lstm = lstm;
  s.seed = seed;
  return s;
}

json RunConfig::ToJson(bool include_paths) const {
  json j;
  if (include_paths) {
    j["out"] = out.string();
    for (const auto& [key, p] : {std::pair{"points", &points}, {"weather", &weather},
                                 {"pollution", &pollution}, {"calendar", &calendar},
                                 {"hubs", &hubs}, {"features", &features},
                                 {"model_file", &model_file}}) {
      if (!p->empty()) j[key] = p->string();
    }
  }
  j["seed"] = seed;
  j["utc_offset_min"] = utc_offset_min;
  if (bbox) {
    j["bbox"] = {{"min_lat", bbox->min_lat}, {"min_lon", bbox->min_lon},
                 {"max_lat", bbox->max_lat}, {"max_lon", bbox->max_lon}};
  }
  j["density_cell_m"] = density_cell_m;
  j["dest_cell_m"] = dest_cell_m;
  j["top_k"] = top_k;
  j["distance_bin_m"] = distance_bin_m;
  j["duration_bin_s"] = duration_bin_s;
  j["speed_bin_mps"] = speed_bin_mps;
  if (week_a) j["week_a"] = FormatDate(*week_a);
  if (week_b) j["week_b"] = FormatDate(*week_b);
  j["width"] = width_min;
  j["split"] = split;
  j["folds"] = folds;
  j["run_cv"] = run_cv;
  j["numeric_hour"] = numeric_hour;
  j["include_wind"] = include_wind;
  json kinds = json::array();
  for (ModelKind k : models) kinds.push_back(ModelKindName(k));
  j["models"] = kinds;
  json hp;
  for (ModelKind k : {ModelKind::kForest, ModelKind::kBoost, ModelKind::kLstm}) {
    hp[std::string(ModelKindName(k))] = SpecToJson(Spec(k))["hyperparameters"];
  }
  j["hyperparameters"] = hp;
  j["ablate"] = ablate;
  if (horizon_min) j["horizon"] = *horizon_min;
  j["synth"] = SynthConfigToJson(synth);
  j["synth"].erase("seed");
  return j;
}

std::vector<ModelKind> ParseModelList(std::string_view text) {
  if (text == "all") {
    return {ModelKind::kLinear, ModelKind::kForest, ModelKind::kBoost, ModelKind::kLstm};
  }
  std::vector<ModelKind> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const ModelKind k = ParseModelKind(text.substr(pos, comma - pos));
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    pos = comma + 1;
  }
  return out;
}

RunConfig RunConfigFromJson(const json& j) {
  static const std::set<std::string> kKeys = {
      "out", "points", "weather", "pollution", "calendar", "hubs", "features",
      "model_file", "seed", "utc_offset_min", "bbox", "density_cell_m", "dest_cell_m",
      "top_k", "distance_bin_m", "duration_bin_s", "speed_bin_mps", "week_a", "week_b",
      "width", "split", "folds", "run_cv", "numeric_hour", "include_wind", "models",
      "hyperparameters", "ablate", "horizon", "synth"};
  RunConfig c;
  try {
    if (!j.is_object()) throw Error(ErrorKind::kParameter, "config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (!kKeys.contains(key)) throw Error(ErrorKind::kParameter, "unknown config key '" + key + "'");
    }
    for (const auto& [key, p] : {std::pair{"out", &c.out}, {"points", &c.points},
                                 {"weather", &c.weather}, {"pollution", &c.pollution},
                                 {"calendar", &c.calendar}, {"hubs", &c.hubs},
                                 {"features", &c.features}, {"model_file", &c.model_file}}) {
      if (j.contains(key)) *p = j.at(key).get<std::string>();
    }
    Get(j, "seed", c.seed);
    Get(j, "utc_offset_min", c.utc_offset_min);
    if (j.contains("bbox")) {
      const auto& b = j.at("bbox");
      c.bbox = BBox{b.at("min_lat").get<double>(), b.at("min_lon").get<double>(),
                    b.at("max_lat").get<double>(), b.at("max_lon").get<double>()};
    }
    Get(j, "density_cell_m", c.density_cell_m);
    Get(j, "dest_cell_m", c.dest_cell_m);
    Get(j, "top_k", c.top_k);
    Get(j, "distance_bin_m", c.distance_bin_m);
    Get(j, "duration_bin_s", c.duration_bin_s);
    Get(j, "speed_bin_mps", c.speed_bin_mps);
    if (j.contains("week_a")) c.week_a = ParseDate(j.at("week_a").get<std::string>());
    if (j.contains("week_b")) c.week_b = ParseDate(j.at("week_b").get<std::string>());
    Get(j, "width", c.width_min);
    Get(j, "split", c.split);
    Get(j, "folds", c.folds);
    Get(j, "run_cv", c.run_cv);
    Get(j, "numeric_hour", c.numeric_hour);
    Get(j, "include_wind", c.include_wind);
    if (j.contains("models")) {
      const auto& m = j.at("models");
      if (m.is_string()) {
        c.models = ParseModelList(m.get<std::string>());
      } else {
        c.models.clear();
        for (const auto& k : m) c.models.push_back(ParseModelKind(k.get<std::string>()));
      }
    }
    if (j.contains("hyperparameters")) {
      for (const auto& [kind, hp] : j.at("hyperparameters").items()) {
        const ModelSpec s = SpecFromJson(json{{"kind", kind}, {"hyperparameters", hp}});
        c.forest = kind == "forest" ? s.forest : c.forest;
        c.boost = kind == "boost" ? s.boost : c.boost;
        c.lstm = kind == "lstm" ? s.lstm : c.lstm;
      }
    }
    Get(j, "ablate", c.ablate);
    if (j.contains("horizon")) c.horizon_min = j.at("horizon").get<int>();
    if (j.contains("synth")) c.synth = SynthConfigFromJson(j.at("synth"));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParameter, std::string("config: ") + e.what());
  }
  return c;
}

RunConfig LoadRunConfig(const fs::path& path) {
  const std::string text = ReadFile(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, path.string() + ": " + e.what());
  }
  return RunConfigFromJson(j);
}

CommandResult RunSynth(const RunConfig& cfg) {
  Outputs out("synth", cfg);
  SynthConfig sc = cfg.synth;
  sc.seed = cfg.seed;
  sc.utc_offset_min = cfg.utc_offset_min;
  const SynthData data = Simulate(sc);
  const SynthFiles files = Generate(data, cfg.out);
  // Generate streams the large files itself; they are hashed after the fact.
  for (const fs::path& p : {files.points, files.weather, files.calendar, files.truth,
                            files.missing_truth}) {
    const std::string content = ReadFile(p);
    out.Write(p.filename().string(), content);
  }
  out.WriteWith("hubs.csv", [&](std::ostream& s) {
    CsvWriter w(s);
    w.Row({"name", "lat", "lon", "radius_m"});
    for (const auto& h : sc.hubs) {
      w.Row({h.name, FormatDouble(h.center.lat), FormatDouble(h.center.lon), "300"});
    }
  });
  return out.Finish({{"trips", data.trips.size()}, {"days", data.days.size()},
                     {"weather_hours", data.weather.size()}});
}

CommandResult RunIngest(const RunConfig& cfg) {
  Outputs out("ingest", cfg);
  const fs::path points_path = Resolve(cfg.points, cfg, "points.csv");
  const std::vector<GpsPoint> points = ReadPointsFile(points_path);
  out.Input(points_path);
  const Assembly a = AssembleTrips(points);
  out.WriteWith("trips.csv", [&](std::ostream& s) { WriteTripSummaries(s, a.trips); });
  out.WriteWith("trip_points.csv", [&](std::ostream& s) { WriteTripPoints(s, a.trips); });
  out.WriteWith("rejections.csv", [&](std::ostream& s) { WriteRejections(s, a.rejections); });
  std::size_t kept = 0;
  for (const auto& t : a.trips) kept += t.points.size();
  return out.Finish({{"input_points", points.size()}, {"kept_points", kept},
                     {"rejected_points", a.rejected_points}, {"trips", a.trips.size()},
                     {"rejections", a.rejections.size()}});
}

CommandResult RunDescribe(const RunConfig& cfg) {
  Outputs out("describe", cfg);
  const fs::path trips_path = cfg.out / "trips.csv";
  const std::vector<Trip> trips = ReadTripSummaries(trips_path);
  out.Input(trips_path);
  std::vector<double> dist, dur, speed;
  for (const auto& t : trips) {
    dist.push_back(t.distance_m);
    dur.push_back(t.duration_s);
    speed.push_back(t.avg_speed_mps);
  }
  ojson summary = {{"trips", trips.size()}};
  for (const auto& [name, values, width] :
       {std::tuple{"distance", &dist, cfg.distance_bin_m},
        std::tuple{"duration", &dur, cfg.duration_bin_s},
        std::tuple{"speed", &speed, cfg.speed_bin_mps}}) {
    const Histogram h = BuildHistogram(*values, width);
    out.WriteWith(std::string("histogram_") + name + ".csv",
                  [&](std::ostream& s) { WriteHistogramCsv(s, h); });
    const auto mode = h.ModeLowerEdge();
    const auto median = Median(*values);
    summary[name] = {{"bin_width", width},
                     {"mode_lower_edge", mode ? ojson(*mode) : ojson(nullptr)},
                     {"median", median ? ojson(*median) : ojson(nullptr)}};
  }
  const TemporalProfile profile = BuildTemporalProfile(trips, cfg.utc_offset_min);
  out.Write("profile.json", ProfileToJson(profile));
  summary["workingday_share"] = profile.workingday_share;
  if (profile.monthly_counts.size() >= 2) {
    const auto months = MonthlyChange(profile);
    out.WriteWith("monthly.csv", [&](std::ostream& s) { WriteMonthlyCsv(s, months); });
  } else {
    summary["monthly"] = "skipped: fewer than two months";
  }
  out.Write("describe.json", Dump(summary));
  return out.Finish(json::parse(summary.dump()));
}

CommandResult RunSpatial(const RunConfig& cfg) {
  Outputs out("spatial", cfg);
  const fs::path trips_path = cfg.out / "trips.csv";
  const fs::path points_path = cfg.out / "trip_points.csv";
  const std::vector<Trip> trips = ReadTripSummaries(trips_path);
  const std::vector<TimedPosition> points = ReadTripPoints(points_path);
  out.Input(trips_path);
  out.Input(points_path);

  std::vector<LatLon> all;
  all.reserve(points.size());
  std::map<std::chrono::year_month, std::vector<LatLon>> by_month;
  for (const auto& p : points) {
    all.push_back(p.position);
    by_month[YearMonth(LocalDate(p.timestamp, cfg.utc_offset_min))].push_back(p.position);
  }
  const BBox bbox = cfg.bbox ? *cfg.bbox : DataBBox(all);
  const DensityGrid grid = BuildDensityGrid(all, bbox, cfg.density_cell_m);
  out.WriteWith("density.csv", [&](std::ostream& s) { WriteDensityCsv(s, grid); });
  ojson months = ojson::array();
  const DensityGrid* previous = nullptr;
  std::vector<DensityGrid> grids;
  grids.reserve(by_month.size());
  for (const auto& [ym, pts] : by_month) {
    const std::string label = FormatMonth(ym);
    grids.push_back(BuildDensityGrid(pts, bbox, cfg.density_cell_m));
    const DensityGrid& g = grids.back();
    out.WriteWith("density_" + label + ".csv", [&](std::ostream& s) { WriteDensityCsv(s, g); });
    if (previous) {
      const SignedGrid diff = GridDiff(g, *previous);
      out.WriteWith("density_diff_" + label + ".csv", [&](std::ostream& s) {
        CsvWriter w(s);
        w.Row({"row", "col", "diff"});
        for (int r = 0; r < diff.n_rows; ++r) {
          for (int c = 0; c < diff.n_cols; ++c) {
            const double v = diff.values[std::size_t(r) * std::size_t(diff.n_cols) + std::size_t(c)];
            if (v != 0) w.Row({std::to_string(r), std::to_string(c), FormatDouble(v)});
          }
        }
      });
    }
    months.push_back({{"month", label}, {"points", pts.size()}, {"ignored", g.ignored}});
    previous = &g;
  }

  std::vector<HubSpreadReport> reports;
  const fs::path hubs_path = Resolve(cfg.hubs, cfg, "hubs.csv");
  if (!cfg.hubs.empty() || fs::exists(hubs_path)) {
    const std::vector<Hub> hubs = ReadHubsFile(hubs_path);
    out.Input(hubs_path);
    std::map<std::chrono::year_month, std::vector<Trip>> trips_by_month;
    for (const auto& t : trips) {
      trips_by_month[YearMonth(LocalDate(t.start_time, cfg.utc_offset_min))].push_back(t);
    }
    for (const auto& hub : hubs) {
      reports.push_back(HubSpread(trips, hub, cfg.dest_cell_m, cfg.top_k, "all"));
      for (const auto& [ym, ts] : trips_by_month) {
        reports.push_back(HubSpread(ts, hub, cfg.dest_cell_m, cfg.top_k, FormatMonth(ym)));
      }
    }
    out.Write("hubs.json", HubReportsToJson(reports));
  }
  ojson summary = {{"bbox", {{"min_lat", bbox.min_lat}, {"min_lon", bbox.min_lon},
                             {"max_lat", bbox.max_lat}, {"max_lon", bbox.max_lon}}},
                   {"cell_size_m", cfg.density_cell_m},
                   {"rows", grid.n_rows},
                   {"cols", grid.n_cols},
                   {"points", all.size()},
                   {"ignored", grid.ignored},
                   {"months", months},
                   {"hub_reports", reports.size()}};
  out.Write("spatial.json", Dump(summary));
  return out.Finish(json::parse(summary.dump()));
}

CommandResult RunCovariates(const RunConfig& cfg) {
  Outputs out("covariates", cfg);
  const fs::path trips_path = cfg.out / "trips.csv";
  const fs::path weather_path = Resolve(cfg.weather, cfg, "weather.csv");
  const fs::path calendar_path = Resolve(cfg.calendar, cfg, "calendar.csv");
  const std::vector<Trip> trips = ReadTripSummaries(trips_path);
  const std::vector<WeatherRecord> weather = ReadWeatherFile(weather_path);
  out.Input(trips_path);
  out.Input(weather_path);
  std::vector<CalendarEntry> calendar;
  if (!cfg.calendar.empty() || fs::exists(calendar_path)) {
    calendar = ReadCalendarFile(calendar_path);
    out.Input(calendar_path);
  }

  const std::vector<DailyRow> daily = DailyJoin(trips, weather, cfg.utc_offset_min);
  const std::vector<HourlyRow> hourly = HourlyJoin(trips, weather);
  std::vector<CorrelationReport> corr = WeatherCorrelations(daily, hourly);
  if (!cfg.pollution.empty()) {
    const std::vector<PollutionRecord> pollution = ReadPollutionFile(cfg.pollution);
    out.Input(cfg.pollution);
    for (auto& r : PollutionCorrelations(trips, pollution, cfg.utc_offset_min)) {
      corr.push_back(std::move(r));
    }
  }
  out.WriteWith("daily.csv", [&](std::ostream& s) { WriteDailyCsv(s, daily); });
  out.Write("correlations.json", CorrelationsToJson(corr));

  ojson summary = {{"days", daily.size()}};
  std::optional<std::pair<Date, Date>> weeks;
  if (cfg.week_a && cfg.week_b) {
    weeks = std::pair{*cfg.week_a, *cfg.week_b};
  } else if (cfg.week_a || cfg.week_b) {
    throw Error(ErrorKind::kParameter, "week_a and week_b must be given together");
  } else {
    weeks = PickRainyWeek(daily);
  }
  if (weeks) {
    const WeekContrast wc = CompareWeeks(daily, weeks->first, weeks->second, weather,
                                         cfg.utc_offset_min);
    out.Write("week_contrast.json", WeekContrastToJson(wc));
    summary["week_a"] = FormatDate(weeks->first);
    summary["week_b"] = FormatDate(weeks->second);
  } else {
    summary["week_contrast"] = "skipped: no pair of complete weeks";
  }
  const ImpactReport holidays = HolidayImpact(daily, calendar);
  const ImpactReport events = EventImpact(daily, calendar);
  out.Write("holiday_impact.json", ImpactToJson(holidays));
  out.Write("event_impact.json", ImpactToJson(events));
  summary["holidays"] = holidays.rows.size();
  summary["events"] = events.rows.size();
  return out.Finish(json::parse(summary.dump()));
}

CommandResult RunFeatures(const RunConfig& cfg) {
  Outputs out("features", cfg);
  const fs::path trips_path = cfg.out / "trips.csv";
  const fs::path weather_path = Resolve(cfg.weather, cfg, "weather.csv");
  const fs::path calendar_path = Resolve(cfg.calendar, cfg, "calendar.csv");
  const std::vector<Trip> trips = ReadTripSummaries(trips_path);
  const std::vector<WeatherRecord> weather = ReadWeatherFile(weather_path);
  out.Input(trips_path);
  out.Input(weather_path);
  std::vector<CalendarEntry> calendar;
  if (!cfg.calendar.empty() || fs::exists(calendar_path)) {
    calendar = ReadCalendarFile(calendar_path);
    out.Input(calendar_path);
  }
  std::vector<PollutionRecord> pollution;
  if (!cfg.pollution.empty()) {
    pollution = ReadPollutionFile(cfg.pollution);
    out.Input(cfg.pollution);
  }
  const auto [start, end] = TripSlotSpan(trips, cfg.width_min);
  const SlotSeries slots = AggregateSlots(trips, cfg.width_min, start, end);
  const FeatureBuild build = BuildFeatures(slots, weather, calendar, cfg.utc_offset_min,
                                           OptionsFor(cfg, pollution));
  const SplitPlan plan =
      ChronologicalSplit(build.matrix.n_rows, ParseSplitRatio(cfg.split), cfg.folds);
  out.WriteWith("features.csv", [&](std::ostream& s) { WriteFeaturesCsv(s, build.matrix); });
  out.Write("splitplan.json", SplitPlanToJson(plan));
  out.WriteWith("dropped_rows.csv", [&](std::ostream& s) {
    CsvWriter w(s);
    w.Row({"slot_start", "reason"});
    for (const auto& d : build.dropped) w.Row({FormatTimestamp(d.slot_start), d.reason});
  });
  ojson corr = ojson::array();
  for (const auto& fc : FeatureTargetCorrelation(build.matrix)) {
    corr.push_back({{"column", fc.column}, {"r", fc.r ? ojson(*fc.r) : ojson(nullptr)}});
  }
  out.Write("feature_correlation.json", Dump(corr));
  return out.Finish({{"width_min", cfg.width_min},
                     {"slots", slots.counts.size()},
                     {"rows", build.matrix.n_rows},
                     {"columns", build.matrix.n_cols()},
                     {"dropped", build.dropped.size()},
                     {"train_rows", plan.train.size()},
                     {"test_rows", plan.test.size()}});
}

CommandResult RunTrain(const RunConfig& cfg) {
  Outputs out("train", cfg);
  const fs::path features_path = Resolve(cfg.features, cfg, "features.csv");
  const FeatureMatrix m = ReadFeaturesCsv(features_path);
  out.Input(features_path);
  if (m.width_min != cfg.width_min) {
    throw Error(ErrorKind::kParameter,
                features_path.string() + " holds " + std::to_string(m.width_min) +
                    "-minute slots; rerun features with --width " +
                    std::to_string(cfg.width_min));
  }
  if (cfg.models.empty()) throw Error(ErrorKind::kParameter, "no models selected");
  const SplitPlan plan = ChronologicalSplit(m.n_rows, ParseSplitRatio(cfg.split), cfg.folds);
  EvalReport report;
  report.ratio = plan.ratio;
  report.width_min = m.width_min;
  const ModelEvaluation* best = nullptr;
  for (ModelKind kind : cfg.models) {
    TrainedModel model;
    report.models.push_back(
        EvaluateModel(m, plan, cfg.Spec(kind), EvalOptions{cfg.run_cv}, &model));
    const std::string name(ModelKindName(kind));
    out.Write("model_" + name + ".json", Dump(model.ToJson()));
    out.WriteWith("predictions_" + name + ".csv", [&](std::ostream& s) {
      WritePredictionsCsv(s, report.models.back().predictions);
    });
  }
  for (const auto& ev : report.models) {
    if (!best || ev.test.mae < best->test.mae) best = &ev;
  }
  out.Write("eval_report.json", Dump(report.ToJson()));
  out.WriteWith("predictions.csv", [&](std::ostream& s) { WritePredictionsCsv(s, best->predictions); });
  if (!cfg.ablate.empty()) {
    ojson ablations = ojson::object();
    for (ModelKind kind : cfg.models) {
      for (const auto& group : cfg.ablate) {
        ablations[std::string(ModelKindName(kind)) + "|" + group] =
            AblationToJson(Ablate(m, plan, cfg.Spec(kind), group));
      }
    }
    out.Write("ablation.json", Dump(ablations));
  }
  json summary = {{"best_model", ModelKindName(best->spec.kind)}};
  for (const auto& ev : report.models) {
    summary["test"][std::string(ModelKindName(ev.spec.kind))] =
        json::parse(MetricsToJson(ev.test).dump());
  }
  return out.Finish(summary);
}

CommandResult RunPredict(const RunConfig& cfg) {
  Outputs out("predict", cfg);
  const int horizon = cfg.horizon_min.value_or(cfg.width_min);
  if (horizon != 30 && horizon != 60) {
    throw Error(ErrorKind::kParameter, "horizon must be 30 or 60 minutes");
  }
  const fs::path model_path =
      cfg.model_file.empty()
          ? cfg.out / ("model_" + std::string(ModelKindName(cfg.models.front())) + ".json")
          : cfg.model_file;
  json model_json;
  try {
    model_json = json::parse(ReadFile(model_path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, model_path.string() + ": " + e.what());
  }
  const TrainedModel model = TrainedModel::FromJson(model_json);
  out.Input(model_path);
  if (model.width_min != horizon) {
    throw Error(ErrorKind::kParameter,
                "model was trained for " + std::to_string(model.width_min) +
                    "-minute slots but the horizon is " + std::to_string(horizon));
  }
  const fs::path trips_path = cfg.out / "trips.csv";
  const fs::path weather_path = Resolve(cfg.weather, cfg, "weather.csv");
  const fs::path calendar_path = Resolve(cfg.calendar, cfg, "calendar.csv");
  const std::vector<Trip> trips = ReadTripSummaries(trips_path);
  std::vector<WeatherRecord> weather = ReadWeatherFile(weather_path);
  out.Input(trips_path);
  out.Input(weather_path);
  std::vector<CalendarEntry> calendar;
  if (!cfg.calendar.empty() || fs::exists(calendar_path)) {
    calendar = ReadCalendarFile(calendar_path);
    out.Input(calendar_path);
  }
  std::vector<PollutionRecord> pollution;
  if (!cfg.pollution.empty()) pollution = ReadPollutionFile(cfg.pollution);

  // One extra empty slot past the data is the slot being forecast.
  auto [start, end] = TripSlotSpan(trips, horizon);
  end += std::chrono::minutes(horizon);
  const SlotSeries slots = AggregateSlots(trips, horizon, start, end);
  const UtcTime target = slots.SlotStart(slots.counts.size() - 1);
  if (weather.empty()) throw Error(ErrorKind::kInput, "no weather records");
  bool carried = false;
  if (std::none_of(weather.begin(), weather.end(),
                   [&](const WeatherRecord& w) { return w.hour == FloorToHour(target); })) {
    WeatherRecord last = weather.back();
    last.hour = FloorToHour(target);
    weather.push_back(last);
    carried = true;
  }
  if (!pollution.empty() &&
      std::none_of(pollution.begin(), pollution.end(),
                   [&](const PollutionRecord& p) { return p.hour == FloorToHour(target); })) {
    PollutionRecord last = pollution.back();
    last.hour = FloorToHour(target);
    pollution.push_back(last);
  }
  const FeatureBuild build =
      BuildFeatures(slots, weather, calendar, cfg.utc_offset_min, OptionsFor(cfg, pollution));
  const FeatureMatrix& m = build.matrix;
  if (m.n_rows == 0 || m.slot_start.back() != target) {
    throw Error(ErrorKind::kInput, "cannot build the feature row for " + FormatTimestamp(target));
  }
  const std::size_t row = m.n_rows - 1;
  const double predicted = model.Predict(m, std::span(&row, 1)).front();
  ojson result = {{"slot_start", FormatTimestamp(target)},
                  {"horizon_min", horizon},
                  {"model", ModelKindName(model.spec.kind)},
                  {"predicted", predicted},
                  {"weather_carried_forward", carried}};
  out.Write("prediction.json", Dump(result));
  return out.Finish(json::parse(result.dump()));
}

CommandResult RunCommand(std::string_view command, const RunConfig& cfg) {
  if (command == "synth") return RunSynth(cfg);
  if (command == "ingest") return RunIngest(cfg);
  if (command == "describe") return RunDescribe(cfg);
  if (command == "spatial") return RunSpatial(cfg);
  if (command == "covariates") return RunCovariates(cfg);
  if (command == "features") return RunFeatures(cfg);
  if (command == "train") return RunTrain(cfg);
  if (command == "predict") return RunPredict(cfg);
  throw Error(ErrorKind::kParameter, "unknown command '" + std::string(command) + "'");
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingFile:
      return 2;
    case ErrorKind::kSchema:
    case ErrorKind::kInput:
    case ErrorKind::kRange:
    case ErrorKind::kParameter:
      return 3;
    case ErrorKind::kTraining:
      return 4;
    default:
      return 1;
  }
}

}  // namespace velotrace
