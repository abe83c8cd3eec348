// Copyright 2026 The segbn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "segbn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace segbn {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

std::string input_stem(const std::string& path) {
  const std::string stem = fs::path(path).stem().string();
  return stem.empty() ? "run" : stem;
}

std::vector<double> expand_sigma(const std::vector<double>& sigma, int k) {
  if (sigma.size() == 1) return std::vector<double>(k, sigma[0]);
  if (static_cast<int>(sigma.size()) == k) return sigma;
  raise(ErrorKind::kConfiguration, "sigma needs one value or one per class");
}

PredicateConfig predicate_config(const RunConfig& cfg) {
  PredicateConfig p;
  p.t1 = cfg.t1;
  p.t2 = cfg.t2;
  p.p1_enabled = cfg.p1;
  p.p2_enabled = cfg.p2;
  return p;
}

ClassModel pinned_model(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  const std::string text(bytes.begin(), bytes.end());
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) raise(ErrorKind::kFormat, "pinned model is not valid JSON: " + path);
  if (j.contains("model")) j = j["model"];  // accept a full run report
  if (!j.contains("centers") || !j.contains("sigmas")) {
    raise(ErrorKind::kFormat, "pinned model JSON needs {centers, sigmas}: " + path);
  }
  ClassModel m;
  m.centers = j["centers"].get<std::vector<double>>();
  m.sigmas = j["sigmas"].get<std::vector<double>>();
  m.validate();
  return m;
}

nlohmann::json trace_to_json(const InferenceTrace& trace) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : trace.entries) {
    entries.push_back({{"phase", e.phase}, {"changes", e.changes}, {"log_score", e.log_score}});
  }
  return entries;
}

nlohmann::json eval_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["accuracy"] = report.accuracy;
  j["per_class"] = report.per_class;
  j["confusion"] = report.confusion;
  j["matching"] = report.matching;
  j["seconds"] = report.seconds;
  return j;
}

std::string format_csv_double(double v) {
  std::ostringstream out;
  out.precision(9);
  out << v;
  return out.str();
}

}  // namespace

void RunConfig::validate() const {
  if (input.empty()) raise(ErrorKind::kConfiguration, "input path is required");
  if (superpixels < 1) raise(ErrorKind::kParameter, "superpixels must be positive");
  if (classes < 2) raise(ErrorKind::kParameter, "classes must be at least 2");
  if (sigma.empty()) raise(ErrorKind::kConfiguration, "sigma must not be empty");
  for (double s : sigma) {
    if (!(s > 0.0)) raise(ErrorKind::kParameter, "sigma must be positive");
  }
  if (inference != "icm" && inference != "decomp" && inference != "combined") {
    raise(ErrorKind::kConfiguration, "inference must be icm, decomp or combined");
  }
  if (init != "threshold") raise(ErrorKind::kConfiguration, "init must be threshold");
  if (!(stop_fraction > 0.0 && stop_fraction <= 1.0)) {
    raise(ErrorKind::kParameter, "stop_fraction must be in (0,1]");
  }
  if (max_sweeps < 1) raise(ErrorKind::kParameter, "max_sweeps must be at least 1");
  if (!baseline.empty() && baseline != "otsu" && baseline != "niblack" && baseline != "sauvola") {
    raise(ErrorKind::kConfiguration, "baseline must be otsu, niblack or sauvola");
  }
  if (balance < 0.0) raise(ErrorKind::kParameter, "balance must be non-negative");
  if (!(bandwidth > 0.0)) raise(ErrorKind::kParameter, "bandwidth must be positive");
  if (t1 < 0.0 || t2 < 0.0) raise(ErrorKind::kParameter, "thresholds must be non-negative");
}

void apply_overrides(RunConfig& cfg, const RunOverrides& o) {
  if (o.input) cfg.input = *o.input;
  if (o.output) cfg.output = *o.output;
  if (o.inference) cfg.inference = *o.inference;
  if (o.init) cfg.init = *o.init;
  if (o.ground_truth) cfg.ground_truth = *o.ground_truth;
  if (o.baseline) cfg.baseline = *o.baseline;
  if (o.pin_model) cfg.pin_model = *o.pin_model;
  if (o.superpixels) cfg.superpixels = *o.superpixels;
  if (o.classes) cfg.classes = *o.classes;
  if (o.max_sweeps) cfg.max_sweeps = *o.max_sweeps;
  if (o.sigma) cfg.sigma = *o.sigma;
  if (o.t1) cfg.t1 = *o.t1;
  if (o.t2) cfg.t2 = *o.t2;
  if (o.stop_fraction) cfg.stop_fraction = *o.stop_fraction;
  if (o.balance) cfg.balance = *o.balance;
  if (o.bandwidth) cfg.bandwidth = *o.bandwidth;
  if (o.seed) cfg.seed = *o.seed;
  if (o.p1) cfg.p1 = *o.p1;
  if (o.p2) cfg.p2 = *o.p2;
  if (o.overlay) cfg.overlay = *o.overlay;
  if (o.save_superpixels) cfg.save_superpixels = *o.save_superpixels;
}

RunConfig config_from_json(const nlohmann::json& j, const RunConfig& base) {
  if (!j.is_object()) raise(ErrorKind::kConfiguration, "config must be a JSON object");
  static const std::set<std::string> known = {
      "input", "output", "superpixels", "classes", "sigma", "t1", "t2",
      "predicates", "inference", "init", "stop_fraction", "max_sweeps",
      "seed", "ground_truth", "baseline", "balance", "bandwidth",
      "pin_model", "overlay", "save_superpixels"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) raise(ErrorKind::kConfiguration, "unknown config key: " + key);
  }

  RunConfig cfg = base;
  try {
    if (j.contains("input")) cfg.input = j["input"].get<std::string>();
    if (j.contains("output")) cfg.output = j["output"].get<std::string>();
    if (j.contains("superpixels")) cfg.superpixels = j["superpixels"].get<int>();
    if (j.contains("classes")) cfg.classes = j["classes"].get<int>();
    if (j.contains("sigma")) {
      if (j["sigma"].is_array()) {
        cfg.sigma = j["sigma"].get<std::vector<double>>();
      } else {
        cfg.sigma = {j["sigma"].get<double>()};
      }
    }
    if (j.contains("t1")) cfg.t1 = j["t1"].get<double>();
    if (j.contains("t2")) cfg.t2 = j["t2"].get<double>();
    if (j.contains("predicates")) {
      cfg.p1 = cfg.p2 = false;
      for (const auto& p : j["predicates"]) {
        const std::string name = p.get<std::string>();
        if (name == "p1" || name == "P1") {
          cfg.p1 = true;
        } else if (name == "p2" || name == "P2") {
          cfg.p2 = true;
        } else {
          raise(ErrorKind::kConfiguration, "unknown predicate: " + name);
        }
      }
    }
    if (j.contains("inference")) cfg.inference = j["inference"].get<std::string>();
    if (j.contains("init")) cfg.init = j["init"].get<std::string>();
    if (j.contains("stop_fraction")) cfg.stop_fraction = j["stop_fraction"].get<double>();
    if (j.contains("max_sweeps")) cfg.max_sweeps = j["max_sweeps"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("ground_truth")) cfg.ground_truth = j["ground_truth"].get<std::string>();
    if (j.contains("baseline")) cfg.baseline = j["baseline"].get<std::string>();
    if (j.contains("balance")) cfg.balance = j["balance"].get<double>();
    if (j.contains("bandwidth")) cfg.bandwidth = j["bandwidth"].get<double>();
    if (j.contains("pin_model")) cfg.pin_model = j["pin_model"].get<std::string>();
    if (j.contains("overlay")) cfg.overlay = j["overlay"].get<bool>();
    if (j.contains("save_superpixels")) cfg.save_superpixels = j["save_superpixels"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorKind::kConfiguration, std::string("bad config value: ") + e.what());
  }
  return cfg;
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["input"] = cfg.input;
  j["output"] = cfg.output;
  j["superpixels"] = cfg.superpixels;
  j["classes"] = cfg.classes;
  j["sigma"] = cfg.sigma;
  j["t1"] = cfg.t1;
  j["t2"] = cfg.t2;
  nlohmann::json preds = nlohmann::json::array();
  if (cfg.p1) preds.push_back("p1");
  if (cfg.p2) preds.push_back("p2");
  j["predicates"] = preds;
  j["inference"] = cfg.inference;
  j["init"] = cfg.init;
  j["stop_fraction"] = cfg.stop_fraction;
  j["max_sweeps"] = cfg.max_sweeps;
  j["seed"] = cfg.seed;
  j["ground_truth"] = cfg.ground_truth;
  j["baseline"] = cfg.baseline;
  j["balance"] = cfg.balance;
  j["bandwidth"] = cfg.bandwidth;
  j["pin_model"] = cfg.pin_model;
  j["overlay"] = cfg.overlay;
  j["save_superpixels"] = cfg.save_superpixels;
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  nlohmann::json j = config_to_json(cfg);
  j.erase("output");
  const std::string text = j.dump();
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << hash;
  std::string hex = out.str();
  return hex.size() > 12 ? hex.substr(0, 12) : hex;
}

LabelImage load_label_map(const std::string& path) {
  const GrayImage raw = load_gray(path);
  std::set<std::uint8_t> distinct(raw.data.begin(), raw.data.end());
  if (distinct.size() > 64) {
    raise(ErrorKind::kFormat, "label map has more than 64 distinct values: " + path);
  }
  std::map<std::uint8_t, int> to_label;
  int next = 1;
  for (std::uint8_t v : distinct) to_label[v] = next++;
  LabelImage out(raw.width, raw.height);
  for (std::size_t i = 0; i < raw.data.size(); ++i) out.labels[i] = to_label[raw.data[i]];
  return out;
}

RunResult run(const RunConfig& config) {
  config.validate();
  RunResult result;
  result.config = config;

  const auto t_start = Clock::now();
  const GrayImage img = load_gray(config.input);
  const auto t_loaded = Clock::now();

  result.superpixels = oversegment(img, config.superpixels, config.balance, config.bandwidth);
  const auto t_oversegmented = Clock::now();

  if (!config.pin_model.empty()) {
    result.model = pinned_model(config.pin_model);
    if (result.model.k() != config.classes) {
      raise(ErrorKind::kConfiguration, "pinned model class count differs from config");
    }
  } else {
    result.model = kmeans_centers(result.superpixels.means, config.classes, config.seed);
    result.model.sigmas = expand_sigma(config.sigma, config.classes);
  }
  const auto t_model = Clock::now();

  const PredicateConfig pred = predicate_config(config);
  IcmConfig icm_cfg;
  icm_cfg.stop_fraction = config.stop_fraction;
  icm_cfg.max_sweeps = config.max_sweeps;

  InferenceResult inferred;
  if (config.inference == "icm") {
    inferred = icm(result.superpixels, init_threshold(result.superpixels, result.model),
                   result.model, pred, icm_cfg);
  } else if (config.inference == "decomp") {
    inferred = decompose(result.superpixels, result.model, pred);
  } else {
    inferred = combined(result.superpixels, result.model, pred, icm_cfg);
  }
  result.labeling = std::move(inferred.labeling);
  result.trace = std::move(inferred.trace);
  const auto t_inferred = Clock::now();

  result.label_image = LabelImage(img.width, img.height);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    result.label_image.labels[i] = result.labeling.labels[result.superpixels.assignment[i]];
  }

  if (!config.ground_truth.empty()) {
    const LabelImage truth = load_label_map(config.ground_truth);
    EvalReport eval = consistency(result.label_image, truth);
    eval.seconds = seconds_between(t_inferred, Clock::now());
    result.evaluation = std::move(eval);
  }

  nlohmann::json baseline_json;
  if (!config.baseline.empty()) {
    const auto t_base = Clock::now();
    LabelImage base_labels;
    if (config.baseline == "otsu") {
      OtsuResult o = otsu(img);
      baseline_json["threshold"] = o.threshold;
      base_labels = std::move(o.labels);
    } else if (config.baseline == "niblack") {
      base_labels = niblack(img);
    } else {
      base_labels = sauvola(img);
    }
    baseline_json["name"] = config.baseline;
    baseline_json["seconds"] = seconds_between(t_base, Clock::now());
    if (!config.ground_truth.empty()) {
      EvalReport eval = consistency(base_labels, load_label_map(config.ground_truth));
      baseline_json["evaluation"] = eval_to_json(eval);
      result.baseline_evaluation = std::move(eval);
    }
  }

  // Output directory: input stem plus config digest, so suite runs with
  // different settings never collide.
  const fs::path out_dir =
      fs::path(config.output) / (input_stem(config.input) + "-" + config_hash(config));
  fs::create_directories(out_dir);
  result.out_dir = out_dir.string();

  const Palette palette = default_palette(result.model.k());
  write_file((out_dir / "labels.png").string(), render_labels(result.label_image, palette));
  if (config.overlay) {
    write_file((out_dir / "overlay.png").string(),
               render_boundary_overlay(img, result.superpixels.assignment));
  }
  if (config.save_superpixels) {
    write_file((out_dir / "superpixels.pgm").string(),
               encode_id_pgm16(img.width, img.height, result.superpixels.assignment));
  }

  const auto t_end = Clock::now();

  nlohmann::json report;
  report["schema_version"] = 1;
  report["input"] = config.input;
  report["config"] = config_to_json(config);
  report["model"] = {{"centers", result.model.centers}, {"sigmas", result.model.sigmas}};
  report["superpixels"] = {{"n", result.superpixels.n},
                           {"width", result.superpixels.width},
                           {"height", result.superpixels.height}};
  report["inference"] = {{"algorithm", config.inference},
                         {"trace", trace_to_json(result.trace)},
                         {"sweeps", result.trace.icm_sweeps()},
                         {"final_log_score", global_score(result.labeling, result.superpixels,
                                                          result.model, pred)},
                         {"labels", result.labeling.labels}};
  report["outputs"] = {{"labels_png", (out_dir / "labels.png").string()}};
  if (config.overlay) report["outputs"]["overlay_png"] = (out_dir / "overlay.png").string();
  if (config.save_superpixels) {
    report["outputs"]["superpixels_pgm"] = (out_dir / "superpixels.pgm").string();
  }
  if (result.evaluation) report["evaluation"] = eval_to_json(*result.evaluation);
  if (!baseline_json.is_null()) report["baseline"] = baseline_json;
  report["timings"] = {{"load_seconds", seconds_between(t_start, t_loaded)},
                       {"oversegment_seconds", seconds_between(t_loaded, t_oversegmented)},
                       {"model_seconds", seconds_between(t_oversegmented, t_model)},
                       {"inference_seconds", seconds_between(t_model, t_inferred)},
                       {"total_seconds", seconds_between(t_start, t_end)}};
  result.report = report;

  {
    const std::string text = report.dump(2) + "\n";
    write_file((out_dir / "report.json").string(), {text.begin(), text.end()});
  }
  {
    std::ostringstream csv;
    csv << "image,algorithm,n,k,accuracy,seconds,sweeps\n";
    csv << config.input << "," << config.inference << "," << config.superpixels << ","
        << config.classes << ",";
    if (result.evaluation) csv << format_csv_double(result.evaluation->accuracy);
    csv << "," << format_csv_double(seconds_between(t_start, t_end)) << ","
        << result.trace.icm_sweeps() << "\n";
    const std::string text = csv.str();
    write_file((out_dir / "metrics.csv").string(), {text.begin(), text.end()});
  }

  return result;
}

SuiteResult run_suite(const std::vector<RunConfig>& configs, int jobs) {
  if (configs.empty()) raise(ErrorKind::kParameter, "suite needs at least one config");
  jobs = std::clamp(jobs, 1, 64);

  SuiteResult suite;
  suite.rows.resize(configs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= configs.size()) return;
      SuiteRow& row = suite.rows[idx];
      row.image = configs[idx].input;
      row.algorithm = configs[idx].inference;
      row.n = configs[idx].superpixels;
      row.k = configs[idx].classes;
      try {
        const RunResult r = run(configs[idx]);
        row.seconds = r.report["timings"]["total_seconds"].get<double>();
        row.sweeps = r.trace.icm_sweeps();
        if (r.evaluation) row.accuracy = r.evaluation->accuracy;
        row.ok = true;
      } catch (const Error& e) {
        row.ok = false;
        row.error = std::string(to_string(e.kind())) + ": " + e.what();
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Aggregate: rows in input order, then one mean row per algorithm over
  // the successful rows, algorithms in first-seen order.
  std::ostringstream csv;
  csv << "image,algorithm,n,k,accuracy,seconds,sweeps,status\n";
  nlohmann::json rows_json = nlohmann::json::array();
  for (const SuiteRow& row : suite.rows) {
    csv << row.image << "," << row.algorithm << "," << row.n << "," << row.k << ",";
    if (row.ok && row.accuracy >= 0.0) csv << format_csv_double(row.accuracy);
    csv << ",";
    if (row.ok) csv << format_csv_double(row.seconds);
    csv << ",";
    if (row.ok) csv << row.sweeps;
    csv << "," << (row.ok ? "ok" : "failed") << "\n";
    nlohmann::json j = {{"image", row.image},   {"algorithm", row.algorithm},
                        {"n", row.n},           {"k", row.k},
                        {"seconds", row.seconds}, {"sweeps", row.sweeps},
                        {"status", row.ok ? "ok" : "failed"}};
    if (row.ok && row.accuracy >= 0.0) j["accuracy"] = row.accuracy;
    if (!row.ok) j["error"] = row.error;
    rows_json.push_back(j);
  }

  std::vector<std::string> algorithms;
  for (const SuiteRow& row : suite.rows) {
    if (std::find(algorithms.begin(), algorithms.end(), row.algorithm) == algorithms.end()) {
      algorithms.push_back(row.algorithm);
    }
  }
  nlohmann::json means_json;
  for (const std::string& algo : algorithms) {
    double acc = 0.0, secs = 0.0, sweeps = 0.0;
    int count = 0, acc_count = 0;
    for (const SuiteRow& row : suite.rows) {
      if (!row.ok || row.algorithm != algo) continue;
      ++count;
      secs += row.seconds;
      sweeps += row.sweeps;
      if (row.accuracy >= 0.0) {
        acc += row.accuracy;
        ++acc_count;
      }
    }
    if (count == 0) continue;
    csv << "mean," << algo << ",,,";
    if (acc_count > 0) csv << format_csv_double(acc / acc_count);
    csv << "," << format_csv_double(secs / count) << "," << format_csv_double(sweeps / count)
        << ",ok\n";
    nlohmann::json m = {{"runs", count},
                        {"seconds", secs / count},
                        {"sweeps", sweeps / count}};
    if (acc_count > 0) m["accuracy"] = acc / acc_count;
    means_json[algo] = m;
  }

  suite.csv = csv.str();
  suite.json = {{"rows", rows_json}, {"means", means_json}};
  return suite;
}

}  // namespace segbn
