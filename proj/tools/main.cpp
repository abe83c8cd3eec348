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

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "segbn/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      segbn::raise(segbn::ErrorKind::kConfiguration, "bad numeric list: " + text);
    }
  }
  if (out.empty()) segbn::raise(segbn::ErrorKind::kConfiguration, "empty numeric list");
  return out;
}

std::pair<bool, bool> parse_predicates(const std::string& text) {
  if (text == "none") return {false, false};
  bool p1 = false, p2 = false;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "p1" || item == "P1") {
      p1 = true;
    } else if (item == "p2" || item == "P2") {
      p2 = true;
    } else {
      segbn::raise(segbn::ErrorKind::kConfiguration, "unknown predicate: " + item);
    }
  }
  return {p1, p2};
}

segbn::RunConfig load_config_file(const std::string& path, const segbn::RunConfig& base) {
  const auto bytes = segbn::read_file(path);
  nlohmann::json j = nlohmann::json::parse(std::string(bytes.begin(), bytes.end()), nullptr, false);
  if (j.is_discarded()) {
    segbn::raise(segbn::ErrorKind::kConfiguration, "config file is not valid JSON: " + path);
  }
  return segbn::config_from_json(j, base);
}

// One machine-parsable diagnostic line on stderr.
int report_error(const segbn::Error& e) {
  nlohmann::json j = {{"error", {{"kind", segbn::to_string(e.kind())}, {"message", e.what()}}}};
  std::cerr << j.dump() << std::endl;
  return 1;
}

struct RunFlags {
  std::string config_path, sigma_text, predicates_text;
  segbn::RunOverrides overrides;
};

void add_run_options(CLI::App* cmd, RunFlags& flags) {
  auto opt = [&](auto* option) { return option; };
  opt(cmd->add_option("--config", flags.config_path, "JSON config file"));

  auto bind_int = [cmd](const char* name, std::optional<int>& slot, const char* help) {
    cmd->add_option_function<int>(name, [&slot](int v) { slot = v; }, help);
  };
  auto bind_double = [cmd](const char* name, std::optional<double>& slot, const char* help) {
    cmd->add_option_function<double>(name, [&slot](double v) { slot = v; }, help);
  };
  auto bind_string = [cmd](const char* name, std::optional<std::string>& slot, const char* help) {
    cmd->add_option_function<std::string>(name, [&slot](const std::string& v) { slot = v; }, help);
  };

  bind_int("--superpixels", flags.overrides.superpixels, "target superpixel count");
  bind_int("--classes", flags.overrides.classes, "number of intensity classes");
  cmd->add_option_function<std::string>(
      "--sigma",
      [&flags](const std::string& v) { flags.overrides.sigma = parse_double_list(v); },
      "class sigma, scalar or comma list (one per class)");
  bind_string("--inference", flags.overrides.inference, "icm | decomp | combined");
  bind_double("--stop-frac", flags.overrides.stop_fraction, "ICM stop fraction in (0,1]");
  bind_int("--max-sweeps", flags.overrides.max_sweeps, "ICM sweep cap");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&flags](std::uint64_t v) { flags.overrides.seed = v; }, "clustering seed");
  bind_string("--ground-truth", flags.overrides.ground_truth, "ground-truth label map");
  bind_string("--baseline", flags.overrides.baseline, "otsu | niblack | sauvola");
  cmd->add_option_function<std::string>(
      "--predicates",
      [&flags](const std::string& v) {
        const auto [p1, p2] = parse_predicates(v);
        flags.overrides.p1 = p1;
        flags.overrides.p2 = p2;
      },
      "enabled predicates: p1,p2 or none");
  bind_double("--t1", flags.overrides.t1, "homogeneity threshold");
  bind_double("--t2", flags.overrides.t2, "contrast threshold");
  bind_double("--balance", flags.overrides.balance, "over-segmentation balance weight");
  bind_double("--bandwidth", flags.overrides.bandwidth, "similarity kernel bandwidth");
  bind_string("--output", flags.overrides.output, "output root directory");
  bind_string("--pin-model", flags.overrides.pin_model, "reuse centers from a model/report JSON");
  cmd->add_flag_function(
      "--overlay", [&flags](std::int64_t) { flags.overrides.overlay = true; },
      "write superpixel boundary overlay");
  cmd->add_flag_function(
      "--save-superpixels", [&flags](std::int64_t) { flags.overrides.save_superpixels = true; },
      "write 16-bit superpixel id PGM");
}

segbn::RunConfig effective_config(const RunFlags& flags) {
  segbn::RunConfig cfg;
  if (!flags.config_path.empty()) cfg = load_config_file(flags.config_path, cfg);
  segbn::apply_overrides(cfg, flags.overrides);
  return cfg;
}

int cmd_run(const RunFlags& flags) {
  const segbn::RunConfig cfg = effective_config(flags);
  const segbn::RunResult result = segbn::run(cfg);
  std::cout << "report: " << result.out_dir << "/report.json\n";
  std::cout << "labels: " << result.out_dir << "/labels.png\n";
  if (result.evaluation) {
    std::cout << "accuracy: " << result.evaluation->accuracy << "\n";
  }
  return 0;
}

int cmd_suite(const std::string& source, const RunFlags& flags, int jobs,
              const std::string& out_path) {
  std::vector<segbn::RunConfig> configs;
  segbn::RunConfig base;
  if (!flags.config_path.empty()) base = load_config_file(flags.config_path, base);

  if (fs::is_directory(source)) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(source)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) configs.push_back(load_config_file(file, base));
  } else {
    const auto bytes = segbn::read_file(source);
    nlohmann::json j =
        nlohmann::json::parse(std::string(bytes.begin(), bytes.end()), nullptr, false);
    if (j.is_discarded() || !j.is_array()) {
      segbn::raise(segbn::ErrorKind::kConfiguration,
                   "suite source must be a directory or a JSON array file: " + source);
    }
    for (const auto& item : j) configs.push_back(segbn::config_from_json(item, base));
  }
  for (auto& cfg : configs) segbn::apply_overrides(cfg, flags.overrides);

  const segbn::SuiteResult suite = segbn::run_suite(configs, jobs);

  fs::path csv_path = out_path.empty() ? fs::path("suite.csv") : fs::path(out_path);
  if (!csv_path.parent_path().empty()) fs::create_directories(csv_path.parent_path());
  segbn::write_file(csv_path.string(), {suite.csv.begin(), suite.csv.end()});
  const std::string json_text = suite.json.dump(2) + "\n";
  fs::path json_path = csv_path;
  json_path.replace_extension(".json");
  segbn::write_file(json_path.string(), {json_text.begin(), json_text.end()});

  std::cout << suite.csv;
  int failures = 0;
  for (const auto& row : suite.rows) failures += row.ok ? 0 : 1;
  std::cout << "suite: " << suite.rows.size() - failures << "/" << suite.rows.size()
            << " runs succeeded; csv: " << csv_path.string() << "\n";
  return 0;
}

int cmd_synth(const std::string& bands_text, const std::string& spec_path,
              const std::string& size_text, double noise, std::uint64_t seed,
              const std::string& out_path, const std::string& truth_path) {
  int width = 256, height = 256;
  if (!size_text.empty()) {
    const auto x = size_text.find('x');
    if (x == std::string::npos) {
      segbn::raise(segbn::ErrorKind::kConfiguration, "--size expects WIDTHxHEIGHT");
    }
    width = std::stoi(size_text.substr(0, x));
    height = std::stoi(size_text.substr(x + 1));
  }

  segbn::SynthImage synth;
  if (!spec_path.empty()) {
    const auto bytes = segbn::read_file(spec_path);
    nlohmann::json j =
        nlohmann::json::parse(std::string(bytes.begin(), bytes.end()), nullptr, false);
    if (j.is_discarded()) {
      segbn::raise(segbn::ErrorKind::kConfiguration, "region spec is not valid JSON");
    }
    width = j.value("width", width);
    height = j.value("height", height);
    std::vector<segbn::RegionSpec> regions;
    for (const auto& r : j.at("regions")) {
      regions.push_back({r.at("x").get<int>(), r.at("y").get<int>(), r.at("w").get<int>(),
                         r.at("h").get<int>(),
                         static_cast<std::uint8_t>(r.at("intensity").get<int>())});
    }
    synth = segbn::synth_image(width, height, regions, noise, seed);
  } else if (!bands_text.empty()) {
    std::vector<std::uint8_t> bands;
    for (double v : parse_double_list(bands_text)) {
      bands.push_back(static_cast<std::uint8_t>(v));
    }
    synth = segbn::synth_vertical_bands(width, height, bands, noise, seed);
  } else {
    segbn::raise(segbn::ErrorKind::kConfiguration, "synth needs --bands or --spec");
  }

  segbn::save_pgm(synth.image, out_path);
  if (!truth_path.empty()) {
    segbn::GrayImage truth_gray(synth.truth.width, synth.truth.height);
    const int k = synth.truth.max_label();
    for (std::size_t i = 0; i < truth_gray.data.size(); ++i) {
      // Spread labels over 0..255 so the map stays a valid label image.
      truth_gray.data[i] =
          static_cast<std::uint8_t>((synth.truth.labels[i] - 1) * 255 / std::max(k - 1, 1));
    }
    segbn::save_pgm(truth_gray, truth_path);
  }
  std::cout << "image: " << out_path << "\n";
  return 0;
}

int cmd_bench(const std::string& input, const std::string& counts_text, int classes,
              std::uint64_t seed, int repeats, const std::string& out_path) {
  const segbn::GrayImage img = segbn::load_gray(input);
  std::vector<int> counts;
  for (double v : parse_double_list(counts_text)) counts.push_back(static_cast<int>(v));
  segbn::ScalingConfig cfg;
  cfg.classes = classes;
  cfg.seed = seed;
  cfg.repeats = repeats;
  const segbn::ScalingReport report = segbn::scaling_benchmark(img, counts, cfg);

  std::ostringstream csv;
  csv << "n,seconds,total_seconds\n";
  for (const auto& row : report.rows) {
    csv << row.n << "," << row.seconds << "," << row.total_seconds << "\n";
  }
  std::cout << csv.str();
  std::cout << "r_squared: " << report.r_squared << "\n";
  if (!out_path.empty()) {
    const std::string text = csv.str();
    segbn::write_file(out_path, {text.begin(), text.end()});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Superpixel Bayesian-network image segmentation"};
  app.require_subcommand(1);

  // run
  RunFlags run_flags;
  std::string run_input;
  CLI::App* run_cmd = app.add_subcommand("run", "segment one image");
  run_cmd->add_option("input", run_input, "PNG or PGM image");
  add_run_options(run_cmd, run_flags);

  // suite
  RunFlags suite_flags;
  std::string suite_source, suite_out;
  int suite_jobs = 1;
  CLI::App* suite_cmd = app.add_subcommand("suite", "run a batch of configs");
  suite_cmd->add_option("source", suite_source, "directory of *.json configs or JSON array file")
      ->required();
  suite_cmd->add_option("--jobs", suite_jobs, "parallel runs");
  suite_cmd->add_option("--out", suite_out, "aggregate CSV path (default suite.csv)");
  add_run_options(suite_cmd, suite_flags);

  // synth
  std::string synth_bands, synth_spec, synth_size, synth_out = "synth.pgm", synth_truth;
  double synth_noise = 0.0;
  std::uint64_t synth_seed = 0;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic test image");
  synth_cmd->add_option("--bands", synth_bands, "vertical band intensities, e.g. 40,120,200");
  synth_cmd->add_option("--spec", synth_spec, "JSON region spec file");
  synth_cmd->add_option("--size", synth_size, "canvas WIDTHxHEIGHT (default 256x256)");
  synth_cmd->add_option("--noise", synth_noise, "Gaussian noise sigma");
  synth_cmd->add_option("--seed", synth_seed, "noise seed");
  synth_cmd->add_option("--out", synth_out, "output image (PGM)");
  synth_cmd->add_option("--truth", synth_truth, "also write ground-truth label map (PGM)");

  // bench
  std::string bench_input, bench_counts = "100,200,400,800", bench_out;
  int bench_classes = 3, bench_repeats = 3;
  std::uint64_t bench_seed = 0;
  CLI::App* bench_cmd = app.add_subcommand("bench", "time the pipeline over superpixel counts");
  bench_cmd->add_option("input", bench_input, "PNG or PGM image")->required();
  bench_cmd->add_option("--counts", bench_counts, "comma list of superpixel counts");
  bench_cmd->add_option("--classes", bench_classes, "number of classes");
  bench_cmd->add_option("--seed", bench_seed, "clustering seed");
  bench_cmd->add_option("--repeats", bench_repeats, "repetitions per count");
  bench_cmd->add_option("--out", bench_out, "write the timing CSV here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      if (!run_input.empty()) run_flags.overrides.input = run_input;
      return cmd_run(run_flags);
    }
    if (suite_cmd->parsed()) {
      return cmd_suite(suite_source, suite_flags, suite_jobs, suite_out);
    }
    if (synth_cmd->parsed()) {
      return cmd_synth(synth_bands, synth_spec, synth_size, synth_noise, synth_seed, synth_out,
                       synth_truth);
    }
    if (bench_cmd->parsed()) {
      return cmd_bench(bench_input, bench_counts, bench_classes, bench_seed, bench_repeats,
                       bench_out);
    }
  } catch (const segbn::Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    return report_error(segbn::Error(segbn::ErrorKind::kIo, e.what()));
  }
  return 0;
}
