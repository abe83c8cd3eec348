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

#ifndef SEGBN_PIPELINE_HPP_
#define SEGBN_PIPELINE_HPP_

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "segbn/evaluation.hpp"
#include "segbn/inference.hpp"
#include "segbn/raster_io.hpp"

namespace segbn {

/// Everything one end-to-end run needs. Field defaults are the project
/// defaults; a JSON config file overrides them and CLI flags override both.
struct RunConfig {
  std::string input;
  std::string output = "segbn-out";
  int superpixels = 200;
  int classes = 2;
  std::vector<double> sigma = {50.0};  // one value for all classes, or one per class
  double t1 = 15.0;
  double t2 = 30.0;
  bool p1 = true;
  bool p2 = true;
  std::string inference = "combined";  // icm | decomp | combined
  std::string init = "threshold";
  double stop_fraction = 0.10;
  int max_sweeps = 20;
  std::uint64_t seed = 0;
  std::string ground_truth;  // optional label-map path
  std::string baseline;      // optional: otsu | niblack | sauvola
  double balance = 0.5;
  double bandwidth = 30.0;
  std::string pin_model;     // optional: model or report JSON to reuse
  bool overlay = false;           // write superpixel boundary overlay PNG
  bool save_superpixels = false;  // write 16-bit id PGM

  void validate() const;
};

/// Optional per-field replacements, used for CLI-flag precedence.
struct RunOverrides {
  std::optional<std::string> input, output, inference, init, ground_truth, baseline, pin_model;
  std::optional<int> superpixels, classes, max_sweeps;
  std::optional<std::vector<double>> sigma;
  std::optional<double> t1, t2, stop_fraction, balance, bandwidth;
  std::optional<std::uint64_t> seed;
  std::optional<bool> p1, p2, overlay, save_superpixels;
};

/// Applies every set override onto the config.
void apply_overrides(RunConfig& cfg, const RunOverrides& overrides);

/// Parses a flat-key JSON config object on top of `base`. Unknown keys are
/// a configuration error.
RunConfig config_from_json(const nlohmann::json& j, const RunConfig& base = {});
nlohmann::json config_to_json(const RunConfig& cfg);

/// Stable FNV-1a digest of the config (output root excluded); names the
/// per-run output directory together with the input stem.
std::string config_hash(const RunConfig& cfg);

/// Loads a ground-truth label map: distinct intensities, sorted ascending,
/// become classes 1..m.
LabelImage load_label_map(const std::string& path);

struct RunResult {
  RunConfig config;
  std::string out_dir;
  SuperpixelMap superpixels;
  ClassModel model;
  Labeling labeling;
  LabelImage label_image;
  InferenceTrace trace;
  std::optional<EvalReport> evaluation;
  std::optional<EvalReport> baseline_evaluation;
  nlohmann::json report;
};

/// Full pipeline: load, over-segment, cluster, infer, render, evaluate.
/// Writes labels.png, report.json and metrics.csv (plus optional overlay
/// and superpixel map) into a fresh directory under config.output named
/// `<input stem>-<config hash>`.
RunResult run(const RunConfig& config);

struct SuiteRow {
  std::string image;
  std::string algorithm;
  int n = 0;
  int k = 0;
  double accuracy = -1.0;  // negative: not evaluated
  double seconds = 0.0;
  int sweeps = 0;
  bool ok = false;
  std::string error;
};

struct SuiteResult {
  std::vector<SuiteRow> rows;   // one per config, in input order
  std::string csv;              // rows plus one mean row per algorithm
  nlohmann::json json;          // same content as structured data
};

/// Runs every config (failures are recorded, not fatal) with up to `jobs`
/// runs in flight at once.
SuiteResult run_suite(const std::vector<RunConfig>& configs, int jobs = 1);

}  // namespace segbn

#endif  // SEGBN_PIPELINE_HPP_
