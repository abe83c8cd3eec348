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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "segbn/evaluation.hpp"
#include "segbn/inference.hpp"

using namespace segbn;

namespace {

ClassModel model_of(std::vector<double> centers, double sigma) {
  ClassModel m;
  m.sigmas.assign(centers.size(), sigma);
  m.centers = std::move(centers);
  return m;
}

SuperpixelMap chain_map(const std::vector<int>& intensities) {
  GrayImage img(static_cast<int>(intensities.size()), 1);
  std::vector<int> raw(intensities.size());
  for (std::size_t i = 0; i < intensities.size(); ++i) {
    img.data[i] = static_cast<std::uint8_t>(intensities[i]);
    raw[i] = static_cast<int>(i);
  }
  return superpixels_from_assignment(img, raw);
}

// All k^n labelings, scored with global_score.
Labeling enumerate_best(const SuperpixelMap& sp, const ClassModel& model,
                        const PredicateConfig& cfg, double* best_score = nullptr) {
  Labeling labels(sp.n);
  Labeling best(sp.n);
  double best_val = -std::numeric_limits<double>::infinity();
  long long total = 1;
  for (int i = 0; i < sp.n; ++i) total *= model.k();
  for (long long code = 0; code < total; ++code) {
    long long c = code;
    for (int i = 0; i < sp.n; ++i) {
      labels.labels[i] = 1 + static_cast<int>(c % model.k());
      c /= model.k();
    }
    const double score = global_score(labels, sp, model, cfg);
    if (score > best_val) {
      best_val = score;
      best = labels;
    }
  }
  if (best_score) *best_score = best_val;
  return best;
}

SuperpixelMap random_instance(int w, int h, int n, std::uint64_t seed) {
  const SynthImage synth =
      synth_vertical_bands(w, h, {40, 120, 200}, 10.0, seed);
  return oversegment(synth.image, n);
}

}  // namespace

TEST_CASE("init threshold: nearest center with midpoint ties to the lower class") {
  const ClassModel two = model_of({40, 200}, 50);
  CHECK(init_threshold(chain_map({45}), two).labels == std::vector<int>{1});
  CHECK(init_threshold(chain_map({120}), two).labels == std::vector<int>{1});  // exact midpoint
  CHECK(init_threshold(chain_map({121}), two).labels == std::vector<int>{2});

  const ClassModel three = model_of({40, 120, 200}, 50);
  CHECK(init_threshold(chain_map({30, 130, 210}), three).labels == std::vector<int>{1, 2, 3});
}

TEST_CASE("icm stop rule: strictly more changes than ceil(fraction * n)") {
  IcmConfig cfg;  // stop_fraction 0.10
  CHECK(icm_change_threshold(200, cfg) == 20);
  CHECK(25 > icm_change_threshold(200, cfg));   // sweep with 25 changes continues
  CHECK(!(15 > icm_change_threshold(200, cfg)));  // sweep with 15 changes stops
  CHECK(icm_change_threshold(10, cfg) == 1);
  CHECK(icm_change_threshold(5, cfg) == 1);
  cfg.stop_fraction = 1.0;
  CHECK(icm_change_threshold(7, cfg) == 7);
  cfg.stop_fraction = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("icm: a fixpoint start yields one sweep with zero changes") {
  const SuperpixelMap sp = random_instance(24, 24, 12, 1);
  const ClassModel model = kmeans_centers(sp.means, 3, 0);
  PredicateConfig cfg;
  IcmConfig icm_cfg;

  const InferenceResult first = icm(sp, init_threshold(sp, model), model, cfg, icm_cfg);
  const InferenceResult again = icm(sp, first.labeling, model, cfg, icm_cfg);
  REQUIRE(again.trace.entries.size() == 1);
  CHECK(again.trace.entries[0].changes == 0);
  CHECK(again.labeling.labels == first.labeling.labels);
}

TEST_CASE("icm: chain middle label matches exhaustive enumeration") {
  const SuperpixelMap sp = chain_map({40, 118, 200});
  const ClassModel model = model_of({40, 120, 200}, 50);
  PredicateConfig cfg;
  IcmConfig icm_cfg;

  const Labeling best = enumerate_best(sp, model, cfg);
  const InferenceResult result = icm(sp, init_threshold(sp, model), model, cfg, icm_cfg);
  CHECK(result.labeling.labels[1] == best.labels[1]);
}

TEST_CASE("icm: per-update global score is non-decreasing") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SuperpixelMap sp = random_instance(32, 32, 16, seed);
    const ClassModel model = kmeans_centers(sp.means, 3, seed);
    PredicateConfig cfg;
    IcmConfig icm_cfg;

    Labeling init = init_threshold(sp, model);
    double prev = global_score(init, sp, model, cfg);
    int updates = 0;
    const auto observer = [&](int, int, int, const Labeling& labels) {
      const double now = global_score(labels, sp, model, cfg);
      CHECK(now >= prev - 1e-9);
      prev = now;
      ++updates;
    };
    const InferenceResult result = icm(sp, init, model, cfg, icm_cfg, observer);
    CHECK(static_cast<int>(result.trace.entries.size()) <= icm_cfg.max_sweeps);
  }
}

TEST_CASE("icm: sweep count never exceeds max_sweeps") {
  const SuperpixelMap sp = random_instance(32, 32, 20, 3);
  const ClassModel model = kmeans_centers(sp.means, 3, 3);
  PredicateConfig cfg;
  IcmConfig icm_cfg;
  icm_cfg.max_sweeps = 2;
  icm_cfg.stop_fraction = 1e-9;  // keep sweeping until no change at all
  const InferenceResult result = icm(sp, init_threshold(sp, model), model, cfg, icm_cfg);
  CHECK(result.trace.entries.size() <= 2);
}

TEST_CASE("decompose: single superpixel fixes once at the local argmax") {
  GrayImage img(2, 2, 45);
  const SuperpixelMap sp = superpixels_from_assignment(img, {0, 0, 0, 0});
  const ClassModel model = model_of({40, 200}, 50);
  PredicateConfig cfg;
  const InferenceResult result = decompose(sp, model, cfg);
  CHECK(result.trace.fix_order == std::vector<int>{0});
  CHECK(result.labeling.labels == std::vector<int>{1});
  CHECK(result.labeling.fixed == std::vector<char>{1});
}

TEST_CASE("decompose: the more confident superpixel is fixed first") {
  const SuperpixelMap sp = chain_map({40, 60});
  const ClassModel model = model_of({40, 200}, 50);
  PredicateConfig cfg;

  const Labeling init = init_threshold(sp, model);
  double best0 = -1e300, best1 = -1e300;
  for (int c = 1; c <= 2; ++c) {
    best0 = std::max(best0, local_log_score(0, c, sp, init, model, cfg));
    best1 = std::max(best1, local_log_score(1, c, sp, init, model, cfg));
  }
  REQUIRE(best0 != best1);

  const InferenceResult result = decompose(sp, model, cfg);
  REQUIRE(result.trace.fix_order.size() == 2);
  CHECK(result.trace.fix_order[0] == (best0 > best1 ? 0 : 1));
  CHECK(result.trace.fix_order[0] == 0);  // intensity 40 sits exactly on its center
}

TEST_CASE("decompose: vacuous predicates and uniform sigma reproduce the threshold init") {
  const SuperpixelMap sp = chain_map({40, 45, 200});
  ClassModel model = model_of({40, 200}, 50);
  model.region_sigmas.assign(2, 1e9);  // flatten the region term
  PredicateConfig cfg;
  cfg.p1_enabled = cfg.p2_enabled = false;

  const InferenceResult result = decompose(sp, model, cfg);
  CHECK(result.labeling.labels == init_threshold(sp, model).labels);

  // Every superpixel fixed exactly once.
  std::vector<int> order = result.trace.fix_order;
  std::sort(order.begin(), order.end());
  CHECK(order == std::vector<int>{0, 1, 2});
  for (char f : result.labeling.fixed) CHECK(f == 1);
}

TEST_CASE("decompose: decomposition changes recorded against the provisional labels") {
  const SuperpixelMap sp = random_instance(24, 24, 12, 7);
  const ClassModel model = kmeans_centers(sp.means, 3, 7);
  PredicateConfig cfg;
  const InferenceResult result = decompose(sp, model, cfg);
  REQUIRE(result.trace.entries.size() == 1);
  CHECK(result.trace.entries[0].phase == "decompose");
  int diff = 0;
  const Labeling init = init_threshold(sp, model);
  for (int i = 0; i < sp.n; ++i) {
    diff += result.labeling.labels[i] != init.labels[i] ? 1 : 0;
  }
  CHECK(result.trace.entries[0].changes == diff);
}

TEST_CASE("combined: equals decompose output when that is already a fixpoint") {
  const SuperpixelMap sp = chain_map({40, 45, 200});
  const ClassModel model = model_of({40, 200}, 50);
  PredicateConfig cfg;
  IcmConfig icm_cfg;

  const InferenceResult stage = decompose(sp, model, cfg);
  const InferenceResult follow = icm(sp, stage.labeling, model, cfg, icm_cfg);
  const InferenceResult both = combined(sp, model, cfg, icm_cfg);
  if (follow.trace.entries.size() == 1 && follow.trace.entries[0].changes == 0) {
    CHECK(both.labeling.labels == stage.labeling.labels);
  }
  CHECK(both.labeling.labels == follow.labeling.labels);
  // Concatenated trace: decompose entry first, then the ICM sweeps.
  REQUIRE(both.trace.entries.size() >= 2);
  CHECK(both.trace.entries[0].phase == "decompose");
  CHECK(both.trace.entries[1].phase == "icm");
}

TEST_CASE("combined: never scores below decompose alone") {
  for (std::uint64_t seed = 10; seed < 16; ++seed) {
    const SuperpixelMap sp = random_instance(32, 32, 18, seed);
    const ClassModel model = kmeans_centers(sp.means, 3, seed);
    PredicateConfig cfg;
    IcmConfig icm_cfg;
    const double d = global_score(decompose(sp, model, cfg).labeling, sp, model, cfg);
    const double c = global_score(combined(sp, model, cfg, icm_cfg).labeling, sp, model, cfg);
    CHECK(c >= d - 1e-9);
  }
}

TEST_CASE("combined: chain instances match exhaustive enumeration") {
  const SuperpixelMap sp = chain_map({40, 118, 200});
  const ClassModel model = model_of({40, 120, 200}, 50);
  PredicateConfig cfg;
  IcmConfig icm_cfg;
  double best_score = 0.0;
  enumerate_best(sp, model, cfg, &best_score);
  const InferenceResult result = combined(sp, model, cfg, icm_cfg);
  CHECK(global_score(result.labeling, sp, model, cfg) ==
        doctest::Approx(best_score).epsilon(1e-12));
}

TEST_CASE("inference is deterministic in (instance, model, config)") {
  const SuperpixelMap sp = random_instance(32, 32, 16, 21);
  const ClassModel model = kmeans_centers(sp.means, 3, 21);
  PredicateConfig cfg;
  IcmConfig icm_cfg;
  CHECK(icm(sp, init_threshold(sp, model), model, cfg, icm_cfg).labeling.labels ==
        icm(sp, init_threshold(sp, model), model, cfg, icm_cfg).labeling.labels);
  CHECK(decompose(sp, model, cfg).labeling.labels == decompose(sp, model, cfg).labeling.labels);
  CHECK(combined(sp, model, cfg, icm_cfg).labeling.labels ==
        combined(sp, model, cfg, icm_cfg).labeling.labels);
}

TEST_CASE("single-class model labels everything with class one") {
  const SuperpixelMap sp = chain_map({10, 100, 240});
  ClassModel model;
  model.centers = {120};
  model.sigmas = {50};
  PredicateConfig cfg;
  IcmConfig icm_cfg;
  const std::vector<int> ones = {1, 1, 1};
  CHECK(init_threshold(sp, model).labels == ones);
  CHECK(icm(sp, init_threshold(sp, model), model, cfg, icm_cfg).labeling.labels == ones);
  CHECK(decompose(sp, model, cfg).labeling.labels == ones);
  CHECK(combined(sp, model, cfg, icm_cfg).labeling.labels == ones);
}

TEST_CASE("disabled predicates and a flat region term keep the nearest-center labeling") {
  const SuperpixelMap sp = random_instance(24, 24, 10, 31);
  ClassModel model = kmeans_centers(sp.means, 3, 31);
  model.region_sigmas.assign(3, 1e9);
  PredicateConfig cfg;
  cfg.p1_enabled = cfg.p2_enabled = false;
  IcmConfig icm_cfg;

  const Labeling nearest = init_threshold(sp, model);
  const InferenceResult result = icm(sp, nearest, model, cfg, icm_cfg);
  CHECK(result.labeling.labels == nearest.labels);
  CHECK(decompose(sp, model, cfg).labeling.labels == nearest.labels);
}
