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

#include "segbn/inference.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "segbn/error.hpp"

namespace segbn {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// argmax over classes with ties to the lower class.
struct BestClass {
  int cls = 1;
  double score = -std::numeric_limits<double>::infinity();
};

// ICM update rule: the full conditional P(Y_i | everything else), so every
// accepted update is an ascent step on the global score.
BestClass best_conditional(int i, const SuperpixelMap& sp, const Labeling& labels,
                           const ClassModel& model, const PredicateConfig& cfg) {
  BestClass best;
  for (int c = 1; c <= model.k(); ++c) {
    const double s = conditional_log_score(i, c, sp, labels, model, cfg);
    if (s > best.score) {
      best.score = s;
      best.cls = c;
    }
  }
  return best;
}

// Decomposition rule: the node's own factor product, evidence from fixed
// and provisional neighbor labels alike.
BestClass best_local(int i, const SuperpixelMap& sp, const Labeling& labels,
                     const ClassModel& model, const PredicateConfig& cfg) {
  BestClass best;
  for (int c = 1; c <= model.k(); ++c) {
    const double s = local_log_score(i, c, sp, labels, model, cfg);
    if (s > best.score) {
      best.score = s;
      best.cls = c;
    }
  }
  return best;
}

}  // namespace

void IcmConfig::validate() const {
  if (!(stop_fraction > 0.0 && stop_fraction <= 1.0)) {
    raise(ErrorKind::kParameter, "stop_fraction must be in (0,1]");
  }
  if (max_sweeps < 1) raise(ErrorKind::kParameter, "max_sweeps must be at least 1");
}

int InferenceTrace::icm_sweeps() const {
  int sweeps = 0;
  for (const auto& e : entries) sweeps += e.phase == "icm" ? 1 : 0;
  return sweeps;
}

int icm_change_threshold(int n, const IcmConfig& cfg) {
  // Tiny slack so e.g. 0.10 * 200 lands on 20 rather than ceil(20.0000000004).
  return static_cast<int>(std::ceil(cfg.stop_fraction * n - 1e-9));
}

Labeling init_threshold(const SuperpixelMap& sp, const ClassModel& model) {
  model.validate();
  Labeling labels(sp.n);
  for (int i = 0; i < sp.n; ++i) {
    // Midpoints between consecutive sorted centers; a value exactly on a
    // midpoint stays with the lower class.
    int cls = 1;
    for (int j = 0; j + 1 < model.k(); ++j) {
      const double midpoint = 0.5 * (model.centers[j] + model.centers[j + 1]);
      if (sp.means[i] > midpoint) cls = j + 2;
    }
    labels.labels[i] = cls;
  }
  return labels;
}

InferenceResult icm(const SuperpixelMap& sp, const Labeling& init, const ClassModel& model,
                    const PredicateConfig& cfg, const IcmConfig& icm_cfg,
                    const IcmUpdateObserver& on_update) {
  model.validate();
  cfg.validate();
  icm_cfg.validate();
  if (init.size() != sp.n) raise(ErrorKind::kParameter, "initial labeling size mismatch");

  const auto start = Clock::now();
  InferenceResult result;
  result.labeling = init;
  Labeling& labels = result.labeling;

  const int threshold = icm_change_threshold(sp.n, icm_cfg);
  for (int sweep = 0; sweep < icm_cfg.max_sweeps; ++sweep) {
    int changes = 0;
    for (int i = 0; i < sp.n; ++i) {
      const BestClass best = best_conditional(i, sp, labels, model, cfg);
      if (best.cls != labels.labels[i]) {
        const int old_label = labels.labels[i];
        labels.labels[i] = best.cls;
        ++changes;
        if (on_update) on_update(i, old_label, best.cls, labels);
      }
    }
    result.trace.entries.push_back({"icm", changes, global_score(labels, sp, model, cfg)});
    if (changes <= threshold) break;
  }

  result.trace.seconds = seconds_since(start);
  return result;
}

InferenceResult decompose(const SuperpixelMap& sp, const ClassModel& model,
                          const PredicateConfig& cfg) {
  model.validate();
  cfg.validate();

  const auto start = Clock::now();
  InferenceResult result;
  result.labeling = init_threshold(sp, model);
  Labeling& labels = result.labeling;
  const Labeling provisional = labels;

  // Cached best class per unfixed superpixel. A node's local score depends
  // only on its neighbors' labels, so fixing node i at a label that differs
  // from its provisional value stales exactly the caches of its neighbors.
  std::vector<BestClass> cache(sp.n);
  std::vector<char> dirty(sp.n, 1);

  for (int step = 0; step < sp.n; ++step) {
    int pick = -1;
    for (int i = 0; i < sp.n; ++i) {
      if (labels.fixed[i]) continue;
      if (dirty[i]) {
        cache[i] = best_local(i, sp, labels, model, cfg);
        dirty[i] = 0;
      }
      if (pick < 0 || cache[i].score > cache[pick].score) pick = i;
    }
    labels.fixed[pick] = 1;
    result.trace.fix_order.push_back(pick);
    const int old_label = labels.labels[pick];
    labels.labels[pick] = cache[pick].cls;
    if (labels.labels[pick] != old_label) {
      for (int j : sp.adjacency[pick]) dirty[j] = 1;
    }
  }

  int changes = 0;
  for (int i = 0; i < sp.n; ++i) {
    changes += labels.labels[i] != provisional.labels[i] ? 1 : 0;
  }
  result.trace.entries.push_back({"decompose", changes, global_score(labels, sp, model, cfg)});
  result.trace.seconds = seconds_since(start);
  return result;
}

InferenceResult combined(const SuperpixelMap& sp, const ClassModel& model,
                         const PredicateConfig& cfg, const IcmConfig& icm_cfg) {
  InferenceResult stage1 = decompose(sp, model, cfg);
  InferenceResult stage2 = icm(sp, stage1.labeling, model, cfg, icm_cfg);
  InferenceResult result;
  result.labeling = std::move(stage2.labeling);
  result.trace.entries = std::move(stage1.trace.entries);
  result.trace.entries.insert(result.trace.entries.end(), stage2.trace.entries.begin(),
                              stage2.trace.entries.end());
  result.trace.fix_order = std::move(stage1.trace.fix_order);
  result.trace.seconds = stage1.trace.seconds + stage2.trace.seconds;
  return result;
}

}  // namespace segbn
