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

#ifndef SEGBN_INFERENCE_HPP_
#define SEGBN_INFERENCE_HPP_

#include <functional>
#include <string>
#include <vector>

#include "segbn/bn_model.hpp"

namespace segbn {

struct IcmConfig {
  double stop_fraction = 0.10;  // keep sweeping while changes exceed this share
  int max_sweeps = 20;

  void validate() const;
};

/// One record per inference phase step: for ICM a sweep, for the
/// decomposition the whole fixing pass.
struct TraceEntry {
  std::string phase;   // "icm" or "decompose"
  int changes = 0;     // label changes in this step
  double log_score = 0.0;
};

struct InferenceTrace {
  std::vector<TraceEntry> entries;
  std::vector<int> fix_order;  // decomposition only: ids in fixing order
  double seconds = 0.0;

  int icm_sweeps() const;
};

struct InferenceResult {
  Labeling labeling;
  InferenceTrace trace;
};

/// Number of label changes above which another ICM sweep runs.
int icm_change_threshold(int n, const IcmConfig& cfg);

/// Nearest-center labeling of the superpixel means; midpoint ties go to the
/// lower class. All superpixels start unfixed.
Labeling init_threshold(const SuperpixelMap& sp, const ClassModel& model);

/// Called after every accepted ICM label update; used by instrumented runs.
using IcmUpdateObserver =
    std::function<void(int superpixel, int old_label, int new_label, const Labeling& labels)>;

/// Iterated conditional modes: sweeps superpixels in ascending id order and
/// sets each label to the class maximizing its full conditional score (ties
/// to the lower class), updates visible immediately within the sweep.
/// Sweeps repeat while more than icm_change_threshold labels changed and
/// fewer than max_sweeps sweeps ran.
InferenceResult icm(const SuperpixelMap& sp, const Labeling& init, const ClassModel& model,
                    const PredicateConfig& cfg, const IcmConfig& icm_cfg,
                    const IcmUpdateObserver& on_update = nullptr);

/// Model decomposition: starting from the threshold initialization with all
/// superpixels unfixed, repeatedly picks the unfixed superpixel whose best
/// class has the largest local score (ties to the lower id), fixes it at
/// that class (ties to the lower class), and repeats until none are left.
/// Unfixed neighbors contribute their provisional labels.
InferenceResult decompose(const SuperpixelMap& sp, const ClassModel& model,
                          const PredicateConfig& cfg);

/// Decomposition followed by ICM started from its output; the returned
/// trace concatenates both phases.
InferenceResult combined(const SuperpixelMap& sp, const ClassModel& model,
                         const PredicateConfig& cfg, const IcmConfig& icm_cfg);

}  // namespace segbn

#endif  // SEGBN_INFERENCE_HPP_
