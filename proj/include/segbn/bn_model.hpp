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

#ifndef SEGBN_BN_MODEL_HPP_
#define SEGBN_BN_MODEL_HPP_

#include <vector>

#include "segbn/class_model.hpp"
#include "segbn/superpixel.hpp"

namespace segbn {

/// Per-superpixel class assignment (1..k) plus the fixed/unfixed status used
/// by the decomposition algorithm.
struct Labeling {
  std::vector<int> labels;
  std::vector<char> fixed;

  Labeling() = default;
  explicit Labeling(int n, int label = 1)
      : labels(n, label), fixed(n, 0) {}

  int size() const { return static_cast<int>(labels.size()); }
  bool operator==(const Labeling&) const = default;
};

/// One superpixel's neighborhood region: the split of its neighbors into the
/// same-class part (sr1) and the rest (sr2), and the mean pixel intensity of
/// the superpixel together with sr1.
struct RegionView {
  int center_id = 0;
  std::vector<int> sr1;
  std::vector<int> sr2;
  double r_value = 0.0;
};

/// Predicate thresholds and the evidence strength of a satisfied/violated
/// predicate.
struct PredicateConfig {
  double t1 = 15.0;       // homogeneity threshold
  double t2 = 30.0;       // contrast threshold
  bool p1_enabled = true;
  bool p2_enabled = true;
  double p_true = 0.8;
  double p_false = 0.2;

  void validate() const;
};

/// Splits superpixel i's neighborhood by the current labels. r_value is the
/// pixel-size-weighted mean over {i} union sr1, i.e. the true mean intensity
/// over those members' pixels.
RegionView region_view(const SuperpixelMap& sp, const Labeling& labels, int i);

/// As region_view, but evaluated as if labels[override_id] were
/// override_label. Used to score candidate classes without mutating.
RegionView region_view_with(const SuperpixelMap& sp, const Labeling& labels, int i,
                            int override_id, int override_label);

/// Homogeneity/contrast test on RMS deviation from the center's mean:
/// true iff rms(sr1 means - S) < t1 and rms(sr2 means - S) > t2.
/// An empty side makes its clause vacuously true.
bool eval_p1(const RegionView& view, const SuperpixelMap& sp, const PredicateConfig& cfg);

/// Extremal version: max |sr1 mean - S| < t1 and min |sr2 mean - S| > t2,
/// empty sides vacuous as in eval_p1.
bool eval_p2(const RegionView& view, const SuperpixelMap& sp, const PredicateConfig& cfg);

double predicate_factor(bool holds, const PredicateConfig& cfg);

/// Single-node factor product for labels[i] = c: the class posterior given
/// the superpixel mean, the region likelihood at the resulting r_value, and
/// the enabled predicate factors.
double local_score(int i, int c, const SuperpixelMap& sp, const Labeling& labels,
                   const ClassModel& model, const PredicateConfig& cfg);

/// log local_score, computed directly in the log domain.
double local_log_score(int i, int c, const SuperpixelMap& sp, const Labeling& labels,
                       const ClassModel& model, const PredicateConfig& cfg);

/// Log of the i-th summand of global_score under the current labels.
double node_log_score(int i, const SuperpixelMap& sp, const Labeling& labels,
                      const ClassModel& model, const PredicateConfig& cfg);

/// Joint log-score of a complete labeling: sum over superpixels of
/// log posterior + log region likelihood + log predicate factors.
/// A zero factor anywhere yields -infinity.
double global_score(const Labeling& labels, const SuperpixelMap& sp,
                    const ClassModel& model, const PredicateConfig& cfg);

/// Log of the full conditional score of Y_i = c given every other label:
/// the sum of node_log_score over i and its neighbors with labels[i] = c.
/// These are exactly the summands of global_score that depend on Y_i (plus
/// constants), so argmax over c is coordinate ascent on global_score.
double conditional_log_score(int i, int c, const SuperpixelMap& sp, const Labeling& labels,
                             const ClassModel& model, const PredicateConfig& cfg);

}  // namespace segbn

#endif  // SEGBN_BN_MODEL_HPP_
