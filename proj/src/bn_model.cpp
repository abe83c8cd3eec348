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

#include "segbn/bn_model.hpp"

#include <cmath>
#include <limits>

#include "segbn/error.hpp"

namespace segbn {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline int label_at(const Labeling& labels, int j, int override_id, int override_label) {
  return j == override_id ? override_label : labels.labels[j];
}

// RMS deviation of the members' means about the center value s.
double rms_about(const std::vector<int>& members, const SuperpixelMap& sp, double s) {
  double acc = 0.0;
  for (int j : members) {
    const double d = sp.means[j] - s;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(members.size()));
}

double log_or_neg_inf(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

double node_log_score_with(int i, const SuperpixelMap& sp, const Labeling& labels,
                           const ClassModel& model, const PredicateConfig& cfg,
                           int override_id, int override_label) {
  const int yi = label_at(labels, i, override_id, override_label);
  const RegionView view = region_view_with(sp, labels, i, override_id, override_label);
  const std::vector<double> post = posterior_y(sp.means[i], model);
  double score = log_or_neg_inf(post[yi - 1]);
  score += log_or_neg_inf(region_likelihood(view.r_value, yi, model));
  if (cfg.p1_enabled) score += log_or_neg_inf(predicate_factor(eval_p1(view, sp, cfg), cfg));
  if (cfg.p2_enabled) score += log_or_neg_inf(predicate_factor(eval_p2(view, sp, cfg), cfg));
  return score;
}

}  // namespace

void PredicateConfig::validate() const {
  if (!(0.0 < p_false && p_false < p_true && p_true < 1.0)) {
    raise(ErrorKind::kParameter, "predicate probabilities need 0 < p_false < p_true < 1");
  }
  if (t1 < 0.0 || t2 < 0.0) {
    raise(ErrorKind::kParameter, "predicate thresholds must be non-negative");
  }
}

RegionView region_view(const SuperpixelMap& sp, const Labeling& labels, int i) {
  return region_view_with(sp, labels, i, -1, 0);
}

RegionView region_view_with(const SuperpixelMap& sp, const Labeling& labels, int i,
                            int override_id, int override_label) {
  if (i < 0 || i >= sp.n) raise(ErrorKind::kParameter, "superpixel id out of range");
  RegionView view;
  view.center_id = i;
  const int yi = label_at(labels, i, override_id, override_label);

  double weighted_sum = sp.means[i] * static_cast<double>(sp.sizes[i]);
  long long weight = sp.sizes[i];
  for (int j : sp.adjacency[i]) {
    if (label_at(labels, j, override_id, override_label) == yi) {
      view.sr1.push_back(j);
      weighted_sum += sp.means[j] * static_cast<double>(sp.sizes[j]);
      weight += sp.sizes[j];
    } else {
      view.sr2.push_back(j);
    }
  }
  view.r_value = weighted_sum / static_cast<double>(weight);
  return view;
}

bool eval_p1(const RegionView& view, const SuperpixelMap& sp, const PredicateConfig& cfg) {
  const double s = sp.means[view.center_id];
  const bool homogeneous = view.sr1.empty() || rms_about(view.sr1, sp, s) < cfg.t1;
  const bool contrasting = view.sr2.empty() || rms_about(view.sr2, sp, s) > cfg.t2;
  return homogeneous && contrasting;
}

bool eval_p2(const RegionView& view, const SuperpixelMap& sp, const PredicateConfig& cfg) {
  const double s = sp.means[view.center_id];
  double max_same = 0.0;
  for (int j : view.sr1) max_same = std::max(max_same, std::abs(sp.means[j] - s));
  double min_other = std::numeric_limits<double>::infinity();
  for (int j : view.sr2) min_other = std::min(min_other, std::abs(sp.means[j] - s));
  const bool homogeneous = view.sr1.empty() || max_same < cfg.t1;
  const bool contrasting = view.sr2.empty() || min_other > cfg.t2;
  return homogeneous && contrasting;
}

double predicate_factor(bool holds, const PredicateConfig& cfg) {
  return holds ? cfg.p_true : cfg.p_false;
}

double local_score(int i, int c, const SuperpixelMap& sp, const Labeling& labels,
                   const ClassModel& model, const PredicateConfig& cfg) {
  if (c < 1 || c > model.k()) raise(ErrorKind::kParameter, "class index out of range");
  const RegionView view = region_view_with(sp, labels, i, i, c);
  double score = posterior_y(sp.means[i], model)[c - 1];
  score *= region_likelihood(view.r_value, c, model);
  if (cfg.p1_enabled) score *= predicate_factor(eval_p1(view, sp, cfg), cfg);
  if (cfg.p2_enabled) score *= predicate_factor(eval_p2(view, sp, cfg), cfg);
  return score;
}

double local_log_score(int i, int c, const SuperpixelMap& sp, const Labeling& labels,
                       const ClassModel& model, const PredicateConfig& cfg) {
  if (c < 1 || c > model.k()) raise(ErrorKind::kParameter, "class index out of range");
  return node_log_score_with(i, sp, labels, model, cfg, i, c);
}

double node_log_score(int i, const SuperpixelMap& sp, const Labeling& labels,
                      const ClassModel& model, const PredicateConfig& cfg) {
  return node_log_score_with(i, sp, labels, model, cfg, -1, 0);
}

double global_score(const Labeling& labels, const SuperpixelMap& sp,
                    const ClassModel& model, const PredicateConfig& cfg) {
  if (labels.size() != sp.n) raise(ErrorKind::kParameter, "labeling size mismatch");
  double total = 0.0;
  for (int i = 0; i < sp.n; ++i) {
    const double term = node_log_score(i, sp, labels, model, cfg);
    if (term == kNegInf) return kNegInf;
    total += term;
  }
  return total;
}

double conditional_log_score(int i, int c, const SuperpixelMap& sp, const Labeling& labels,
                             const ClassModel& model, const PredicateConfig& cfg) {
  if (c < 1 || c > model.k()) raise(ErrorKind::kParameter, "class index out of range");
  double total = node_log_score_with(i, sp, labels, model, cfg, i, c);
  for (int j : sp.adjacency[i]) {
    total += node_log_score_with(j, sp, labels, model, cfg, i, c);
  }
  return total;
}

}  // namespace segbn
