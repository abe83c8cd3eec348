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

#include "segbn/class_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "segbn/error.hpp"
#include <json.hpp>

namespace segbn {
namespace {

constexpr int kMaxLloydIterations = 100;

// Uniform double in [0,1) from the top 53 bits of the generator output.
// Hand-rolled so results do not depend on the standard library's
// distribution implementations.
double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<double> seed_kmeans_pp(const std::vector<double>& values, int k,
                                   std::mt19937_64& rng) {
  std::vector<double> centers;
  centers.reserve(k);
  centers.push_back(values[static_cast<std::size_t>(next_unit(rng) * values.size())]);

  std::vector<double> dist2(values.size());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centers) {
        const double d = values[i] - c;
        best = std::min(best, d * d);
      }
      dist2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      // All points coincide with chosen centers; distinctness was checked
      // upfront, so pick the first value not yet used.
      for (double v : values) {
        if (std::find(centers.begin(), centers.end(), v) == centers.end()) {
          centers.push_back(v);
          break;
        }
      }
      continue;
    }
    const double target = next_unit(rng) * total;
    double acc = 0.0;
    std::size_t chosen = values.size() - 1;
    for (std::size_t i = 0; i < values.size(); ++i) {
      acc += dist2[i];
      if (acc > target) {
        chosen = i;
        break;
      }
    }
    centers.push_back(values[chosen]);
  }
  return centers;
}

}  // namespace

void ClassModel::validate() const {
  if (centers.empty()) raise(ErrorKind::kParameter, "class model needs at least one center");
  if (sigmas.size() != centers.size()) {
    raise(ErrorKind::kParameter, "class model needs one sigma per center");
  }
  for (std::size_t i = 0; i + 1 < centers.size(); ++i) {
    if (!(centers[i] < centers[i + 1])) {
      raise(ErrorKind::kParameter, "class centers must be strictly increasing");
    }
  }
  for (double s : sigmas) {
    if (!(s > 0.0)) raise(ErrorKind::kParameter, "class sigma must be positive");
  }
  if (!region_sigmas.empty()) {
    if (region_sigmas.size() != centers.size()) {
      raise(ErrorKind::kParameter, "region sigma override needs one value per center");
    }
    for (double s : region_sigmas) {
      if (!(s > 0.0)) raise(ErrorKind::kParameter, "region sigma must be positive");
    }
  }
}

int ClassModel::nearest_class(double v) const {
  int best = 1;
  double best_dist = std::abs(v - centers[0]);
  for (int j = 1; j < k(); ++j) {
    const double d = std::abs(v - centers[j]);
    if (d < best_dist) {
      best_dist = d;
      best = j + 1;
    }
  }
  return best;
}

std::string ClassModel::to_json() const {
  nlohmann::json j;
  j["centers"] = centers;
  j["sigmas"] = sigmas;
  if (!region_sigmas.empty()) j["region_sigmas"] = region_sigmas;
  return j.dump();
}

ClassModel ClassModel::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.contains("centers") || !j.contains("sigmas")) {
    raise(ErrorKind::kFormat, "class model JSON needs {centers, sigmas}");
  }
  ClassModel m;
  m.centers = j["centers"].get<std::vector<double>>();
  m.sigmas = j["sigmas"].get<std::vector<double>>();
  if (j.contains("region_sigmas")) {
    m.region_sigmas = j["region_sigmas"].get<std::vector<double>>();
  }
  m.validate();
  return m;
}

ClassModel kmeans_centers(const std::vector<double>& values, int k, std::uint64_t seed) {
  if (values.empty()) raise(ErrorKind::kParameter, "kmeans needs a nonempty value list");
  const std::set<double> distinct(values.begin(), values.end());
  if (k < 2 || static_cast<std::size_t>(k) > distinct.size()) {
    raise(ErrorKind::kParameter,
          "cluster count must be in 2..distinct values (have " +
              std::to_string(distinct.size()) + " distinct)");
  }

  std::mt19937_64 rng(seed);
  std::vector<double> centers = seed_kmeans_pp(values, k, rng);
  std::vector<int> assign(values.size(), -1);

  for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
      int best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double d = std::abs(values[i] - centers[j]);
        if (d < best_dist) {
          best_dist = d;
          best = j;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;

    std::vector<double> sums(k, 0.0);
    std::vector<long long> counts(k, 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
      sums[assign[i]] += values[i];
      counts[assign[i]] += 1;
    }
    for (int j = 0; j < k; ++j) {
      if (counts[j] > 0) {
        centers[j] = sums[j] / static_cast<double>(counts[j]);
      } else {
        // Empty cluster: restart it at the point farthest from its center.
        std::size_t far = 0;
        double far_dist = -1.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
          const double d = std::abs(values[i] - centers[assign[i]]);
          if (d > far_dist) {
            far_dist = d;
            far = i;
          }
        }
        centers[j] = values[far];
        assign[far] = j;
      }
    }
  }

  std::sort(centers.begin(), centers.end());
  ClassModel m;
  m.centers = std::move(centers);
  m.sigmas.assign(k, kDefaultSigma);
  m.validate();
  return m;
}

double gaussian_density(double v, double mu, double sigma) {
  if (!(sigma > 0.0)) raise(ErrorKind::kParameter, "sigma must be positive");
  static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::acos(-1.0));
  const double z = (v - mu) / sigma;
  return inv_sqrt_2pi / sigma * std::exp(-0.5 * z * z);
}

std::vector<double> posterior_y(double v, const ClassModel& model) {
  model.validate();
  std::vector<double> p(model.k());
  double sum = 0.0;
  for (int j = 0; j < model.k(); ++j) {
    p[j] = gaussian_density(v, model.centers[j], model.sigmas[j]);
    sum += p[j];
  }
  if (sum <= 0.0) {
    std::fill(p.begin(), p.end(), 0.0);
    p[model.nearest_class(v) - 1] = 1.0;
    return p;
  }
  for (double& x : p) x /= sum;
  return p;
}

double region_likelihood(double r, int label, const ClassModel& model) {
  if (label < 1 || label > model.k()) {
    raise(ErrorKind::kParameter, "label out of range");
  }
  const std::vector<double>& s = model.region_sigmas.empty() ? model.sigmas : model.region_sigmas;
  return gaussian_density(r, model.centers[label - 1], s[label - 1]);
}

}  // namespace segbn
