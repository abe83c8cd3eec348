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

#ifndef SEGBN_CLASS_MODEL_HPP_
#define SEGBN_CLASS_MODEL_HPP_

#include <string>
#include <vector>

namespace segbn {

inline constexpr double kDefaultSigma = 50.0;

/// Intensity classes: k Gaussian class centers (sorted ascending) with one
/// standard deviation per class. region_sigmas, when non-empty, replaces
/// sigmas inside region_likelihood only.
struct ClassModel {
  std::vector<double> centers;
  std::vector<double> sigmas;
  std::vector<double> region_sigmas;

  int k() const { return static_cast<int>(centers.size()); }

  /// Throws unless k >= 1, centers strictly increasing, every sigma > 0,
  /// and the two vectors agree in length.
  void validate() const;

  /// Index in 1..k of the center closest to v; ties go to the lower class.
  int nearest_class(double v) const;

  std::string to_json() const;
  static ClassModel from_json(const std::string& text);
};

/// Lloyd's algorithm over scalar intensities with k-means++ seeding driven
/// by the given seed. Runs to an assignment fixpoint or 100 iterations.
/// Returned centers are sorted ascending; sigmas are kDefaultSigma.
ClassModel kmeans_centers(const std::vector<double>& values, int k, std::uint64_t seed);

/// Normal density (1/(sigma sqrt(2 pi))) exp(-(v-mu)^2 / (2 sigma^2)).
double gaussian_density(double v, double mu, double sigma);

/// P(Y=Cj | X=v): per-class Gaussian weights normalized to sum to one.
/// If every weight underflows to zero, the nearest center gets probability 1.
std::vector<double> posterior_y(double v, const ClassModel& model);

/// P(R=r | Y=label): unnormalized Gaussian density under the class's
/// center and sigma. label is 1-based.
double region_likelihood(double r, int label, const ClassModel& model);

}  // namespace segbn

#endif  // SEGBN_CLASS_MODEL_HPP_
