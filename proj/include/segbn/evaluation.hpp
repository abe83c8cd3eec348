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

#ifndef SEGBN_EVALUATION_HPP_
#define SEGBN_EVALUATION_HPP_

#include <cstdint>
#include <vector>

#include "segbn/image.hpp"

namespace segbn {

/// Agreement between a predicted label map and ground truth under the best
/// one-to-one matching of predicted classes onto truth classes.
struct EvalReport {
  double accuracy = 0.0;                         // matched pixels / total
  std::vector<double> per_class;                 // per truth class, under the matching
  std::vector<std::vector<long long>> confusion; // rows: truth, cols: predicted
  std::vector<int> matching;                     // truth class t -> pred class (0 = unmatched)
  double seconds = 0.0;
};

/// Permutation-matched pixel accuracy. Exhaustive matching when both label
/// counts are at most 8, greedy confusion-matrix matching otherwise.
EvalReport consistency(const LabelImage& pred, const LabelImage& truth);

/// Global threshold maximizing between-class variance on the 256-bin
/// histogram; ties take the lowest threshold. Pixels <= threshold become
/// class 1. Requires at least two distinct intensities.
struct OtsuResult {
  int threshold = 0;
  LabelImage labels;
};
OtsuResult otsu(const GrayImage& img);

/// Local threshold m + k*s over an odd window with replicate-clamped
/// borders; pixels <= threshold become class 1.
LabelImage niblack(const GrayImage& img, int window = 15, double k_param = -0.2);

/// Local threshold m * (1 + k*(s/R - 1)), same windowing as niblack.
LabelImage sauvola(const GrayImage& img, int window = 15, double k_param = 0.5,
                   double r_param = 128.0);

/// Formula-level helpers used by the window baselines.
double niblack_threshold(double mean, double stddev, double k_param);
double sauvola_threshold(double mean, double stddev, double k_param, double r_param);

/// Axis-aligned rectangle with a base intensity; label is its 1-based index
/// in the region list.
struct RegionSpec {
  int x = 0, y = 0, width = 0, height = 0;
  std::uint8_t intensity = 0;
};

struct SynthImage {
  GrayImage image;
  LabelImage truth;
};

/// Piecewise-constant image from regions that must exactly tile the canvas,
/// plus i.i.d. Gaussian noise (rounded, clamped to 0..255). Deterministic
/// per seed.
SynthImage synth_image(int width, int height, const std::vector<RegionSpec>& regions,
                       double noise_sigma, std::uint64_t seed);

/// Convenience: vertical bands of equal width, one per intensity.
SynthImage synth_vertical_bands(int width, int height, const std::vector<std::uint8_t>& bands,
                                double noise_sigma, std::uint64_t seed);

struct ScalingRow {
  int n = 0;
  double seconds = 0.0;        // model + inference time (the n-dependent stages)
  double total_seconds = 0.0;  // including over-segmentation
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  double r_squared = 1.0;  // of the least-squares line seconds ~ n
};

struct ScalingConfig {
  int classes = 3;
  double balance = 0.5;
  double bandwidth = 30.0;
  std::uint64_t seed = 0;
  int repeats = 3;  // per count; the fastest repetition is reported
};

/// Runs the combined pipeline once per superpixel count and reports wall
/// times with a linear-fit R^2. Counts must be ascending.
ScalingReport scaling_benchmark(const GrayImage& img, const std::vector<int>& counts,
                                const ScalingConfig& cfg = {});

}  // namespace segbn

#endif  // SEGBN_EVALUATION_HPP_
